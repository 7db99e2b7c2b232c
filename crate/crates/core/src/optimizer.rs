//! Successive convex approximation of the secrecy-cost minimization over the
//! stream powers, Alice's artificial-noise power and Bob's jamming power.
//!
//! The cost is `g(x) = R_AE(x) - R_AB(x)` with Eve's rate in its large-system
//! form. For frozen eta values, `g = f + c + k` where `f` is concave, `c` is convex
//! and `k` depends only on the etas. Each iteration linearizes `f` at the current
//! iterate, minimizes the convex surrogate and then re-solves the etas.
//!
//! With [`InterferenceEta::Frozen`] the interference-only eta stays at its value
//! from the previous iterate, which can make the iterates cycle. The default
//! [`InterferenceEta::Tracked`] re-solves it inside the subproblem, which keeps the
//! surrogate an upper bound on the true cost and makes the cost non-increasing.

use crate::channel::{
    exact_rate_bob, BobTerms, LargeScale, LegitChannels, NetworkConfig, PowerAllocation,
};
use crate::linalg::{inverse_hpd, log2_det_hpd, CMat, LOG2_E};
use crate::rmt::{
    asymptotic_rate_eve_general, eta_residual, eve_profile, solve_eta, DiagonalSpectrum,
    EtaSolution,
};
use crate::{Error, Result};

/// How the subproblem treats the eta of Eve's interference-only profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceEta {
    /// Held at the value solved at the previous iterate.
    Frozen,
    /// Solved at every point the subproblem evaluates.
    #[default]
    Tracked,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaSettings {
    /// Relative-change stopping threshold.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Projected-gradient stationarity required of each subproblem.
    pub subproblem_tolerance: f64,
    pub subproblem_max_iterations: usize,
    /// Starting value for both etas.
    pub initial_eta: f64,
    pub interference_eta: InterferenceEta,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iterations: 500,
            subproblem_tolerance: 1e-6,
            subproblem_max_iterations: 20_000,
            initial_eta: 0.5,
            interference_eta: InterferenceEta::default(),
        }
    }
}

impl ScaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        if !(self.initial_eta > 0.0 && self.initial_eta <= 1.0) {
            return Err(Error::InvalidConfig(
                "initial eta must lie in (0, 1]".into(),
            ));
        }
        if self.max_iterations == 0 || self.subproblem_max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "iteration caps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The cost for one channel draw and a fixed stream count `r`.
///
/// Points are vectors `[q_1, .., q_r, p_n, p_b]`.
#[derive(Debug, Clone)]
pub struct SecrecyProblem<'a> {
    cfg: NetworkConfig,
    legit: &'a LegitChannels,
    gains: LargeScale,
    r: usize,
    bob: BobTerms,
}

impl<'a> SecrecyProblem<'a> {
    pub fn new(
        cfg: &NetworkConfig,
        legit: &'a LegitChannels,
        gains: LargeScale,
        r: usize,
    ) -> Result<Self> {
        cfg.validate()?;
        if r < 1 || r > cfg.n_b {
            return Err(Error::InvalidConfig(format!(
                "r = {r} outside 1..={}",
                cfg.n_b
            )));
        }
        if legit.n_a() != cfg.n_a || legit.n_b() != cfg.n_b {
            return Err(Error::InvalidConfig(
                "channel shape does not match the configuration".into(),
            ));
        }
        Ok(Self {
            cfg: *cfg,
            legit,
            gains,
            r,
            bob: BobTerms::new(legit, r),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.r + 2
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    fn noise_dims(&self) -> usize {
        self.cfg.n_a - self.r
    }

    pub fn allocation(&self, x: &[f64]) -> Result<PowerAllocation> {
        PowerAllocation::new(x[..self.r].to_vec(), x[self.r], x[self.r + 1])
    }

    pub fn point(&self, alloc: &PowerAllocation) -> Vec<f64> {
        let mut x = alloc.q().to_vec();
        x.push(alloc.p_n());
        x.push(alloc.p_b());
        x
    }

    /// `q = p_a_max / (2r)`, `p_n = p_a_max / 2` (zero without a null space), `p_b = p_b_max / 2`.
    pub fn initial_point(&self) -> Vec<f64> {
        let mut x = vec![self.cfg.p_a_max / (2.0 * self.r as f64); self.r];
        x.push(if self.noise_dims() > 0 {
            self.cfg.p_a_max / 2.0
        } else {
            0.0
        });
        x.push(self.cfg.p_b_max / 2.0);
        x
    }

    fn profiles(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        eve_profile(
            &self.cfg,
            self.r,
            &x[..self.r],
            x[self.r],
            x[self.r + 1],
            self.gains,
        )
    }

    fn spectra(&self, x: &[f64]) -> Result<(DiagonalSpectrum, DiagonalSpectrum)> {
        let (t3, t4) = self.profiles(x)?;
        let n_e = self.cfg.n_e as f64;
        let (b3, b4) = (t3.len() as f64 / n_e, t4.len() as f64 / n_e);
        Ok((
            DiagonalSpectrum::new(t3, b3)?,
            DiagonalSpectrum::new(t4, b4)?,
        ))
    }

    /// `R_AE - R_AB` with both etas solved at `x`. Negative means positive secrecy.
    pub fn cost(&self, x: &[f64]) -> Result<f64> {
        let alloc = self.allocation(x)?;
        alloc.check(&self.cfg)?;
        Ok(asymptotic_rate_eve_general(&self.cfg, &alloc, self.gains)?
            - exact_rate_bob(self.legit, &alloc, &self.cfg)?)
    }

    /// Solves both fixed-point equations at `x`.
    pub fn eta_update(&self, x: &[f64]) -> Result<(EtaSolution, EtaSolution)> {
        let (s3, s4) = self.spectra(x)?;
        Ok((solve_eta(&s3), solve_eta(&s4)))
    }

    fn c_b(&self, x: &[f64]) -> CMat {
        self.bob
            .interference(x[self.r], x[self.r + 1], self.cfg.rho)
    }

    /// Concave part `log|C_B| + sum log(1 + eta3 theta3)`.
    pub fn concave_part(&self, x: &[f64], eta3: f64) -> Result<f64> {
        let (t3, _) = self.profiles(x)?;
        let logs: f64 = t3.iter().map(|t| (eta3 * t).ln_1p()).sum();
        Ok(log2_det_hpd(&self.c_b(x), "Bob's interference covariance")? + logs * LOG2_E)
    }

    /// Gradient of [`Self::concave_part`].
    pub fn concave_gradient(&self, x: &[f64], eta3: f64) -> Result<Vec<f64>> {
        let (r, n_e, n_b) = (self.r, self.cfg.n_e as f64, self.cfg.n_b as f64);
        let (a, b) = (self.gains.a, self.gains.b);
        let c_inv = inverse_hpd(&self.c_b(x), "Bob's interference covariance")?;
        let mut grad = vec![0.0; self.dim()];
        for i in 0..r {
            let t = n_e * a * x[i];
            grad[i] = eta3 * n_e * a / (1.0 + eta3 * t) * LOG2_E;
        }
        let nd = self.noise_dims();
        if nd > 0 {
            let t = n_e * a * x[r] / nd as f64;
            grad[r] = (&c_inv * &self.bob.noise_gram).trace().re / nd as f64 * LOG2_E
                + eta3 * n_e * a / (1.0 + eta3 * t) * LOG2_E;
        }
        let t = n_e * b * x[r + 1] / n_b;
        grad[r + 1] = (&c_inv * &self.bob.jam_gram).trace().re * self.cfg.rho / n_b * LOG2_E
            + eta3 * n_e * b / (1.0 + eta3 * t) * LOG2_E;
        Ok(grad)
    }

    /// Convex part `-log|C_B + signal| - sum log(1 + eta4 theta4)`.
    pub fn convex_part(&self, x: &[f64], eta4: f64) -> Result<f64> {
        let (_, t4) = self.profiles(x)?;
        let logs: f64 = t4.iter().map(|t| (eta4 * t).ln_1p()).sum();
        let m = self.c_b(x) + self.bob.signal_cov(&x[..self.r]);
        Ok(-log2_det_hpd(&m, "Bob's received covariance")? - logs * LOG2_E)
    }

    /// Gradient of [`Self::convex_part`].
    pub fn convex_gradient(&self, x: &[f64], eta4: f64) -> Result<Vec<f64>> {
        let (r, n_e, n_b) = (self.r, self.cfg.n_e as f64, self.cfg.n_b as f64);
        let (a, b) = (self.gains.a, self.gains.b);
        let m = self.c_b(x) + self.bob.signal_cov(&x[..r]);
        let m_inv = inverse_hpd(&m, "Bob's received covariance")?;
        let mut grad = vec![0.0; self.dim()];
        for (i, g) in grad.iter_mut().enumerate().take(r) {
            let h = self.bob.signal.column(i);
            *g = -(h.adjoint() * &m_inv * h)[(0, 0)].re * LOG2_E;
        }
        let nd = self.noise_dims();
        if nd > 0 {
            let t = n_e * a * x[r] / nd as f64;
            grad[r] = -(&m_inv * &self.bob.noise_gram).trace().re / nd as f64 * LOG2_E
                - eta4 * n_e * a / (1.0 + eta4 * t) * LOG2_E;
        }
        let t = n_e * b * x[r + 1] / n_b;
        grad[r + 1] = -(&m_inv * &self.bob.jam_gram).trace().re * self.cfg.rho / n_b * LOG2_E
            - eta4 * n_e * b / (1.0 + eta4 * t) * LOG2_E;
        Ok(grad)
    }

    /// The eta-only terms `n_e log(eta4 / eta3) + n_e (eta3 - eta4) log e`.
    pub fn eta_constant(&self, eta3: f64, eta4: f64) -> f64 {
        self.eta_offset(eta3) - self.eta_offset(eta4)
    }

    /// `-n_e log eta + n_e (eta - 1) log e`.
    fn eta_offset(&self, eta: f64) -> f64 {
        let n_e = self.cfg.n_e as f64;
        n_e * (-eta.log2() + (eta - 1.0) * LOG2_E)
    }

    /// Interference-only eta solved at `x`.
    pub fn interference_eta(&self, x: &[f64]) -> Result<f64> {
        let (_, s4) = self.spectra(x)?;
        Ok(solve_eta(&s4).eta)
    }

    /// Convex part with the interference eta solved at `x`:
    /// `-log|C_B + signal| - n_e * Omega(interference profile)`.
    pub fn tracked_convex_part(&self, x: &[f64]) -> Result<f64> {
        let eta4 = self.interference_eta(x)?;
        Ok(self.convex_part(x, eta4)? - self.eta_offset(eta4))
    }

    /// The cost evaluated with frozen etas. Equal to [`Self::cost`] when the etas
    /// solve their fixed-point equations at `x`.
    pub fn cost_at_fixed_eta(&self, x: &[f64], eta3: f64, eta4: f64) -> Result<f64> {
        Ok(
            self.concave_part(x, eta3)?
                + self.convex_part(x, eta4)?
                + self.eta_constant(eta3, eta4),
        )
    }

    /// Euclidean projection onto `{q >= 0, p_n >= 0, sum q + p_n <= p_a_max, 0 <= p_b <= p_b_max}`,
    /// with `p_n` pinned to zero when there is no null space.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let r = self.r;
        let mut out = x.to_vec();
        let alice_len = if self.noise_dims() > 0 { r + 1 } else { r };
        project_capped_simplex(&mut out[..alice_len], self.cfg.p_a_max);
        if alice_len == r {
            out[r] = 0.0;
        }
        out[r + 1] = x[r + 1].clamp(0.0, self.cfg.p_b_max);
        out
    }

    /// Builds the convex surrogate around `anchor` for the given etas.
    pub fn surrogate(
        &self,
        anchor: &[f64],
        eta3: f64,
        eta4: f64,
        mode: InterferenceEta,
    ) -> Result<Surrogate> {
        Ok(Surrogate {
            anchor: anchor.to_vec(),
            eta3,
            eta4,
            mode,
            grad_f: self.concave_gradient(anchor, eta3)?,
            f_anchor: self.concave_part(anchor, eta3)?,
        })
    }
}

/// Projects `v` onto `{z >= 0, sum z <= cap}` in place.
pub fn project_capped_simplex(v: &mut [f64], cap: f64) {
    let clipped: f64 = v.iter().map(|z| z.max(0.0)).sum();
    if clipped <= cap {
        v.iter_mut().for_each(|z| *z = z.max(0.0));
        return;
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = sorted[0];
    let mut theta = sorted[0] - cap;
    for (k, u) in sorted.iter().enumerate().skip(1) {
        cumulative += u;
        let t = (cumulative - cap) / (k + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|z| *z = (*z - theta).max(0.0));
}

/// Convex surrogate: the convex part plus the linearization of the concave part.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub anchor: Vec<f64>,
    pub eta3: f64,
    /// Interference-only eta; only used in [`InterferenceEta::Frozen`] mode.
    pub eta4: f64,
    pub mode: InterferenceEta,
    pub grad_f: Vec<f64>,
    /// Concave part at the anchor.
    pub f_anchor: f64,
}

impl Surrogate {
    pub fn value(&self, problem: &SecrecyProblem, x: &[f64]) -> Result<f64> {
        let lin: f64 = x
            .iter()
            .zip(&self.anchor)
            .zip(&self.grad_f)
            .map(|((xi, ai), gi)| (xi - ai) * gi)
            .sum();
        let convex = match self.mode {
            InterferenceEta::Frozen => problem.convex_part(x, self.eta4)?,
            InterferenceEta::Tracked => problem.tracked_convex_part(x)?,
        };
        Ok(convex + lin)
    }

    pub fn gradient(&self, problem: &SecrecyProblem, x: &[f64]) -> Result<Vec<f64>> {
        // the tracked eta is stationary, so its own derivative drops out
        let eta4 = match self.mode {
            InterferenceEta::Frozen => self.eta4,
            InterferenceEta::Tracked => problem.interference_eta(x)?,
        };
        let mut g = problem.convex_gradient(x, eta4)?;
        g.iter_mut()
            .zip(&self.grad_f)
            .for_each(|(gi, fi)| *gi += fi);
        Ok(g)
    }

    /// Surrogate shifted by the dropped constants. It touches the cost at the
    /// anchor when the etas were solved there. In frozen mode it lies above the
    /// frozen-eta cost, in tracked mode above the true cost.
    pub fn majorizer(&self, problem: &SecrecyProblem, x: &[f64]) -> Result<f64> {
        let constant = match self.mode {
            InterferenceEta::Frozen => problem.eta_constant(self.eta3, self.eta4),
            InterferenceEta::Tracked => problem.eta_offset(self.eta3),
        };
        Ok(self.value(problem, x)? + self.f_anchor + constant)
    }
}

/// Result of a projected-gradient minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub start_value: f64,
    /// `||x - P(x - grad)||_inf` at the returned point.
    pub stationarity: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected gradient descent with Barzilai-Borwein steps and monotone Armijo
/// backtracking along the projection arc.
pub fn minimize_projected(
    mut value: impl FnMut(&[f64]) -> Result<f64>,
    mut gradient: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    project: impl Fn(&[f64]) -> Vec<f64>,
    start: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> Result<SubproblemOutcome> {
    const ARMIJO: f64 = 1e-4;
    const MIN_STEP: f64 = 1e-12;
    const MAX_STEP: f64 = 1e12;

    let mut x = project(start);
    let mut fx = value(&x)?;
    let start_value = fx;
    let mut g = gradient(&x)?;
    let mut step = 1.0;
    let stationarity_at = |x: &[f64], g: &[f64]| {
        let trial: Vec<f64> = x.iter().zip(g).map(|(xi, gi)| xi - gi).collect();
        inf_norm_diff(x, &project(&trial))
    };
    let mut stat = stationarity_at(&x, &g);
    let mut iterations = 0;
    while stat > tolerance && iterations < max_iterations {
        iterations += 1;
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
            let xn = project(&trial);
            let d: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &d);
            if decrease >= 0.0 {
                alpha *= 0.5;
                continue;
            }
            let fxn = value(&xn)?;
            if fxn <= fx + ARMIJO * decrease {
                accepted = Some((xn, fxn, d));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fxn, s)) = accepted else {
            break;
        };
        let gn = gradient(&xn)?;
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(MIN_STEP, MAX_STEP)
        } else {
            MAX_STEP
        };
        x = xn;
        fx = fxn;
        g = gn;
        stat = stationarity_at(&x, &g);
    }
    Ok(SubproblemOutcome {
        converged: stat <= tolerance,
        x,
        value: fx,
        start_value,
        stationarity: stat,
        iterations,
    })
}

/// Minimizes the surrogate over the feasible set starting from its anchor.
pub fn solve_convex_subproblem(
    problem: &SecrecyProblem,
    surrogate: &Surrogate,
    settings: &ScaSettings,
) -> Result<SubproblemOutcome> {
    minimize_projected(
        |x| surrogate.value(problem, x),
        |x| surrogate.gradient(problem, x),
        |x| problem.project(x),
        &surrogate.anchor,
        settings.subproblem_tolerance,
        settings.subproblem_max_iterations,
    )
}

/// Iterate of the SCA loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    pub x: Vec<f64>,
    pub eta3: EtaSolution,
    pub eta4: EtaSolution,
    pub t: usize,
    /// Cost after each completed iteration.
    pub g_history: Vec<f64>,
}

impl ScaState {
    /// Starting state with both etas set to `settings.initial_eta` (not yet solved at `x`).
    pub fn initial(problem: &SecrecyProblem, settings: &ScaSettings) -> Result<Self> {
        let x = problem.initial_point();
        let (s3, s4) = problem.spectra(&x)?;
        let eta = settings.initial_eta;
        let at = |s: &DiagonalSpectrum| EtaSolution {
            eta,
            residual: eta_residual(s, eta),
            iterations: 0,
        };
        Ok(Self {
            eta3: at(&s3),
            eta4: at(&s4),
            x,
            t: 0,
            g_history: Vec::new(),
        })
    }
}

/// Diagnostics for one SCA iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    /// Cost at the new iterate.
    pub g: f64,
    pub h_before: f64,
    pub h_after: f64,
    pub eta3: f64,
    pub eta4: f64,
    /// `||x^{t+1} - x^t||`.
    pub step: f64,
    pub relative_change: f64,
    pub subproblem_iterations: usize,
    pub subproblem_converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaRun {
    pub r: usize,
    pub allocation: PowerAllocation,
    pub g: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Runs SCA for the problem's stream count until the relative change of the
/// iterate drops to `epsilon`.
pub fn run_sca(problem: &SecrecyProblem, settings: &ScaSettings) -> Result<ScaRun> {
    settings.validate()?;
    let mut state = ScaState::initial(problem, settings)?;
    let cfg = problem.config();
    let zero_scale = cfg.p_a_max.max(cfg.p_b_max);
    let mut trace = Vec::new();
    let mut converged = false;
    while state.t < settings.max_iterations {
        let sur = problem.surrogate(
            &state.x,
            state.eta3.eta,
            state.eta4.eta,
            settings.interference_eta,
        )?;
        let h_before = sur.value(problem, &state.x)?;
        let sub = solve_convex_subproblem(problem, &sur, settings)?;
        // descent on the frozen-eta surrogate
        debug_assert!(sub.value <= h_before + 1e-9 * (1.0 + h_before.abs()));
        let (eta3, eta4) = problem.eta_update(&sub.x)?;
        let g = problem.cost(&sub.x)?;
        let step = norm2(
            &sub.x
                .iter()
                .zip(&state.x)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        let prev_norm = norm2(&state.x);
        let (relative_change, done) = if prev_norm > 0.0 {
            let rc = step / prev_norm;
            (rc, rc <= settings.epsilon)
        } else {
            let n = norm2(&sub.x);
            (f64::INFINITY, n <= settings.epsilon * zero_scale)
        };
        state.t += 1;
        trace.push(IterationRecord {
            t: state.t,
            g,
            h_before,
            h_after: sub.value,
            eta3: eta3.eta,
            eta4: eta4.eta,
            step,
            relative_change,
            subproblem_iterations: sub.iterations,
            subproblem_converged: sub.converged,
        });
        state.g_history.push(g);
        state.x = sub.x;
        state.eta3 = eta3;
        state.eta4 = eta4;
        if done {
            converged = true;
            break;
        }
    }
    let g = match state.g_history.last() {
        Some(&g) => g,
        None => problem.cost(&state.x)?,
    };
    Ok(ScaRun {
        r: problem.r(),
        allocation: problem.allocation(&state.x)?,
        g,
        iterations: state.t,
        converged,
        trace,
    })
}

/// Best allocation over all stream counts.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Stream count of the best allocation (1 when the zero allocation wins).
    pub r: usize,
    pub allocation: PowerAllocation,
    /// Minimum cost, never positive.
    pub g: f64,
    pub runs: Vec<ScaRun>,
}

impl OptimizationResult {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.converged)
    }
}

/// Runs SCA for every `r` in `1..=n_b` and keeps the lowest cost, starting from
/// the zero allocation with cost zero.
pub fn optimize_powers(
    legit: &LegitChannels,
    cfg: &NetworkConfig,
    gains: LargeScale,
    settings: &ScaSettings,
) -> Result<OptimizationResult> {
    let mut best = OptimizationResult {
        r: 1,
        allocation: PowerAllocation::zero(1),
        g: 0.0,
        runs: Vec::new(),
    };
    for r in 1..=cfg.n_b {
        let problem = SecrecyProblem::new(cfg, legit, gains, r)?;
        let run = run_sca(&problem, settings)?;
        if run.g < best.g {
            best.g = run.g;
            best.r = r;
            best.allocation = run.allocation.clone();
        }
        best.runs.push(run);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn setup(n_a: usize, n_b: usize, n_e: usize, seed: u64) -> (NetworkConfig, ChannelRealization) {
        let cfg = NetworkConfig {
            n_a,
            n_b,
            n_e,
            ..NetworkConfig::default()
        };
        let ch = ChannelRealization::sample(&cfg, seed, 0);
        (cfg, ch)
    }

    fn random_feasible(problem: &SecrecyProblem, rng: &mut impl Rng) -> Vec<f64> {
        let cfg = problem.config();
        let raw: Vec<f64> = (0..problem.dim())
            .map(|_| rng.random::<f64>() * cfg.p_a_max / problem.r() as f64)
            .collect();
        problem.project(&raw)
    }

    fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|k| {
                let h = 1e-4 * x[k].abs().max(1.0);
                let mut up = x.to_vec();
                let mut down = x.to_vec();
                up[k] += h;
                down[k] -= h;
                (f(&up) - f(&down)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn zero_point_has_zero_cost_and_unit_etas() {
        let (cfg, ch) = setup(6, 3, 5, 1);
        let gains = LargeScale { a: 3.0, b: 0.5 };
        let p = SecrecyProblem::new(&cfg, &ch.legit, gains, 2).unwrap();
        let zero = vec![0.0; p.dim()];
        assert_eq!(p.cost(&zero).unwrap(), 0.0);
        let (e3, e4) = p.eta_update(&zero).unwrap();
        assert_eq!((e3.eta, e4.eta), (1.0, 1.0));
    }

    #[test]
    fn fixed_eta_cost_matches_cost_at_solved_eta() {
        let (cfg, ch) = setup(6, 3, 10, 2);
        let gains = LargeScale { a: 2.0, b: 0.7 };
        let mut rng = substream(99, 0);
        for r in 1..=3 {
            let p = SecrecyProblem::new(&cfg, &ch.legit, gains, r).unwrap();
            for _ in 0..5 {
                let x = random_feasible(&p, &mut rng);
                let (e3, e4) = p.eta_update(&x).unwrap();
                assert_relative_eq!(
                    p.cost_at_fixed_eta(&x, e3.eta, e4.eta).unwrap(),
                    p.cost(&x).unwrap(),
                    epsilon = 1e-8
                );
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (cfg, ch) = setup(8, 4, 12, 3);
        let gains = LargeScale { a: 1.5, b: 0.8 };
        let mut rng = substream(98, 0);
        for k in 0..50 {
            let r = 1 + k % 4;
            let p = SecrecyProblem::new(&cfg, &ch.legit, gains, r).unwrap();
            let x = random_feasible(&p, &mut rng);
            let (e3, e4) = (rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
            let an = p.concave_gradient(&x, e3).unwrap();
            let fd = central_difference(|y| p.concave_part(y, e3).unwrap(), &x);
            let scale = an.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(
                inf_norm_diff(&an, &fd) <= 1e-6 * scale,
                "concave {an:?} vs {fd:?}"
            );
            let an = p.convex_gradient(&x, e4).unwrap();
            let fd = central_difference(|y| p.convex_part(y, e4).unwrap(), &x);
            let scale = an.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(
                inf_norm_diff(&an, &fd) <= 1e-6 * scale,
                "convex {an:?} vs {fd:?}"
            );
        }
    }

    #[test]
    fn q_gradient_has_closed_form() {
        let (cfg, ch) = setup(6, 3, 7, 4);
        let gains = LargeScale { a: 2.0, b: 1.0 };
        let p = SecrecyProblem::new(&cfg, &ch.legit, gains, 3).unwrap();
        let x = vec![50.0, 20.0, 10.0, 100.0, 300.0];
        let eta = 0.3;
        let g = p.concave_gradient(&x, eta).unwrap();
        for i in 0..3 {
            let want = 2.0 * eta * 7.0 / ((1.0 + eta * 7.0 * 2.0 * x[i]) * std::f64::consts::LN_2);
            assert_relative_eq!(g[i], want, max_relative = 1e-12);
        }
    }

    #[test]
    fn jamming_gradient_of_bob_term_vanishes_without_self_interference() {
        let cfg = NetworkConfig {
            rho: 0.0,
            n_a: 6,
            n_b: 3,
            n_e: 4,
            ..NetworkConfig::default()
        };
        let ch = ChannelRealization::sample(&cfg, 5, 0);
        let gains = LargeScale { a: 1.0, b: 2.0 };
        let p = SecrecyProblem::new(&cfg, &ch.legit, gains, 2).unwrap();
        let x = vec![10.0, 10.0, 0.0, 0.0];
        let eta = 0.4;
        let g = p.concave_gradient(&x, eta).unwrap();
        // only the Eve-side term remains
        let want = eta * 4.0 * 2.0 * LOG2_E;
        assert_relative_eq!(g[3], want, max_relative = 1e-12);
    }

    #[test]
    fn surrogate_majorizes_frozen_eta_cost() {
        let (cfg, ch) = setup(8, 4, 20, 6);
        let gains = LargeScale { a: 1.2, b: 0.9 };
        let mut rng = substream(97, 0);
        let p = SecrecyProblem::new(&cfg, &ch.legit, gains, 3).unwrap();
        let anchor = random_feasible(&p, &mut rng);
        let (e3, e4) = p.eta_update(&anchor).unwrap();
        let sur = p
            .surrogate(&anchor, e3.eta, e4.eta, InterferenceEta::Frozen)
            .unwrap();
        assert_relative_eq!(
            sur.majorizer(&p, &anchor).unwrap(),
            p.cost(&anchor).unwrap(),
            epsilon = 1e-8
        );
        let g = sur.gradient(&p, &anchor).unwrap();
        let mut want = p.convex_gradient(&anchor, e4.eta).unwrap();
        want.iter_mut()
            .zip(p.concave_gradient(&anchor, e3.eta).unwrap())
            .for_each(|(w, f)| *w += f);
        assert_eq!(g, want);
        for _ in 0..100 {
            let x = random_feasible(&p, &mut rng);
            let upper = sur.majorizer(&p, &x).unwrap();
            let exact = p.cost_at_fixed_eta(&x, e3.eta, e4.eta).unwrap();
            assert!(upper >= exact - 1e-9, "{upper} < {exact}");
        }
    }

    #[test]
    fn tracked_surrogate_majorizes_true_cost() {
        let (cfg, ch) = setup(8, 4, 6, 12);
        let gains = LargeScale { a: 30.0, b: 0.5 };
        let mut rng = substream(96, 0);
        let p = SecrecyProblem::new(&cfg, &ch.legit, gains, 4).unwrap();
        let anchor = random_feasible(&p, &mut rng);
        let (e3, e4) = p.eta_update(&anchor).unwrap();
        let sur = p
            .surrogate(&anchor, e3.eta, e4.eta, InterferenceEta::Tracked)
            .unwrap();
        assert_relative_eq!(
            sur.majorizer(&p, &anchor).unwrap(),
            p.cost(&anchor).unwrap(),
            epsilon = 1e-8
        );
        for _ in 0..100 {
            let x = random_feasible(&p, &mut rng);
            let upper = sur.majorizer(&p, &x).unwrap();
            assert!(upper >= p.cost(&x).unwrap() - 1e-8);
        }
        let x = random_feasible(&p, &mut rng);
        let an = sur.gradient(&p, &x).unwrap();
        let fd = central_difference(|y| sur.value(&p, y).unwrap(), &x);
        let scale = an.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(inf_norm_diff(&an, &fd) <= 1e-6 * scale, "{an:?} vs {fd:?}");
    }

    #[test]
    fn tracked_mode_never_increases_the_cost() {
        let (cfg, ch) = setup(8, 4, 1, 13);
        let gains = path_loss_worst(&cfg);
        let p = SecrecyProblem::new(&cfg, &ch.legit, gains, 4).unwrap();
        let run = run_sca(&p, &ScaSettings::default()).unwrap();
        assert!(run.converged);
        assert!(run.trace.windows(2).all(|w| w[1].g <= w[0].g + 1e-9));
    }

    fn path_loss_worst(cfg: &NetworkConfig) -> LargeScale {
        crate::channel::path_loss(crate::channel::worst_case_eve_position(cfg), cfg).unwrap()
    }

    #[test]
    fn capped_simplex_projection() {
        let mut v = vec![3.0, -1.0, 2.0];
        project_capped_simplex(&mut v, 10.0);
        assert_eq!(v, vec![3.0, 0.0, 2.0]);
        let mut v = vec![3.0, 1.0, 2.0];
        project_capped_simplex(&mut v, 3.0);
        assert_relative_eq!(v[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(v[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(v[2], 1.0, epsilon = 1e-12);
        let mut v = vec![0.3, -5.0];
        project_capped_simplex(&mut v, 0.0);
        assert_eq!(v, vec![0.0, 0.0]);
    }

    #[test]
    fn linear_objective_goes_to_the_origin() {
        let (cfg, ch) = setup(6, 3, 4, 7);
        let p = SecrecyProblem::new(&cfg, &ch.legit, LargeScale::UNIT, 2).unwrap();
        let c = [1.0, 2.0, 0.5, 3.0];
        let out = minimize_projected(
            |x| Ok(dot(x, &c)),
            |_| Ok(c.to_vec()),
            |x| p.project(x),
            &p.initial_point(),
            1e-6,
            1000,
        )
        .unwrap();
        assert!(out.converged);
        assert!(out.x.iter().all(|v| *v == 0.0));
    }

    fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        while hi - lo > 1e-9 * (1.0 + hi.abs()) {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn one_dimensional_subproblem_matches_golden_section() {
        // r = 1 with the noise and jamming powers held at zero
        let cfg = NetworkConfig {
            n_a: 4,
            n_b: 1,
            n_e: 6,
            ..NetworkConfig::default()
        };
        let ch = ChannelRealization::sample(&cfg, 8, 0);
        let gains = LargeScale { a: 0.05, b: 1.0 };
        let p = SecrecyProblem::new(&cfg, &ch.legit, gains, 1).unwrap();
        let anchor = vec![400.0, 0.0, 0.0];
        let (e3, e4) = p.eta_update(&anchor).unwrap();
        let sur = p
            .surrogate(&anchor, e3.eta, e4.eta, InterferenceEta::Frozen)
            .unwrap();
        let h = |q: f64| sur.value(&p, &[q, 0.0, 0.0]).unwrap();
        let oracle = golden_section(h, 0.0, cfg.p_a_max);
        let pinned = |x: &[f64]| {
            let mut y = p.project(x);
            y[1] = 0.0;
            y[2] = 0.0;
            y
        };
        let out = minimize_projected(
            |x| sur.value(&p, x),
            |x| sur.gradient(&p, x),
            pinned,
            &anchor,
            1e-9,
            10_000,
        )
        .unwrap();
        assert!(
            (out.x[0] - oracle).abs() <= 1e-5 * oracle.max(1.0),
            "{} vs {oracle}",
            out.x[0]
        );
    }

    #[test]
    fn subproblem_reaches_stationarity_and_descends() {
        let (cfg, ch) = setup(8, 4, 16, 9);
        let p = SecrecyProblem::new(&cfg, &ch.legit, LargeScale::UNIT, 4).unwrap();
        let x0 = p.initial_point();
        let sur = p
            .surrogate(&x0, 0.5, 0.5, InterferenceEta::Tracked)
            .unwrap();
        let out = solve_convex_subproblem(&p, &sur, &ScaSettings::default()).unwrap();
        assert!(out.converged, "stationarity {}", out.stationarity);
        assert!(out.stationarity <= 1e-6);
        assert!(out.value <= out.start_value);
        assert!(p.allocation(&out.x).unwrap().check(&cfg).is_ok());
    }

    #[test]
    fn zero_alice_budget_gives_zero_allocation() {
        let cfg = NetworkConfig {
            p_a_max: 0.0,
            n_a: 4,
            n_b: 2,
            n_e: 4,
            ..NetworkConfig::default()
        };
        let ch = ChannelRealization::sample(&cfg, 10, 0);
        let res =
            optimize_powers(&ch.legit, &cfg, LargeScale::UNIT, &ScaSettings::default()).unwrap();
        assert_eq!(res.g, 0.0);
        assert_eq!(res.allocation.p_s() + res.allocation.p_n(), 0.0);
    }

    #[test]
    fn optimizer_finds_positive_secrecy_with_few_eve_antennas() {
        let (cfg, ch) = setup(8, 4, 4, 11);
        let res =
            optimize_powers(&ch.legit, &cfg, LargeScale::UNIT, &ScaSettings::default()).unwrap();
        assert!(res.g < 0.0);
        assert!(res.allocation.check(&cfg).is_ok());
        for run in &res.runs {
            assert!(run.allocation.check(&cfg).is_ok());
            for rec in &run.trace {
                assert!(rec.h_after <= rec.h_before + 1e-9 * (1.0 + rec.h_before.abs()));
            }
        }
    }
}
