//! Eve's blind detection of Alice's symbols without channel knowledge.
//!
//! Eve jointly fits channel and symbols to `Y = sqrt(a) A S + N`. Eliminating the
//! channel leaves the objective `f(S) = Tr(S^H (S S^H)^{-1} S Z)` with
//! `Z = Y^H Y`, which is invariant under `S -> T S` for any invertible `T`. The
//! ambiguity is removed by treating the first `n_a` transmitted vectors as known.
//!
//! Around the true symbols the detection error is modelled by a second-order
//! expansion in Wirtinger calculus. Vectors are column-major `vec(S)`; the
//! conjugate gradient is `g = df/ds*` and the Hessians are `H_ss = dg/ds`,
//! `H_s*s = dg/ds*`.

use rayon::prelude::*;

use crate::linalg::{
    commutation, condition, gram, hpd_condition, identity, inverse, kron, log2_det_hpd, real,
    vec_of, CMat, CVec, C64,
};
use crate::rng::{cn_matrix, stream_index, substream, StreamRng};
use crate::{Error, Result};

/// Default cap on the number of candidates visited by [`exhaustive_blind_search`].
pub const ENUMERATION_CAP: u64 = 1 << 20;

/// `S S^H` is regularized above this condition number.
pub const REGULARIZATION_CONDITION: f64 = 1e12;

/// Trials whose Schur complement exceeds this condition number are excluded.
pub const SCHUR_CONDITION_LIMIT: f64 = 1e12;

const TAG_BLIND: u64 = 0xB11D_0001;

/// Finite symbol alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<C64>,
}

impl Constellation {
    pub fn new(points: Vec<C64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidConfig(
                "constellation needs at least two points".into(),
            ));
        }
        let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let mean: C64 = points.iter().sum::<C64>() / points.len() as f64;
        if mean.norm() > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidConfig(
                "constellation must have zero mean".into(),
            ));
        }
        Ok(Self { points })
    }

    /// Gray-labelled 4-QAM with mean symbol energy `symbol_power`. Label bit 0
    /// selects the sign of the real part, bit 1 the sign of the imaginary part.
    pub fn qam4(symbol_power: f64) -> Self {
        let amp = (symbol_power / 2.0).sqrt();
        let points = (0..4)
            .map(|label| {
                let re = if label & 1 == 0 { amp } else { -amp };
                let im = if label & 2 == 0 { amp } else { -amp };
                C64::new(re, im)
            })
            .collect();
        Self { points }
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean symbol energy under uniform selection.
    pub fn power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.points.len() as f64
    }

    /// Matrix of uniformly drawn symbols.
    pub fn sample(&self, rng: &mut StreamRng, rows: usize, cols: usize) -> CMat {
        use rand::Rng;
        CMat::from_fn(rows, cols, |_, _| {
            self.points[rng.random_range(0..self.points.len())]
        })
    }
}

/// A value together with whether a Tikhonov-regularized inverse was needed.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub regularized: bool,
}

/// `(M M^H)^{-1}`, regularized with `1e-10 tr(M M^H) / rows` when ill-conditioned.
pub fn gram_inverse(m: &CMat) -> Flagged<CMat> {
    let g = gram(m);
    let n = g.nrows();
    if hpd_condition(&g) <= REGULARIZATION_CONDITION {
        if let Ok(inv) = crate::linalg::inverse_hpd(&g, "symbol gram") {
            return Flagged {
                value: inv,
                regularized: false,
            };
        }
    }
    let lambda = 1e-10 * g.trace().re / n as f64;
    // A zero matrix has zero trace; fall back to a unit ridge.
    let lambda = if lambda > 0.0 { lambda } else { 1e-10 };
    let reg = g + identity(n).scale(lambda);
    let value = crate::linalg::inverse_hpd(&reg, "regularized symbol gram")
        .unwrap_or_else(|_| identity(n).scale(1.0 / lambda));
    Flagged {
        value,
        regularized: true,
    }
}

// Quantities shared by the objective and its derivatives.
struct Pieces {
    /// `(S S^H)^{-1}`.
    w: CMat,
    /// Projector onto the row space of `S`.
    proj: CMat,
    regularized: bool,
}

fn pieces(s: &CMat) -> Pieces {
    let Flagged {
        value: w,
        regularized,
    } = gram_inverse(s);
    let proj = s.adjoint() * &w * s;
    Pieces {
        w,
        proj,
        regularized,
    }
}

/// `f(S) = Re Tr(S^H (S S^H)^{-1} S Z)`.
pub fn objective(s: &CMat, z: &CMat) -> Flagged<f64> {
    let p = pieces(s);
    Flagged {
        value: (&p.proj * z).trace().re,
        regularized: p.regularized,
    }
}

/// Wirtinger gradients of [`objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// `df/ds`.
    pub wrt_s: CVec,
    /// `df/ds*`.
    pub wrt_conj_s: CVec,
    pub regularized: bool,
}

/// `df/ds* = vec((S S^H)^{-1} S Z (I - P))`, `df/ds = conj(df/ds*)`.
pub fn gradients(s: &CMat, z: &CMat) -> Gradients {
    let p = pieces(s);
    let k2 = s.ncols();
    let g = &p.w * s * z * (identity(k2) - &p.proj);
    let wrt_conj_s = vec_of(&g);
    Gradients {
        wrt_s: wrt_conj_s.conjugate(),
        wrt_conj_s,
        regularized: p.regularized,
    }
}

/// Wirtinger Hessians of [`objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct Hessians {
    /// `H_ss = d(df/ds*)/ds`, Hermitian.
    pub ss: CMat,
    /// `H_s*s = d(df/ds*)/ds*`, symmetric.
    pub conj_s: CMat,
    pub regularized: bool,
}

impl Hessians {
    /// `H_ss* = d(df/ds)/ds = conj(H_s*s)` since `f` is real.
    pub fn s_conj(&self) -> CMat {
        self.conj_s.conjugate()
    }

    /// `H_s*s* = d(df/ds)/ds* = conj(H_ss)` since `f` is real.
    pub fn conj_conj(&self) -> CMat {
        self.ss.conjugate()
    }
}

/// With `W = (S S^H)^{-1}`, `P = S^H W S`, `Q = I - P`:
/// `H_ss = (Q Z Q)^T ⊗ W - Q^T ⊗ (W S Z S^H W)` and
/// `H_s*s = -[C^T ⊗ B + B^T ⊗ C] Π` with `B = W S`, `C = W S Z Q` and `Π` the
/// commutation matrix of an `n_a x k2` matrix.
pub fn hessians(s: &CMat, z: &CMat) -> Hessians {
    let p = pieces(s);
    let (n_a, k2) = s.shape();
    let q = identity(k2) - &p.proj;
    let b = &p.w * s;
    let c = &b * z * &q;
    let ss = kron(&(&q * z * &q).transpose(), &p.w) - kron(&q.transpose(), &(&b * z * b.adjoint()));
    let conj_s = -(kron(&c.transpose(), &b) + kron(&b.transpose(), &c)) * commutation(n_a, k2);
    Hessians {
        ss,
        conj_s,
        regularized: p.regularized,
    }
}

/// Received block and detector settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindProblem {
    /// `n_e x k2` received matrix.
    pub y_e: CMat,
    /// `Y^H Y`.
    pub z: CMat,
    pub constellation: Constellation,
    pub n_a: usize,
    pub k2: usize,
}

impl BlindProblem {
    pub fn new(y_e: CMat, n_a: usize, constellation: Constellation) -> Result<Self> {
        let k2 = y_e.ncols();
        if n_a == 0 || k2 <= n_a {
            return Err(Error::InvalidConfig(
                "blind detection needs k2 > n_a >= 1".into(),
            ));
        }
        let z = y_e.adjoint() * &y_e;
        Ok(Self {
            y_e,
            z,
            constellation,
            n_a,
            k2,
        })
    }

    /// Number of anchored-grid candidates, `N^(n_a (k2 - n_a))`.
    pub fn candidate_count(&self) -> f64 {
        (self.constellation.len() as f64).powi((self.n_a * (self.k2 - self.n_a)) as i32)
    }
}

/// Maximizes `f` over symbol matrices whose first `n_a` columns equal `anchor`.
/// Candidates are visited in lexicographic order of their free entries
/// (column-major, constellation order) and the first maximizer wins.
pub fn exhaustive_blind_search(prob: &BlindProblem, anchor: &CMat, cap: u64) -> Result<CMat> {
    if anchor.shape() != (prob.n_a, prob.n_a) {
        return Err(Error::InvalidConfig("anchor must be n_a x n_a".into()));
    }
    let count = prob.candidate_count();
    if count > cap as f64 {
        return Err(Error::EnumerationCap {
            candidates: count,
            cap,
        });
    }
    let free = prob.n_a * (prob.k2 - prob.n_a);
    let base = prob.constellation.len() as u64;
    let points = prob.constellation.points();
    let mut s = CMat::zeros(prob.n_a, prob.k2);
    s.columns_mut(0, prob.n_a).copy_from(anchor);
    let offset = prob.n_a * prob.n_a;

    let mut best = (f64::NEG_INFINITY, s.clone());
    for idx in 0..count as u64 {
        let mut rest = idx;
        for pos in (0..free).rev() {
            s[offset + pos] = points[(rest % base) as usize];
            rest /= base;
        }
        let value = objective(&s, &prob.z).value;
        if value > best.0 {
            best = (value, s.clone());
        }
    }
    Ok(best.1)
}

/// Continuous maximizer of `f` with the first `n_a` columns fixed to those of
/// `start`, by alternating least squares on `min ||Y - A S||`. Needs `n_e >= n_a`.
pub fn continuous_blind_fit(
    prob: &BlindProblem,
    start: &CMat,
    max_iterations: usize,
) -> Result<CMat> {
    if prob.y_e.nrows() < prob.n_a {
        return Err(Error::InvalidConfig(
            "continuous fit needs n_e >= n_a".into(),
        ));
    }
    let (n_a, k2) = (prob.n_a, prob.k2);
    let y_rest = prob.y_e.columns(n_a, k2 - n_a).into_owned();
    let mut s = start.clone();
    let mut previous = f64::INFINITY;
    for _ in 0..max_iterations {
        let channel = &prob.y_e * s.adjoint() * inverse(&gram(&s), "symbol gram")?;
        let normal = inverse(&(channel.adjoint() * &channel), "channel gram")?;
        let rest = normal * channel.adjoint() * &y_rest;
        s.columns_mut(n_a, k2 - n_a).copy_from(&rest);
        let residual = (&prob.y_e - &channel * &s).norm_squared();
        if (previous - residual).abs() <= 1e-15 * residual.max(1e-300) {
            break;
        }
        previous = residual;
    }
    Ok(s)
}

/// Deflated derivatives and the resulting second-order error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindErrorModel {
    pub gradient_s: CVec,
    pub gradient_conj_s: CVec,
    pub h_ss: CMat,
    pub h_conj_s: CMat,
    /// Estimated `s_hat - s_0` on the `n_a (k2 - n_a)` unanchored symbols.
    pub err: CVec,
    pub schur_condition: f64,
    pub regularized: bool,
}

impl BlindErrorModel {
    /// Whether the trial should enter the MSE average.
    pub fn usable(&self) -> bool {
        self.schur_condition <= SCHUR_CONDITION_LIMIT
            && self
                .err
                .iter()
                .all(|x| x.re.is_finite() && x.im.is_finite())
    }
}

/// Drops the first `anchored` rows/columns (the known symbol vectors) and solves
/// `err = (H_ss - H_s*s H_ss^{-T} H_s*s^H)^{-1} (H_s*s H_ss^{-T} df/ds - df/ds*)`.
pub fn deflate_and_solve(
    grads: &Gradients,
    hess: &Hessians,
    anchored: usize,
) -> Result<BlindErrorModel> {
    let n = grads.wrt_s.len();
    if anchored >= n || hess.ss.nrows() != n {
        return Err(Error::InvalidConfig(
            "deflation leaves no free symbols".into(),
        ));
    }
    let m = n - anchored;
    let gradient_s = grads.wrt_s.rows(anchored, m).into_owned();
    let gradient_conj_s = grads.wrt_conj_s.rows(anchored, m).into_owned();
    let h_ss = hess.ss.view((anchored, anchored), (m, m)).into_owned();
    let h_conj_s = hess.conj_s.view((anchored, anchored), (m, m)).into_owned();

    let h_inv_t = inverse(&h_ss.transpose(), "deflated H_ss")?;
    let coupling = &h_conj_s * &h_inv_t;
    let schur = &h_ss - &coupling * h_conj_s.adjoint();
    let schur_condition = condition(&schur);
    let rhs = &coupling * &gradient_s - &gradient_conj_s;
    let err = inverse(&schur, "Schur complement")? * rhs;
    Ok(BlindErrorModel {
        gradient_s,
        gradient_conj_s,
        h_ss,
        h_conj_s,
        err,
        schur_condition,
        regularized: grads.regularized || hess.regularized,
    })
}

/// Error model of the blind detector around the true symbols `s0`.
pub fn taylor_error(prob: &BlindProblem, s0: &CMat) -> Result<BlindErrorModel> {
    deflate_and_solve(
        &gradients(s0, &prob.z),
        &hessians(s0, &prob.z),
        prob.n_a * prob.n_a,
    )
}

/// How the sample MSE matrix is turned into the reported estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MseEstimator {
    /// Average over the permutations of the unanchored symbol vectors and of
    /// Alice's antennas, under which the error distribution is invariant. Same
    /// expectation as `Raw`, and full rank with far fewer trials.
    #[default]
    Symmetrized,
    /// Plain sample average of `err err^H`.
    Raw,
}

impl MseEstimator {
    pub fn name(self) -> &'static str {
        match self {
            MseEstimator::Symmetrized => "symmetrized",
            MseEstimator::Raw => "raw",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlindConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    pub k2: usize,
    /// Alice's transmit power (linear); Bob is silent.
    pub p_a: f64,
    /// Large-scale gain from Alice to Eve.
    pub a: f64,
    pub trials: usize,
    pub seed: u64,
    pub estimator: MseEstimator,
}

impl Default for BlindConfig {
    fn default() -> Self {
        Self {
            n_a: 4,
            n_b: 4,
            n_e: 8,
            k2: 8,
            p_a: 1000.0,
            a: 1.0,
            trials: 100,
            seed: 1,
            estimator: MseEstimator::default(),
        }
    }
}

impl BlindConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_a == 0 || self.n_b == 0 || self.n_e == 0 {
            return bad("antenna counts must be at least 1");
        }
        if self.k2 <= self.n_a {
            return bad("blind detection needs k2 > n_a");
        }
        if !(self.p_a > 0.0 && self.p_a.is_finite()) {
            return bad("power must be positive and finite");
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad("large-scale gain must be positive");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        Ok(())
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::qam4(self.p_a / self.n_a as f64)
    }

    /// Number of unanchored symbols.
    pub fn free_symbols(&self) -> usize {
        self.n_a * (self.k2 - self.n_a)
    }
}

/// One independent draw of symbols, channels and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindTrial {
    /// `None` when the trial was flagged.
    pub err: Option<CVec>,
    /// `log2 det(I + (p_a/n_a) a A A^H)`: Eve's rate with perfect CSI.
    pub rate_eve_known: f64,
    /// `log2 det(I + (p_a/n_a) H H^H)`: Bob's rate.
    pub rate_bob: f64,
}

pub fn blind_trial(cfg: &BlindConfig, index: u64) -> Result<BlindTrial> {
    let mut rng = substream(cfg.seed, stream_index(TAG_BLIND, &[index]));
    let constellation = cfg.constellation();
    let s0 = constellation.sample(&mut rng, cfg.n_a, cfg.k2);
    let a = cn_matrix(&mut rng, cfg.n_e, cfg.n_a);
    let noise = cn_matrix(&mut rng, cfg.n_e, cfg.k2);
    let h = cn_matrix(&mut rng, cfg.n_b, cfg.n_a);
    let y = a.scale(cfg.a.sqrt()) * &s0 + noise;
    let prob = BlindProblem::new(y, cfg.n_a, constellation)?;
    let err = taylor_error(&prob, &s0)
        .ok()
        .filter(|m| m.usable())
        .map(|m| m.err);
    let snr = cfg.p_a / cfg.n_a as f64;
    let rate = |m: &CMat, scale: f64| {
        log2_det_hpd(
            &(identity(m.nrows()) + gram(m).scale(scale)),
            "rate covariance",
        )
    };
    Ok(BlindTrial {
        err,
        rate_eve_known: rate(&a, snr * cfg.a)?,
        rate_bob: rate(&h, snr)?,
    })
}

/// Projects a sample MSE matrix onto matrices invariant under permutations of
/// the `n_a` antennas and of the `cols` unanchored symbol vectors.
pub fn symmetrize_mse(m: &CMat, n_a: usize, cols: usize) -> CMat {
    let at = |i: usize, k: usize, j: usize, l: usize| m[(i + n_a * k, j + n_a * l)];
    let block_mean = |same_col: bool| -> CMat {
        let mut acc = CMat::zeros(n_a, n_a);
        let mut count = 0usize;
        for k in 0..cols {
            for l in 0..cols {
                if (k == l) == same_col {
                    for i in 0..n_a {
                        for j in 0..n_a {
                            acc[(i, j)] += at(i, k, j, l);
                        }
                    }
                    count += 1;
                }
            }
        }
        if count > 0 {
            acc / real(count as f64)
        } else {
            acc
        }
    };
    let antenna_mean = |b: &CMat| -> CMat {
        let diag = (0..n_a).map(|i| b[(i, i)]).sum::<C64>() / n_a as f64;
        let off = if n_a > 1 {
            let total: C64 = (0..n_a)
                .flat_map(|i| (0..n_a).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| b[(i, j)])
                .sum();
            total / (n_a * (n_a - 1)) as f64
        } else {
            C64::new(0.0, 0.0)
        };
        CMat::from_fn(n_a, n_a, |i, j| if i == j { diag } else { off })
    };
    let diag_block = antenna_mean(&block_mean(true));
    let off_block = antenna_mean(&block_mean(false));
    let ones_off = CMat::from_fn(cols, cols, |k, l| real(if k == l { 0.0 } else { 1.0 }));
    kron(&identity(cols), &diag_block) + kron(&ones_off, &off_block)
}

/// Sample MSE matrix of the unanchored symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct MseMatrix {
    pub m_bar: CMat,
    pub trials_used: usize,
    pub trials_flagged: usize,
    /// Known-CSI and legitimate rates averaged over the used trials.
    pub rate_eve_known: f64,
    pub rate_bob: f64,
}

pub fn mse_matrix_mc(cfg: &BlindConfig) -> Result<MseMatrix> {
    cfg.validate()?;
    let trials = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| blind_trial(cfg, t))
        .collect::<Result<Vec<BlindTrial>>>()?;
    let dim = cfg.free_symbols();
    let mut m_bar = CMat::zeros(dim, dim);
    let (mut used, mut known, mut bob) = (0usize, 0.0, 0.0);
    for t in &trials {
        if let Some(e) = &t.err {
            m_bar += e * e.adjoint();
            known += t.rate_eve_known;
            bob += t.rate_bob;
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::AllTrialsFlagged {
            flagged: trials.len(),
            trials: trials.len(),
        });
    }
    let n = used as f64;
    m_bar /= real(n);
    if cfg.estimator == MseEstimator::Symmetrized {
        m_bar = symmetrize_mse(&m_bar, cfg.n_a, cfg.k2 - cfg.n_a);
    }
    Ok(MseMatrix {
        m_bar,
        trials_used: used,
        trials_flagged: trials.len() - used,
        rate_eve_known: known / n,
        rate_bob: bob / n,
    })
}

/// Eve's effective rate under blind detection, with comparison rates.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindRateResult {
    /// `(log2|Q| - log2|M|) / k2`; `+inf` when the MSE matrix is singular.
    pub r_ae2: f64,
    pub q_bar_logdet: f64,
    /// `-inf` when the MSE matrix is singular.
    pub m_bar_logdet: f64,
    pub m_bar_singular: bool,
    pub r_ae_known: f64,
    pub r_ab: f64,
    pub trials: usize,
    pub trials_used: usize,
    pub trials_flagged: usize,
    pub seed: u64,
}

impl BlindRateResult {
    /// `(E[R_AB] - R_AE^(2))^+`.
    pub fn secrecy_blind(&self) -> f64 {
        (self.r_ab - self.r_ae2).max(0.0)
    }

    /// `(E[R_AB - R_AE])^+` with Eve knowing her channel.
    pub fn secrecy_known(&self) -> f64 {
        (self.r_ab - self.r_ae_known).max(0.0)
    }
}

pub fn eve_blind_rate(cfg: &BlindConfig) -> Result<BlindRateResult> {
    let mse = mse_matrix_mc(cfg)?;
    let dim = cfg.free_symbols() as f64;
    // Symbols are i.i.d. with energy p_a / n_a, so Q is a scaled identity.
    let q_bar_logdet = dim * cfg.constellation().power().log2();
    let (m_bar_logdet, m_bar_singular) = match log2_det_hpd(&mse.m_bar, "MSE matrix") {
        Ok(v) => (v, false),
        Err(_) => (f64::NEG_INFINITY, true),
    };
    let r_ae2 = if m_bar_singular {
        f64::INFINITY
    } else {
        (q_bar_logdet - m_bar_logdet) / cfg.k2 as f64
    };
    Ok(BlindRateResult {
        r_ae2,
        q_bar_logdet,
        m_bar_logdet,
        m_bar_singular,
        r_ae_known: mse.rate_eve_known,
        r_ab: mse.rate_bob,
        trials: cfg.trials,
        trials_used: mse.trials_used,
        trials_flagged: mse.trials_flagged,
        seed: cfg.seed,
    })
}

/// Cost of the blind detector when Eve holds a channel estimate `a_hat` known
/// up to `theta * c_a`: `||(Y - A_hat S)(I - P_{C_A S})||^2`, with the optimal
/// `theta` eliminated.
pub fn constrained_blind_objective(s: &CMat, y_e: &CMat, a_hat: &CMat, c_a: &CMat) -> Flagged<f64> {
    let residual = y_e - a_hat * s;
    let cs = c_a * s;
    let Flagged {
        value: w,
        regularized,
    } = gram_inverse(&cs);
    let proj = cs.adjoint() * w * &cs;
    let value = (&residual * (identity(s.ncols()) - proj)).norm_squared();
    Flagged { value, regularized }
}
