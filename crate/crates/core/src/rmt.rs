//! Large-system approximations of mutual information through the Shannon and
//! eta transforms of a diagonal power profile.
//!
//! For `J` with i.i.d. `CN(0, 1/N)` entries (`N x K`, `K / N -> beta`) and a
//! diagonal profile `Theta`, `(1/N) log|I + J Theta J^H|` concentrates around
//! [`omega`].

use crate::channel::{LargeScale, NetworkConfig, PowerAllocation};
use crate::linalg::LOG2_E;
use crate::{Error, Result};

/// Lower end of the bisection bracket for eta.
pub const ETA_FLOOR: f64 = 1e-15;
pub const ETA_TOLERANCE: f64 = 1e-12;
pub const ETA_MAX_ITERATIONS: usize = 200;
/// Largest residual [`omega`] accepts for a supplied eta.
const OMEGA_RESIDUAL_CHECK: f64 = 1e-9;

/// Diagonal power profile with its aspect ratio `beta = K / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSpectrum {
    entries: Vec<f64>,
    beta: f64,
}

impl DiagonalSpectrum {
    pub fn new(entries: Vec<f64>, beta: f64) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidConfig(
                "spectrum needs at least one entry".into(),
            ));
        }
        if entries.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidConfig(
                "spectrum entries must be finite and nonnegative".into(),
            ));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Ok(Self { entries, beta })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolution {
    pub eta: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// `(1/L) sum_j log(1 + eta theta_j)`.
pub fn shannon_transform(spectrum: &DiagonalSpectrum, eta: f64) -> f64 {
    spectrum
        .entries
        .iter()
        .map(|t| (eta * t).ln_1p())
        .sum::<f64>()
        * LOG2_E
        / spectrum.len() as f64
}

/// `1 - eta - (beta eta / L) sum_j theta_j / (1 + eta theta_j)`; strictly decreasing in eta.
pub fn eta_residual(spectrum: &DiagonalSpectrum, eta: f64) -> f64 {
    let load: f64 = spectrum.entries.iter().map(|t| t / (1.0 + eta * t)).sum();
    1.0 - eta - spectrum.beta * eta * load / spectrum.len() as f64
}

/// Root on `[lo, hi]` of a decreasing function that is positive at `lo` and
/// nonpositive at `hi`. Stops once `|f| <= tol`.
pub(crate) fn bisect_decreasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> EtaSolution {
    let (mut lo, mut hi) = (lo, hi);
    let (mut f_lo, mut f_hi) = (f(lo), f(hi));
    debug_assert!(
        f_lo > 0.0 && f_hi <= 0.0,
        "bracket [{lo}, {hi}] has no sign change"
    );
    if f_hi.abs() <= ETA_TOLERANCE {
        return EtaSolution {
            eta: hi,
            residual: f_hi,
            iterations: 0,
        };
    }
    for it in 1..=ETA_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() <= ETA_TOLERANCE {
            return EtaSolution {
                eta: mid,
                residual: f_mid,
                iterations: it,
            };
        }
        if f_mid > 0.0 {
            (lo, f_lo) = (mid, f_mid);
        } else {
            (hi, f_hi) = (mid, f_mid);
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if f_lo.abs() < f_hi.abs() {
        EtaSolution {
            eta: lo,
            residual: f_lo,
            iterations: ETA_MAX_ITERATIONS,
        }
    } else {
        EtaSolution {
            eta: hi,
            residual: f_hi,
            iterations: ETA_MAX_ITERATIONS,
        }
    }
}

/// Unique root of [`eta_residual`] in `(0, 1]`.
pub fn solve_eta(spectrum: &DiagonalSpectrum) -> EtaSolution {
    bisect_decreasing(|e| eta_residual(spectrum, e), ETA_FLOOR, 1.0)
}

/// `beta * V(eta) - log eta + (eta - 1) log e`, the per-dimension limit of
/// `(1/N) log|I + J Theta J^H|`.
pub fn omega(spectrum: &DiagonalSpectrum, eta: f64) -> Result<f64> {
    let residual = eta_residual(spectrum, eta);
    if !(eta > 0.0 && eta <= 1.0) || residual.abs() > OMEGA_RESIDUAL_CHECK {
        return Err(Error::EtaMismatch { eta, residual });
    }
    Ok(omega_unchecked(spectrum, eta))
}

fn omega_unchecked(spectrum: &DiagonalSpectrum, eta: f64) -> f64 {
    spectrum.beta * shannon_transform(spectrum, eta) - eta.log2() + (eta - 1.0) * LOG2_E
}

/// Solves for eta and evaluates [`omega`].
pub fn omega_solved(spectrum: &DiagonalSpectrum) -> (f64, EtaSolution) {
    let sol = solve_eta(spectrum);
    (omega_unchecked(spectrum, sol.eta), sol)
}

/// The two power profiles seen by Eve (scaled by `n_e`): with and without the
/// secret streams. Zero-length blocks are left out.
pub fn eve_spectra(
    cfg: &NetworkConfig,
    alloc: &PowerAllocation,
    gains: LargeScale,
) -> Result<(DiagonalSpectrum, DiagonalSpectrum)> {
    let (with_signal, without_signal) =
        eve_profile(cfg, alloc.r(), alloc.q(), alloc.p_n(), alloc.p_b(), gains)?;
    let n_e = cfg.n_e as f64;
    Ok((
        DiagonalSpectrum::new(with_signal.clone(), with_signal.len() as f64 / n_e)?,
        DiagonalSpectrum::new(without_signal.clone(), without_signal.len() as f64 / n_e)?,
    ))
}

/// Raw diagonal entries `(theta3, theta4)` of Eve's two profiles, already scaled by `n_e`.
pub(crate) fn eve_profile(
    cfg: &NetworkConfig,
    r: usize,
    q: &[f64],
    p_n: f64,
    p_b: f64,
    gains: LargeScale,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let noise_dims = cfg
        .n_a
        .checked_sub(r)
        .ok_or_else(|| Error::InfeasibleAllocation(format!("r = {r} exceeds n_a = {}", cfg.n_a)))?;
    if noise_dims == 0 && p_n > 0.0 {
        return Err(Error::InfeasibleAllocation(
            "artificial noise needs a null space (r < n_a)".into(),
        ));
    }
    let n_e = cfg.n_e as f64;
    let mut without = Vec::with_capacity(noise_dims + cfg.n_b);
    if noise_dims > 0 {
        without.extend(std::iter::repeat_n(
            n_e * gains.a * p_n / noise_dims as f64,
            noise_dims,
        ));
    }
    without.extend(std::iter::repeat_n(
        n_e * gains.b * p_b / cfg.n_b as f64,
        cfg.n_b,
    ));
    let mut with = Vec::with_capacity(r + without.len());
    with.extend(q.iter().map(|qi| n_e * gains.a * qi));
    with.extend_from_slice(&without);
    Ok((with, without))
}

/// Large-system approximation of Eve's rate for an arbitrary allocation.
pub fn asymptotic_rate_eve_general(
    cfg: &NetworkConfig,
    alloc: &PowerAllocation,
    gains: LargeScale,
) -> Result<f64> {
    let (s3, s4) = eve_spectra(cfg, alloc, gains)?;
    let (o3, _) = omega_solved(&s3);
    let (o4, _) = omega_solved(&s4);
    Ok((cfg.n_e as f64 * (o3 - o4)).max(0.0))
}

/// Terms of Eve's equal-power large-system rate, each already multiplied by `n_e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualPowerEve {
    pub eta3: EtaSolution,
    pub eta4: EtaSolution,
    /// `n_b log(1 + n_e a p_s eta3 / n_b)`.
    pub signal_term: f64,
    /// Jamming contribution `n_b [log(1 + eta3 x_b) - log(1 + eta4 x_b)]`.
    pub jamming_term: f64,
    /// Artificial-noise contribution.
    pub noise_term: f64,
    /// `n_e [log(eta4/eta3) + (eta3 - eta4) log e]`.
    pub eta_term: f64,
}

impl EqualPowerEve {
    pub fn rate(&self) -> f64 {
        self.signal_term + self.jamming_term + self.noise_term + self.eta_term
    }
}

/// Eve's large-system rate when `r = n_b`, the streams share `p_s` equally and the
/// artificial noise spans the `n_a - n_b` null-space directions.
pub fn asymptotic_rate_eve_equal_power(
    cfg: &NetworkConfig,
    p_s: f64,
    p_n: f64,
    p_b: f64,
    gains: LargeScale,
) -> Result<EqualPowerEve> {
    if cfg.n_a <= cfg.n_b {
        return Err(Error::InvalidConfig(
            "the equal-power form needs n_a > n_b; use the general form".into(),
        ));
    }
    let (n_a, n_b, n_e) = (cfg.n_a as f64, cfg.n_b as f64, cfg.n_e as f64);
    // per-entry loads, scaled by n_e
    let x_s = n_e * gains.a * p_s / n_b;
    let x_n = n_e * gains.a * p_n / (n_a - n_b);
    let x_b = n_e * gains.b * p_b / n_b;
    // eta3 over n_b signal, n_a - n_b noise and n_b jamming entries; eta4 without the signal block
    let load = |eta: f64, with_signal: bool| {
        let sig = if with_signal {
            n_b * x_s / (1.0 + eta * x_s)
        } else {
            0.0
        };
        (sig + (n_a - n_b) * x_n / (1.0 + eta * x_n) + n_b * x_b / (1.0 + eta * x_b)) / n_e
    };
    let eta3 = bisect_decreasing(|e| 1.0 - e - e * load(e, true), ETA_FLOOR, 1.0);
    let eta4 = bisect_decreasing(|e| 1.0 - e - e * load(e, false), ETA_FLOOR, 1.0);
    let (e3, e4) = (eta3.eta, eta4.eta);
    let l2 = |x: f64| x.ln_1p() * LOG2_E;
    Ok(EqualPowerEve {
        eta3,
        eta4,
        signal_term: n_b * l2(e3 * x_s),
        jamming_term: n_b * (l2(e3 * x_b) - l2(e4 * x_b)),
        noise_term: (n_a - n_b) * (l2(e3 * x_n) - l2(e4 * x_n)),
        eta_term: n_e * ((e4 / e3).log2() + (e3 - e4) * LOG2_E),
    })
}

/// `2 / (sqrt(1 + 4x) + 1)`, the positive root of `x eta^2 + eta - 1 = 0`.
pub fn eta_self_interference(x: f64) -> f64 {
    2.0 / ((1.0 + 4.0 * x).sqrt() + 1.0)
}

/// Bob's large-system rate with `r = n_b` equal-power streams and jamming power `p_b`.
pub fn asymptotic_rate_bob(cfg: &NetworkConfig, p_s: f64, p_b: f64) -> Result<f64> {
    if cfg.n_a <= cfg.n_b {
        return Err(Error::InvalidConfig(
            "Bob's large-system form needs n_a > n_b".into(),
        ));
    }
    let (n_a, n_b) = (cfg.n_a as f64, cfg.n_b as f64);
    let beta1 = (n_a + n_b) / n_b;
    let s = p_s;
    let j = cfg.rho * p_b;
    // eta1 over n_a signal entries p_s and n_b self-interference entries rho p_b (Bob's dimension n_b)
    let eta1 = bisect_decreasing(
        |e| 1.0 - e - e * (n_a * s / (1.0 + e * s) + n_b * j / (1.0 + e * j)) / n_b,
        ETA_FLOOR,
        1.0,
    )
    .eta;
    let eta2 = eta_self_interference(j);
    let l2 = |x: f64| x.ln_1p() * LOG2_E;
    let per_dim = (beta1 - 1.0) * l2(eta1 * s) + l2(eta1 * j) - l2(eta2 * j)
        + (eta2 / eta1).log2()
        + (eta1 - eta2) * LOG2_E;
    Ok((n_b * per_dim).max(0.0))
}

/// Limit of Eve's equal-power rate as `n_e` grows: `n_b log(1 + n_e a p_s / n_b)`.
pub fn limit_rate_eve(cfg: &NetworkConfig, p_s: f64, a: f64) -> f64 {
    let n_b = cfg.n_b as f64;
    n_b * (cfg.n_e as f64 * a * p_s / n_b).ln_1p() * LOG2_E
}
