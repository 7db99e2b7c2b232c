//! Anti-eavesdropping channel estimation (ANECE) followed by data transmission.
//!
//! Alice and Bob send pilots concurrently with nested row spans, so Eve cannot
//! separate her two channels inside the shared span. This module covers the
//! pilot design, the MMSE error variances that result, Monte Carlo checks of those
//! variances, and lower/upper bounds on the phase-2 mutual informations for
//! one-way and two-way transmission together with their high-power slopes.
//!
//! Both users transmit with the same power `p` in both phases. Rates are in bits.

use rayon::prelude::*;

use crate::channel::mean_and_se;
use crate::linalg::{gram, identity, log2_det_hpd, real, CMat};
use crate::rng::{cn_matrix, haar_unitary, stream_index, substream, StreamRng};
use crate::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const TAG_ESTIMATION: u64 = 0xA4EC_E001;
const TAG_BOB: u64 = 0xA4EC_E0B0;
const TAG_ALICE: u64 = 0xA4EC_E0A1;
const TAG_EVE_ONE_WAY: u64 = 0xA4EC_E0E1;
const TAG_EVE_TWO_WAY: u64 = 0xA4EC_E0E2;

#[derive(Debug, Clone, PartialEq)]
pub struct AneceConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    /// Pilot length in samples.
    pub k1: usize,
    /// Data length in samples.
    pub k2: usize,
    /// Common transmit power of Alice and Bob (linear).
    pub p: f64,
    /// Large-scale gain from Alice to Eve.
    pub a: f64,
    /// Large-scale gain from Bob to Eve.
    pub b: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for AneceConfig {
    fn default() -> Self {
        Self {
            n_a: 4,
            n_b: 4,
            n_e: 8,
            k1: 4,
            k2: 4,
            p: 1000.0,
            a: 1.0,
            b: 1.0,
            trials: 2000,
            seed: 1,
        }
    }
}

impl AneceConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.n_b == 0 || self.n_e == 0 {
            return bad("antenna counts must be at least 1");
        }
        if self.n_a < self.n_b {
            return bad("ANECE needs n_a >= n_b");
        }
        if self.k1 < self.n_a {
            return bad("pilot length k1 must be at least n_a for orthogonal pilots");
        }
        if self.k2 == 0 {
            return bad("data length k2 must be at least 1");
        }
        if !(self.p >= 0.0 && self.p.is_finite()) {
            return bad("power must be finite and nonnegative");
        }
        if !(self.a > 0.0 && self.a.is_finite() && self.b > 0.0 && self.b.is_finite()) {
            return bad("large-scale gains must be positive");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        Ok(())
    }

    /// Same configuration at power `10^(db/10)`.
    pub fn with_p_db(&self, db: f64) -> Self {
        Self {
            p: crate::channel::db_to_linear(db),
            ..self.clone()
        }
    }

    pub fn with_k2(&self, k2: usize) -> Self {
        Self { k2, ..self.clone() }
    }

    // Per-pilot-sample energy per antenna seen by each estimator.
    fn pilot_snr_a(&self) -> f64 {
        self.k1 as f64 * self.p / self.n_a as f64
    }

    fn pilot_snr_b(&self) -> f64 {
        self.k1 as f64 * self.p / self.n_b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransmissionMode {
    OneWay,
    TwoWay,
}

impl TransmissionMode {
    pub fn name(self) -> &'static str {
        match self {
            TransmissionMode::OneWay => "one-way",
            TransmissionMode::TwoWay => "two-way",
        }
    }
}

/// Nested pilot matrices: `bob`'s row span sits inside `alice`'s.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotPair {
    /// `n_a x k1`.
    pub alice: CMat,
    /// `n_b x k1`.
    pub bob: CMat,
    /// `k1 x k1` unitary rotation shared by both pilots.
    pub gamma: CMat,
}

impl PilotPair {
    /// Matrices `(c_alice, c_bob)` with `c_alice * alice + c_bob * bob = 0`.
    /// Adding `theta * [c_alice, c_bob]` to Eve's scaled estimates leaves her
    /// observation unchanged for any `theta`.
    pub fn ambiguity(&self) -> (CMat, CMat) {
        let n_a = self.alice.nrows();
        let n_b = self.bob.nrows();
        // Ratio of per-antenna pilot amplitudes along a shared row.
        let ratio = self.bob.row(0).norm() / self.alice.row(0).norm();
        let mut c_alice = CMat::zeros(n_b, n_a);
        for i in 0..n_b {
            c_alice[(i, i)] = real(-ratio);
        }
        (c_alice, identity(n_b))
    }
}

/// `alice = sqrt(k1 p / n_a) [I, 0] gamma`, `bob = sqrt(k1 p / n_b) [I, 0] gamma`.
pub fn design_pilots(cfg: &AneceConfig, gamma: &CMat) -> Result<PilotPair> {
    cfg.validate()?;
    if gamma.nrows() != cfg.k1 || gamma.ncols() != cfg.k1 {
        return Err(Error::InvalidConfig(format!(
            "gamma must be {0} x {0}",
            cfg.k1
        )));
    }
    if (gamma.adjoint() * gamma - identity(cfg.k1)).norm() > 1e-10 {
        return Err(Error::InvalidConfig("gamma must be unitary".into()));
    }
    let selector =
        |n: usize, amp: f64| CMat::from_fn(n, cfg.k1, |i, j| real(if i == j { amp } else { 0.0 }));
    Ok(PilotPair {
        alice: selector(cfg.n_a, cfg.pilot_snr_a().sqrt()) * gamma,
        bob: selector(cfg.n_b, cfg.pilot_snr_b().sqrt()) * gamma,
        gamma: gamma.clone(),
    })
}

/// Per-entry MMSE error variances of the four phase-1 estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationErrorVariances {
    /// Alice's estimate of the reciprocal channel.
    pub alice: f64,
    /// Bob's estimate of the reciprocal channel.
    pub bob: f64,
    /// Eve's estimate of her channel from Alice.
    pub eve_alice: f64,
    /// Eve's estimate of her channel from Bob.
    pub eve_bob: f64,
}

pub fn mmse_error_variances(cfg: &AneceConfig) -> EstimationErrorVariances {
    let sa = cfg.a * cfg.pilot_snr_a();
    let sb = cfg.b * cfg.pilot_snr_b();
    EstimationErrorVariances {
        alice: 1.0 / (1.0 + cfg.pilot_snr_b()),
        bob: 1.0 / (1.0 + cfg.pilot_snr_a()),
        eve_alice: (sb + 1.0) / (sa + sb + 1.0),
        eve_bob: (sa + 1.0) / (sa + sb + 1.0),
    }
}

/// Limits of [`mmse_error_variances`] as the power grows without bound.
pub fn limit_error_variances(cfg: &AneceConfig) -> EstimationErrorVariances {
    let (na, nb) = (cfg.n_a as f64, cfg.n_b as f64);
    let den = cfg.a * nb + cfg.b * na;
    EstimationErrorVariances {
        alice: 0.0,
        bob: 0.0,
        eve_alice: cfg.b * na / den,
        eve_bob: cfg.a * nb / den,
    }
}

/// Sample error variances from simulated pilots and MMSE estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalVariances {
    pub alice: f64,
    pub bob: f64,
    /// Eve's error on columns of her Alice channel that share a pilot row with Bob.
    pub eve_alice_shared: f64,
    /// Eve's error on the remaining columns; `None` when `n_a == n_b`.
    pub eve_alice_private: Option<f64>,
    pub eve_bob: f64,
    /// Eve's error projected on the unobservable direction of each shared
    /// (Alice column, Bob column) pair, normalized to unit prior variance.
    pub eve_ambiguous: f64,
    pub trials: usize,
}

/// Row-wise linear MMSE estimate of `x` (i.i.d. `CN(0,1)` rows) from
/// `y = x m + n`, where `n` has variance `noise_var`:
/// `x_hat = y (m^H m + noise_var I)^{-1} m^H`. Evaluated through the SVD of `m`
/// so that the noiseless limit (the pseudo-inverse) is also well defined.
fn mmse_rows(y: &CMat, m: &CMat, noise_var: f64) -> CMat {
    let svd = m.clone().svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let s_max = svd.singular_values.max();
    let gains = svd.singular_values.map(|s| {
        if s > 1e-12 * s_max {
            s / (s * s + noise_var)
        } else {
            0.0
        }
    });
    let mut weighted = v_t.adjoint();
    for (j, g) in gains.iter().enumerate() {
        let mut col = weighted.column_mut(j);
        col *= real(*g);
    }
    y * weighted * u.adjoint()
}

/// Simulates phase 1 with unit noise and returns sample error variances.
pub fn mmse_estimate_mc(cfg: &AneceConfig) -> Result<EmpiricalVariances> {
    mmse_estimate_mc_with_noise(cfg, 1.0)
}

/// As [`mmse_estimate_mc`] with receiver noise variance `noise_var >= 0`.
/// A fresh Haar rotation is drawn for the pilots in every trial.
pub fn mmse_estimate_mc_with_noise(
    cfg: &AneceConfig,
    noise_var: f64,
) -> Result<EmpiricalVariances> {
    cfg.validate()?;
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(Error::InvalidConfig(
            "noise variance must be nonnegative".into(),
        ));
    }
    let (na, nb, ne, k1) = (cfg.n_a, cfg.n_b, cfg.n_e, cfg.k1);
    let noise_amp = noise_var.sqrt();
    let (sqrt_a, sqrt_b) = (cfg.a.sqrt(), cfg.b.sqrt());

    let per_trial = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(cfg.seed, stream_index(TAG_ESTIMATION, &[t]));
            let gamma = haar_unitary(&mut rng, k1);
            let pilots = design_pilots(cfg, &gamma)?;
            let h = cn_matrix(&mut rng, nb, na);
            let eve_a = cn_matrix(&mut rng, ne, na);
            let eve_b = cn_matrix(&mut rng, ne, nb);
            let mut noise = |rows: usize| cn_matrix(&mut rng, rows, k1).scale(noise_amp);

            // Bob sees H P_A; Alice sees H^T P_B.
            let y_bob = &h * &pilots.alice + noise(nb);
            let y_alice = h.transpose() * &pilots.bob + noise(na);
            // Eve sees [sqrt(a) A, sqrt(b) B] [P_A; P_B], i.e. rows x = [A_i, B_i].
            let mut stacked = CMat::zeros(na + nb, k1);
            stacked
                .rows_mut(0, na)
                .copy_from(&pilots.alice.scale(sqrt_a));
            stacked
                .rows_mut(na, nb)
                .copy_from(&pilots.bob.scale(sqrt_b));
            let mut x_eve = CMat::zeros(ne, na + nb);
            x_eve.columns_mut(0, na).copy_from(&eve_a);
            x_eve.columns_mut(na, nb).copy_from(&eve_b);
            let y_eve = &x_eve * &stacked + noise(ne);

            let err_bob = &h - mmse_rows(&y_bob, &pilots.alice, noise_var);
            let err_alice = h.transpose() - mmse_rows(&y_alice, &pilots.bob, noise_var);
            let err_eve = &x_eve - mmse_rows(&y_eve, &stacked, noise_var);

            let mean_sq = |m: CMat| m.norm_squared() / (m.nrows() * m.ncols()) as f64;
            let shared = mean_sq(err_eve.columns(0, nb).into_owned());
            let private = (na > nb).then(|| mean_sq(err_eve.columns(nb, na - nb).into_owned()));
            let eve_b_err = mean_sq(err_eve.columns(na, nb).into_owned());

            // Unobservable direction of the pair (A_ij, B_ij): sqrt(a) c_A v_A + sqrt(b) c_B v_B = 0
            // with the ambiguity pair (c_A, c_B) = (-ratio, 1).
            let (c_alice, _) = pilots.ambiguity();
            let ratio = -c_alice[(0, 0)].re;
            let (va, vb) = (-ratio / sqrt_a, 1.0 / sqrt_b);
            let norm = (va * va + vb * vb).sqrt();
            let (va, vb) = (va / norm, vb / norm);
            let mut amb = 0.0;
            for i in 0..ne {
                for j in 0..nb {
                    amb += (err_eve[(i, j)] * va + err_eve[(i, na + j)] * vb).norm_sqr();
                }
            }
            amb /= (ne * nb) as f64;
            Ok([
                mean_sq(err_alice),
                mean_sq(err_bob),
                shared,
                private.unwrap_or(0.0),
                eve_b_err,
                amb,
            ])
        })
        .collect::<Result<Vec<[f64; 6]>>>()?;

    let mean = |k: usize| per_trial.iter().map(|r| r[k]).sum::<f64>() / per_trial.len() as f64;
    Ok(EmpiricalVariances {
        alice: mean(0),
        bob: mean(1),
        eve_alice_shared: mean(2),
        eve_alice_private: (na > nb).then(|| mean(3)),
        eve_bob: mean(4),
        eve_ambiguous: mean(5),
        trials: cfg.trials,
    })
}

/// `exp((1/t) sum_{j=1..t} H_{r-j} - gamma)` where `H_n` is the n-th harmonic
/// number. Equals `exp(E[ln det M] / t)` for a `t x t` complex Wishart `M` with
/// `r` degrees of freedom.
pub fn euler_exp_constant(t: usize, r: usize) -> Result<f64> {
    if t == 0 || t > r {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= t <= r, got t = {t}, r = {r}"
        )));
    }
    let harmonic = |n: usize| (1..=n).map(|k| 1.0 / k as f64).sum::<f64>();
    let avg = (1..=t).map(|j| harmonic(r - j)).sum::<f64>() / t as f64;
    Ok((avg - EULER_GAMMA).exp())
}

/// Lower and upper bounds with Monte Carlo standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub lower: f64,
    pub upper: f64,
    pub se_lower: f64,
    pub se_upper: f64,
}

impl RateBounds {
    // The upper bound is the lower bound plus a closed-form gap, so both share
    // the same Monte Carlo error.
    fn from_gap(mean: f64, se: f64, gap: f64) -> Self {
        Self {
            lower: mean,
            upper: mean + gap,
            se_lower: se,
            se_upper: se,
        }
    }
}

/// Mean and standard error of `sample` over the configured trials, trial `t`
/// drawing from stream `(seed, tag, t)`. The stream does not depend on the
/// power, so sweeps over power use matched draws.
fn monte_carlo<F>(cfg: &AneceConfig, tag: u64, sample: F) -> Result<(f64, f64)>
where
    F: Fn(&mut StreamRng) -> Result<f64> + Sync,
{
    let xs = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| sample(&mut substream(cfg.seed, stream_index(tag, &[t]))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_se(&xs))
}

/// `log2 det(I + scale * w w^H)` on the smaller Gram side.
fn log2_det_gram(w: &CMat, scale: f64) -> Result<f64> {
    if scale == 0.0 {
        return Ok(0.0);
    }
    let g = if w.nrows() <= w.ncols() {
        gram(w)
    } else {
        w.adjoint() * w
    };
    log2_det_hpd(
        &(identity(g.nrows()) + g.scale(scale)),
        "estimated channel gram",
    )
}

/// `k2 E log2 det(I + scale W W^H)` with `W` of size `rows x cols`, i.i.d. `CN(0,1)`.
fn expected_log_det(
    cfg: &AneceConfig,
    tag: u64,
    rows: usize,
    cols: usize,
    scale: f64,
) -> Result<(f64, f64)> {
    let k2 = cfg.k2 as f64;
    let (m, se) = monte_carlo(cfg, tag, |rng| {
        log2_det_gram(&cn_matrix(rng, rows, cols), scale)
    })?;
    Ok((k2 * m, k2 * se))
}

// Effective SNR on the estimated link when the transmitter has `n_tx` antennas
// and the receiver's estimation error variance is `err`.
fn legit_scale(cfg: &AneceConfig, n_tx: usize, err: f64) -> f64 {
    let p = cfg.p;
    (p / n_tx as f64) * (1.0 - err) / (1.0 + p * err)
}

// `n_rx [k2 log2(1 + p err) - t log2(1 + (p err / n_tx) e)]`, the gap between the
// upper and lower bound on a link with `n_tx` transmit and `n_rx` receive antennas.
fn wishart_gap(cfg: &AneceConfig, n_tx: usize, n_rx: usize, err: f64) -> Result<f64> {
    let t = n_tx.min(cfg.k2);
    let e = euler_exp_constant(t, n_tx.max(cfg.k2))?;
    let x = cfg.p * err;
    Ok(n_rx as f64
        * (cfg.k2 as f64 * (1.0 + x).log2() - t as f64 * (1.0 + x * e / n_tx as f64).log2()))
}

/// Closed-form difference between Bob's upper and lower bounds.
pub fn bob_gap(cfg: &AneceConfig) -> Result<f64> {
    cfg.validate()?;
    wishart_gap(cfg, cfg.n_a, cfg.n_b, mmse_error_variances(cfg).bob)
}

/// Closed-form difference between Alice's upper and lower bounds (reverse link).
pub fn alice_gap(cfg: &AneceConfig) -> Result<f64> {
    cfg.validate()?;
    wishart_gap(cfg, cfg.n_b, cfg.n_a, mmse_error_variances(cfg).alice)
}

/// Closed-form difference between Eve's one-way upper and lower bounds.
pub fn eve_one_way_gap(cfg: &AneceConfig) -> Result<f64> {
    cfg.validate()?;
    wishart_gap(cfg, cfg.n_a, cfg.n_e, mmse_error_variances(cfg).eve_alice)
}

// Terms shared by the two branches of Eve's two-way gap.
struct TwoWayEveTerms {
    /// `1 + p (err_eve_alice + err_eve_bob)`.
    noise: f64,
    /// Smallest diagonal entry of the per-antenna error-weighted power.
    smallest: f64,
    /// Geometric mean of the same diagonal.
    geometric: f64,
}

fn two_way_eve_terms(cfg: &AneceConfig) -> TwoWayEveTerms {
    let v = mmse_error_variances(cfg);
    let (na, nb) = (cfg.n_a as f64, cfg.n_b as f64);
    let ta = v.eve_alice * cfg.p / na;
    let tb = v.eve_bob * cfg.p / nb;
    let geometric = if ta > 0.0 && tb > 0.0 {
        ((na * ta.ln() + nb * tb.ln()) / (na + nb)).exp()
    } else {
        0.0
    };
    TwoWayEveTerms {
        noise: 1.0 + cfg.p * (v.eve_alice + v.eve_bob),
        smallest: ta.min(tb),
        geometric,
    }
}

/// Gap of Eve's two-way bounds from the short-block branch (`k2 <= n_a + n_b`).
pub fn eve_two_way_gap_short(cfg: &AneceConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.n_a + cfg.n_b;
    if cfg.k2 > n {
        return Err(Error::InvalidConfig(
            "short-block branch needs k2 <= n_a + n_b".into(),
        ));
    }
    let terms = two_way_eve_terms(cfg);
    let e = euler_exp_constant(cfg.k2, n)?;
    Ok((cfg.k2 * cfg.n_e) as f64 * (terms.noise / (1.0 + terms.smallest * e)).log2())
}

/// Gap of Eve's two-way bounds from the long-block branch (`k2 >= n_a + n_b`).
pub fn eve_two_way_gap_long(cfg: &AneceConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.n_a + cfg.n_b;
    if cfg.k2 < n {
        return Err(Error::InvalidConfig(
            "long-block branch needs k2 >= n_a + n_b".into(),
        ));
    }
    let terms = two_way_eve_terms(cfg);
    let e = euler_exp_constant(n, cfg.k2)?;
    Ok(cfg.n_e as f64
        * (cfg.k2 as f64 * terms.noise.log2() - n as f64 * (1.0 + terms.geometric * e).log2()))
}

/// Gap of Eve's two-way bounds, choosing the branch by block length.
pub fn eve_two_way_gap(cfg: &AneceConfig) -> Result<f64> {
    if cfg.k2 <= cfg.n_a + cfg.n_b {
        eve_two_way_gap_short(cfg)
    } else {
        eve_two_way_gap_long(cfg)
    }
}

/// Bounds on Bob's mutual information given his channel estimate.
pub fn bound_bob(cfg: &AneceConfig) -> Result<RateBounds> {
    cfg.validate()?;
    let err = mmse_error_variances(cfg).bob;
    let (m, se) = expected_log_det(
        cfg,
        TAG_BOB,
        cfg.n_b,
        cfg.n_a,
        legit_scale(cfg, cfg.n_a, err),
    )?;
    Ok(RateBounds::from_gap(m, se, bob_gap(cfg)?))
}

/// Bounds on Alice's mutual information on the reverse link (two-way mode).
pub fn bound_alice_two_way(cfg: &AneceConfig) -> Result<RateBounds> {
    cfg.validate()?;
    let err = mmse_error_variances(cfg).alice;
    let (m, se) = expected_log_det(
        cfg,
        TAG_ALICE,
        cfg.n_a,
        cfg.n_b,
        legit_scale(cfg, cfg.n_b, err),
    )?;
    Ok(RateBounds::from_gap(m, se, alice_gap(cfg)?))
}

/// Bounds on Eve's mutual information about Alice's data (one-way mode).
pub fn bound_eve_one_way(cfg: &AneceConfig) -> Result<RateBounds> {
    cfg.validate()?;
    let err = mmse_error_variances(cfg).eve_alice;
    let (m, se) = expected_log_det(
        cfg,
        TAG_EVE_ONE_WAY,
        cfg.n_e,
        cfg.n_a,
        legit_scale(cfg, cfg.n_a, err),
    )?;
    Ok(RateBounds::from_gap(m, se, eve_one_way_gap(cfg)?))
}

/// Bounds on Eve's mutual information about both users' data (two-way mode).
pub fn bound_eve_two_way(cfg: &AneceConfig) -> Result<RateBounds> {
    cfg.validate()?;
    let v = mmse_error_variances(cfg);
    let terms = two_way_eve_terms(cfg);
    let scale_a = cfg.p / cfg.n_a as f64 * (1.0 - v.eve_alice) / terms.noise;
    let scale_b = cfg.p / cfg.n_b as f64 * (1.0 - v.eve_bob) / terms.noise;
    let (m, se) = monte_carlo(cfg, TAG_EVE_TWO_WAY, |rng| {
        let wa = cn_matrix(rng, cfg.n_e, cfg.n_a);
        let wb = cn_matrix(rng, cfg.n_e, cfg.n_b);
        if scale_a == 0.0 && scale_b == 0.0 {
            return Ok(0.0);
        }
        let cov = identity(cfg.n_e) + gram(&wa).scale(scale_a) + gram(&wb).scale(scale_b);
        log2_det_hpd(&cov, "Eve two-way covariance")
    })?;
    let k2 = cfg.k2 as f64;
    Ok(RateBounds::from_gap(k2 * m, k2 * se, eve_two_way_gap(cfg)?))
}

/// Per-sample secrecy-rate bounds for the chosen phase-2 mode.
pub fn secrecy_bounds(cfg: &AneceConfig, mode: TransmissionMode) -> Result<RateBounds> {
    let k2 = cfg.k2 as f64;
    let bob = bound_bob(cfg)?;
    let (legit_lower, legit_upper, legit_se, eve) = match mode {
        TransmissionMode::OneWay => (bob.lower, bob.upper, bob.se_lower, bound_eve_one_way(cfg)?),
        TransmissionMode::TwoWay => {
            let alice = bound_alice_two_way(cfg)?;
            let se = alice.se_lower.hypot(bob.se_lower);
            (
                alice.lower + bob.lower,
                alice.upper + bob.upper,
                se,
                bound_eve_two_way(cfg)?,
            )
        }
    };
    let se = legit_se.hypot(eve.se_lower) / k2;
    Ok(RateBounds {
        lower: (legit_lower - eve.upper).max(0.0) / k2,
        upper: (legit_upper - eve.lower).max(0.0) / k2,
        se_lower: se,
        se_upper: se,
    })
}

/// High-power slopes `(lower, upper)` of the secrecy-rate bounds versus `log2 p`.
pub fn sdof_limits(
    n_a: usize,
    n_b: usize,
    n_e: usize,
    k2: usize,
    mode: TransmissionMode,
) -> (f64, f64) {
    let (streams, breakpoint) = match mode {
        TransmissionMode::OneWay => (n_a.min(n_b) as f64, n_a),
        TransmissionMode::TwoWay => (2.0 * n_a.min(n_b) as f64, n_a + n_b),
    };
    let lower = if k2 <= breakpoint {
        streams
    } else {
        (streams - n_e as f64 / k2 as f64 * (k2 - breakpoint) as f64).max(0.0)
    };
    (lower, streams)
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidConfig(
            "slope fit needs two or more paired points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig(
            "slope fit needs distinct abscissae".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
