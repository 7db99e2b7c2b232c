//! Network geometry, channel draws and exact rates under full channel knowledge.

use rayon::prelude::*;

use crate::linalg::{full_svd, gram, identity, log2_det_hpd, real, CMat, FullSvd};
use crate::rng::{cn_matrix, substream, StreamRng};
use crate::{Error, Result};

/// Relative slack applied to power-cap checks.
const CAP_SLACK: f64 = 1e-9;

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Scenario parameters shared by every module. Noise power is normalized to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    pub n_a: usize,
    pub n_b: usize,
    pub n_e: usize,
    /// Radius of the secured zone around Alice (normalized distance).
    pub delta: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Residual self-interference factor at Bob.
    pub rho: f64,
    pub p_a_max: f64,
    pub p_b_max: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            n_a: 8,
            n_b: 4,
            n_e: 16,
            delta: 0.1,
            alpha: 4.0,
            rho: 0.001,
            p_a_max: db_to_linear(30.0),
            p_b_max: db_to_linear(30.0),
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_b < 1 || self.n_a < self.n_b {
            return bad(format!(
                "need n_a >= n_b >= 1, got n_a={}, n_b={}",
                self.n_a, self.n_b
            ));
        }
        if self.n_e < 1 {
            return bad("n_e must be positive".into());
        }
        if !self.delta.is_finite() || self.delta <= 0.0 {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1], got {}", self.rho));
        }
        if !(self.p_a_max >= 0.0 && self.p_b_max >= 0.0)
            || !self.p_a_max.is_finite()
            || !self.p_b_max.is_finite()
        {
            return bad("power caps must be finite and nonnegative".into());
        }
        Ok(())
    }

    pub fn with_n_e(&self, n_e: usize) -> Self {
        Self { n_e, ..*self }
    }
}

/// Eve's location. Alice sits at `(-0.5, 0)` and Bob at `(0.5, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvePosition {
    pub x: f64,
    pub y: f64,
}

impl EvePosition {
    pub fn distance_to_alice(&self) -> f64 {
        (self.x + 0.5).hypot(self.y)
    }

    pub fn distance_to_bob(&self) -> f64 {
        (self.x - 0.5).hypot(self.y)
    }
}

/// Large-scale power gains from Alice (`a`) and Bob (`b`) to Eve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScale {
    pub a: f64,
    pub b: f64,
}

impl LargeScale {
    pub const UNIT: LargeScale = LargeScale { a: 1.0, b: 1.0 };
}

pub fn path_loss(pos: EvePosition, cfg: &NetworkConfig) -> Result<LargeScale> {
    let d_a = pos.distance_to_alice();
    // the boundary point itself is admissible even when rounding puts it a hair inside
    if d_a < cfg.delta * (1.0 - 1e-12) {
        return Err(Error::InsideSecuredZone {
            distance: d_a,
            delta: cfg.delta,
        });
    }
    let d_b = pos.distance_to_bob();
    Ok(LargeScale {
        a: d_a.powf(-cfg.alpha),
        b: d_b.powf(-cfg.alpha),
    })
}

/// The point on the secured-zone boundary farthest from Bob.
pub fn worst_case_eve_position(cfg: &NetworkConfig) -> EvePosition {
    EvePosition {
        x: -0.5 - cfg.delta,
        y: 0.0,
    }
}

/// Alice-to-Bob channel `h` (`n_b x n_a`), Bob's self-interference channel `g`
/// and the full SVD of `h`.
#[derive(Debug, Clone)]
pub struct LegitChannels {
    pub h: CMat,
    pub g: CMat,
    pub svd: FullSvd,
}

/// SVD blocks of `h` split after the first `r` singular values.
#[derive(Debug, Clone)]
pub struct SvdPartition {
    pub u1: CMat,
    pub u2: CMat,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub v1: CMat,
    pub v2: CMat,
}

impl LegitChannels {
    pub fn sample(cfg: &NetworkConfig, rng: &mut StreamRng) -> Self {
        let h = cn_matrix(rng, cfg.n_b, cfg.n_a);
        let g = cn_matrix(rng, cfg.n_b, cfg.n_b);
        Self::from_matrices(h, g)
    }

    pub fn from_matrices(h: CMat, g: CMat) -> Self {
        let svd = full_svd(&h);
        Self { h, g, svd }
    }

    pub fn n_a(&self) -> usize {
        self.h.ncols()
    }

    pub fn n_b(&self) -> usize {
        self.h.nrows()
    }

    pub fn partition(&self, r: usize) -> SvdPartition {
        let (n_b, n_a) = self.h.shape();
        assert!(r >= 1 && r <= n_b, "split index {r} outside 1..={n_b}");
        let u = &self.svd.u;
        let v = &self.svd.v;
        SvdPartition {
            u1: u.columns(0, r).into_owned(),
            u2: u.columns(r, n_b - r).into_owned(),
            sigma1: self.svd.singular_values[..r].to_vec(),
            sigma2: self.svd.singular_values[r..].to_vec(),
            v1: v.columns(0, r).into_owned(),
            v2: v.columns(r, n_a - r).into_owned(),
        }
    }
}

/// Alice-to-Eve (`a`, `n_e x n_a`) and Bob-to-Eve (`b`, `n_e x n_b`) small-scale fading.
#[derive(Debug, Clone)]
pub struct EveChannels {
    pub a: CMat,
    pub b: CMat,
}

impl EveChannels {
    pub fn sample(cfg: &NetworkConfig, rng: &mut StreamRng) -> Self {
        let a = cn_matrix(rng, cfg.n_e, cfg.n_a);
        let b = cn_matrix(rng, cfg.n_e, cfg.n_b);
        Self { a, b }
    }
}

/// One full draw of all four channels.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub legit: LegitChannels,
    pub eve: EveChannels,
}

impl ChannelRealization {
    /// Draw number `trial` of the family selected by `seed`.
    pub fn sample(cfg: &NetworkConfig, seed: u64, trial: u64) -> Self {
        let mut rng = substream(seed, trial);
        let legit = LegitChannels::sample(cfg, &mut rng);
        let eve = EveChannels::sample(cfg, &mut rng);
        Self { legit, eve }
    }
}

/// Powers of the `r` secret streams, Alice's artificial noise and Bob's jamming.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    r: usize,
    q: Vec<f64>,
    p_n: f64,
    p_b: f64,
}

impl PowerAllocation {
    pub fn new(q: Vec<f64>, p_n: f64, p_b: f64) -> Result<Self> {
        let r = q.len();
        if r == 0 {
            return Err(Error::InfeasibleAllocation(
                "at least one stream is required".into(),
            ));
        }
        if q.iter()
            .chain([&p_n, &p_b])
            .any(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::InfeasibleAllocation(
                "powers must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { r, q, p_n, p_b })
    }

    /// `r` streams sharing `p_s` equally.
    pub fn uniform(r: usize, p_s: f64, p_n: f64, p_b: f64) -> Result<Self> {
        let share = if r == 0 { 0.0 } else { p_s / r as f64 };
        Self::new(vec![share; r], p_n, p_b)
    }

    pub fn zero(r: usize) -> Self {
        Self {
            r,
            q: vec![0.0; r],
            p_n: 0.0,
            p_b: 0.0,
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p_n(&self) -> f64 {
        self.p_n
    }

    pub fn p_b(&self) -> f64 {
        self.p_b
    }

    pub fn p_s(&self) -> f64 {
        self.q.iter().sum()
    }

    /// Checks the allocation against the antenna counts and power caps.
    pub fn check(&self, cfg: &NetworkConfig) -> Result<()> {
        let fail = |m: String| Err(Error::InfeasibleAllocation(m));
        if self.r > cfg.n_b {
            return fail(format!("r = {} exceeds n_b = {}", self.r, cfg.n_b));
        }
        if self.r == cfg.n_a && self.p_n > 0.0 {
            return fail("artificial noise needs a null space (r < n_a)".into());
        }
        let alice = self.p_s() + self.p_n;
        if alice > cfg.p_a_max * (1.0 + CAP_SLACK) + 1e-12 {
            return fail(format!("Alice's power {alice} exceeds cap {}", cfg.p_a_max));
        }
        if self.p_b > cfg.p_b_max * (1.0 + CAP_SLACK) + 1e-12 {
            return fail(format!(
                "Bob's power {} exceeds cap {}",
                self.p_b, cfg.p_b_max
            ));
        }
        Ok(())
    }
}

/// Covariance building blocks on Bob's side for a given split `r`.
#[derive(Debug, Clone)]
pub struct BobTerms {
    /// Columns `h v_i` of the effective signal channel, `n_b x r`.
    pub signal: CMat,
    /// `h V2 V2^H h^H`.
    pub noise_gram: CMat,
    /// `g g^H`.
    pub jam_gram: CMat,
    /// Dimension of the artificial-noise subspace, `n_a - r`.
    pub noise_dims: usize,
}

impl BobTerms {
    pub fn new(legit: &LegitChannels, r: usize) -> Self {
        let part = legit.partition(r);
        let hv2 = &legit.h * &part.v2;
        Self {
            signal: &legit.h * &part.v1,
            noise_gram: gram(&hv2),
            jam_gram: gram(&legit.g),
            noise_dims: part.v2.ncols(),
        }
    }

    /// Bob's interference-plus-noise covariance.
    pub fn interference(&self, p_n: f64, p_b: f64, rho: f64) -> CMat {
        let n_b = self.signal.nrows();
        let mut c = identity(n_b);
        if self.noise_dims > 0 && p_n > 0.0 {
            c += self.noise_gram.scale(p_n / self.noise_dims as f64);
        }
        if rho * p_b > 0.0 {
            c += self.jam_gram.scale(rho * p_b / n_b as f64);
        }
        c
    }

    /// `sum_i q_i (h v_i)(h v_i)^H`.
    pub fn signal_cov(&self, q: &[f64]) -> CMat {
        let mut hq = self.signal.clone();
        for (j, &qj) in q.iter().enumerate() {
            let mut col = hq.column_mut(j);
            col *= real(qj.sqrt());
        }
        gram(&hq)
    }
}

fn log_ratio(total: &CMat, base: &CMat) -> Result<f64> {
    let v = log2_det_hpd(total, "signal-plus-interference covariance")?
        - log2_det_hpd(base, "interference covariance")?;
    Ok(v.max(0.0))
}

/// Bob's rate `log|C_B + H V1 Q V1^H H^H| - log|C_B|` treating all interference as noise.
pub fn exact_rate_bob(
    legit: &LegitChannels,
    alloc: &PowerAllocation,
    cfg: &NetworkConfig,
) -> Result<f64> {
    alloc.check(cfg)?;
    let terms = BobTerms::new(legit, alloc.r());
    let c_b = terms.interference(alloc.p_n(), alloc.p_b(), cfg.rho);
    let total = &c_b + terms.signal_cov(alloc.q());
    log_ratio(&total, &c_b)
}

/// Bob's rate after projecting onto the `r` leading left singular vectors.
/// Equal to [`exact_rate_bob`] when `r = n_b` or there is no self-interference.
pub fn projected_rate_bob(
    legit: &LegitChannels,
    alloc: &PowerAllocation,
    cfg: &NetworkConfig,
) -> Result<f64> {
    alloc.check(cfg)?;
    let r = alloc.r();
    let part = legit.partition(r);
    let ug = part.u1.adjoint() * &legit.g;
    let c1 = identity(r) + gram(&ug).scale(cfg.rho * alloc.p_b() / cfg.n_b as f64);
    let mut sig = CMat::zeros(r, r);
    for i in 0..r {
        sig[(i, i)] = real(alloc.q()[i] * part.sigma1[i] * part.sigma1[i]);
    }
    log_ratio(&(&c1 + sig), &c1)
}

/// Eve's rate `log|C_E + a A1 Q A1^H| - log|C_E|` with full knowledge of her channels.
pub fn exact_rate_eve(
    legit: &LegitChannels,
    eve: &EveChannels,
    alloc: &PowerAllocation,
    cfg: &NetworkConfig,
    gains: LargeScale,
) -> Result<f64> {
    alloc.check(cfg)?;
    let r = alloc.r();
    let part = legit.partition(r);
    let n_e = eve.a.nrows();
    let n_b = eve.b.ncols();
    let mut c_e = identity(n_e);
    if part.v2.ncols() > 0 && alloc.p_n() > 0.0 {
        let a2 = &eve.a * &part.v2;
        c_e += gram(&a2).scale(gains.a * alloc.p_n() / part.v2.ncols() as f64);
    }
    if alloc.p_b() > 0.0 {
        c_e += gram(&eve.b).scale(gains.b * alloc.p_b() / n_b as f64);
    }
    let mut a1 = &eve.a * &part.v1;
    for (j, &qj) in alloc.q().iter().enumerate() {
        let mut col = a1.column_mut(j);
        col *= real((gains.a * qj).sqrt());
    }
    log_ratio(&(&c_e + gram(&a1)), &c_e)
}

/// `(r_ab - r_ae)^+`.
pub fn secrecy_rate(r_ab: f64, r_ae: f64) -> f64 {
    (r_ab - r_ae).max(0.0)
}

/// Instantaneous secrecy rate of one realization with Eve at `pos`.
pub fn instantaneous_secrecy(
    ch: &ChannelRealization,
    alloc: &PowerAllocation,
    cfg: &NetworkConfig,
    pos: EvePosition,
) -> Result<f64> {
    let gains = path_loss(pos, cfg)?;
    let r_ab = exact_rate_bob(&ch.legit, alloc, cfg)?;
    let r_ae = exact_rate_eve(&ch.legit, &ch.eve, alloc, cfg, gains)?;
    Ok(secrecy_rate(r_ab, r_ae))
}

/// Monte Carlo estimate of the ergodic secrecy rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicEstimate {
    pub secrecy: f64,
    pub mean_ab: f64,
    pub mean_ae: f64,
    pub se_ab: f64,
    pub se_ae: f64,
    pub trials: usize,
}

/// Sample mean and standard error of the mean (zero for a single sample).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn ergodic_secrecy_mc(
    cfg: &NetworkConfig,
    alloc: &PowerAllocation,
    pos: EvePosition,
    trials: usize,
    seed: u64,
) -> Result<ErgodicEstimate> {
    cfg.validate()?;
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let gains = path_loss(pos, cfg)?;
    alloc.check(cfg)?;
    let pairs = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ch = ChannelRealization::sample(cfg, seed, t);
            Ok((
                exact_rate_bob(&ch.legit, alloc, cfg)?,
                exact_rate_eve(&ch.legit, &ch.eve, alloc, cfg, gains)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (ab, ae): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (mean_ab, se_ab) = mean_and_se(&ab);
    let (mean_ae, se_ae) = mean_and_se(&ae);
    Ok(ErgodicEstimate {
        secrecy: secrecy_rate(mean_ab, mean_ae),
        mean_ab,
        mean_ae,
        se_ab,
        se_ae,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(n_a: usize, n_b: usize, n_e: usize) -> NetworkConfig {
        NetworkConfig {
            n_a,
            n_b,
            n_e,
            ..NetworkConfig::default()
        }
    }

    #[test]
    fn path_loss_examples() {
        let mut c = NetworkConfig {
            alpha: 2.0,
            ..NetworkConfig::default()
        };
        let g = path_loss(EvePosition { x: -0.6, y: 0.0 }, &c).unwrap();
        assert_relative_eq!(g.a, 100.0, max_relative = 1e-12);
        assert_relative_eq!(g.b, 1.0 / 1.21, max_relative = 1e-12);
        let mid = path_loss(EvePosition { x: 0.0, y: 0.0 }, &c).unwrap();
        assert_relative_eq!(mid.a, 4.0, max_relative = 1e-12);
        assert_relative_eq!(mid.b, 4.0, max_relative = 1e-12);
        c.alpha = 4.0;
        let g = path_loss(EvePosition { x: -0.6, y: 0.0 }, &c).unwrap();
        assert_relative_eq!(g.a, 1e4, max_relative = 1e-10);
        assert_relative_eq!(g.b, 1.0 / 1.4641, max_relative = 1e-12);
    }

    #[test]
    fn inside_secured_zone_is_rejected() {
        let c = NetworkConfig::default();
        let err = path_loss(EvePosition { x: -0.45, y: 0.0 }, &c).unwrap_err();
        assert!(matches!(err, Error::InsideSecuredZone { .. }));
    }

    #[test]
    fn worst_case_positions() {
        for (delta, x) in [(0.1, -0.6), (0.5, -1.0), (0.05, -0.55)] {
            let c = NetworkConfig {
                delta,
                ..NetworkConfig::default()
            };
            let p = worst_case_eve_position(&c);
            assert_relative_eq!(p.x, x, epsilon = 1e-15);
            assert_eq!(p.y, 0.0);
            assert!(path_loss(p, &c).is_ok());
        }
    }

    #[test]
    fn config_validation() {
        assert!(NetworkConfig::default().validate().is_ok());
        assert!(cfg(2, 3, 1).validate().is_err());
        assert!(NetworkConfig {
            rho: 1.5,
            ..NetworkConfig::default()
        }
        .validate()
        .is_err());
        assert!(NetworkConfig {
            delta: 0.0,
            ..NetworkConfig::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn same_seed_same_realization() {
        let c = cfg(4, 2, 3);
        let x = ChannelRealization::sample(&c, 9, 5);
        let y = ChannelRealization::sample(&c, 9, 5);
        assert_eq!(x.legit.h, y.legit.h);
        assert_eq!(x.eve.b, y.eve.b);
        let z = ChannelRealization::sample(&c, 9, 6);
        assert_ne!(x.legit.h, z.legit.h);
    }

    #[test]
    fn svd_partition_is_orthogonal() {
        let c = cfg(6, 3, 2);
        let ch = ChannelRealization::sample(&c, 1, 0);
        let p = ch.legit.partition(2);
        assert!((p.v1.adjoint() * &p.v2).norm() < 1e-10);
        assert!((p.v1.adjoint() * &p.v1 - identity(2)).norm() < 1e-10);
        assert_eq!(p.sigma1.len() + p.sigma2.len(), 3);
        assert!(p.sigma1.iter().chain(&p.sigma2).all(|s| *s >= 0.0));
    }

    #[test]
    fn allocation_checks() {
        let c = cfg(4, 4, 2);
        assert!(PowerAllocation::new(vec![], 0.0, 0.0).is_err());
        assert!(PowerAllocation::new(vec![-1.0], 0.0, 0.0).is_err());
        let full = PowerAllocation::uniform(4, 10.0, 1.0, 0.0).unwrap();
        assert!(full.check(&c).is_err());
        let over = PowerAllocation::uniform(2, 900.0, 200.0, 0.0).unwrap();
        assert!(over.check(&c).is_err());
        let jam = PowerAllocation::uniform(2, 1.0, 0.0, 1001.0).unwrap();
        assert!(jam.check(&c).is_err());
        assert!(PowerAllocation::uniform(2, 500.0, 0.0, 1000.0)
            .unwrap()
            .check(&c)
            .is_ok());
    }

    #[test]
    fn zero_signal_gives_zero_rates() {
        let c = cfg(6, 3, 4);
        let ch = ChannelRealization::sample(&c, 3, 0);
        let alloc = PowerAllocation::uniform(2, 0.0, 100.0, 100.0).unwrap();
        assert_eq!(exact_rate_bob(&ch.legit, &alloc, &c).unwrap(), 0.0);
        let g = LargeScale::UNIT;
        assert_eq!(
            exact_rate_eve(&ch.legit, &ch.eve, &alloc, &c, g).unwrap(),
            0.0
        );
    }

    #[test]
    fn bob_rate_diagonalizes_without_self_interference() {
        let c = NetworkConfig {
            rho: 0.0,
            ..cfg(6, 3, 4)
        };
        let ch = ChannelRealization::sample(&c, 4, 0);
        let alloc = PowerAllocation::uniform(3, 30.0, 50.0, 100.0).unwrap();
        let want: f64 = ch
            .legit
            .svd
            .singular_values
            .iter()
            .map(|s| (1.0 + 10.0 * s * s).log2())
            .sum();
        assert_relative_eq!(
            exact_rate_bob(&ch.legit, &alloc, &c).unwrap(),
            want,
            max_relative = 1e-10
        );
    }

    #[test]
    fn eve_rate_without_interference() {
        let c = cfg(5, 2, 3);
        let ch = ChannelRealization::sample(&c, 5, 0);
        let alloc = PowerAllocation::new(vec![3.0, 1.0], 0.0, 0.0).unwrap();
        let gains = LargeScale { a: 2.0, b: 0.5 };
        let part = ch.legit.partition(2);
        let a1 = &ch.eve.a * &part.v1;
        let q = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(3.0), real(1.0)]));
        let m = identity(3) + (&a1 * q * a1.adjoint()).scale(2.0);
        let want = log2_det_hpd(&m, "t").unwrap();
        let got = exact_rate_eve(&ch.legit, &ch.eve, &alloc, &c, gains).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-10);
    }

    #[test]
    fn secrecy_clamps() {
        assert_eq!(secrecy_rate(1.0, 1.0), 0.0);
        assert_eq!(secrecy_rate(3.0, 1.0), 2.0);
        assert_eq!(secrecy_rate(1.0, 3.0), 0.0);
    }

    #[test]
    fn single_trial_matches_instantaneous() {
        let c = cfg(4, 2, 3);
        let pos = worst_case_eve_position(&c);
        let alloc = PowerAllocation::uniform(2, 200.0, 300.0, 500.0).unwrap();
        let est = ergodic_secrecy_mc(&c, &alloc, pos, 1, 17).unwrap();
        let ch = ChannelRealization::sample(&c, 17, 0);
        let inst = instantaneous_secrecy(&ch, &alloc, &c, pos).unwrap();
        assert_relative_eq!(est.secrecy, inst, epsilon = 1e-12);
        assert_eq!(est.se_ab, 0.0);
    }
}
