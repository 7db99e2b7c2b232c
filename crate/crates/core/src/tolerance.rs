//! Largest number of Eve antennas that still leaves a positive secrecy rate.

use rayon::prelude::*;

use crate::channel::{
    exact_rate_bob, exact_rate_eve, path_loss, secrecy_rate, EveChannels, EvePosition,
    LegitChannels, NetworkConfig, PowerAllocation,
};
use crate::optimizer::{optimize_powers, ScaSettings};
use crate::rmt::{asymptotic_rate_bob, asymptotic_rate_eve_equal_power};
use crate::rng::{stream_index, substream};
use crate::{Error, Result};

pub const DEFAULT_SEARCH_CAP: usize = 4096;

const EVE_DRAW_TAG: u64 = 0xE7E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToleranceMetric {
    /// Exact rates for one channel draw (median over Eve draws).
    Instantaneous,
    /// Large-system rates with the fixed equal-power allocation.
    Fixed,
    /// Exact Bob rate and large-system Eve rate at the optimized allocation,
    /// averaged over draws of Bob's channels.
    Optimized,
}

impl ToleranceMetric {
    pub fn name(&self) -> &'static str {
        match self {
            ToleranceMetric::Instantaneous => "instantaneous",
            ToleranceMetric::Fixed => "fixed",
            ToleranceMetric::Optimized => "optimized",
        }
    }
}

/// Secrecy margins on either side of the reported value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchCertificate {
    /// Margin at the reported value (`None` when the value is zero).
    pub at_value: Option<f64>,
    /// Margin at the value plus one (`None` when the search was capped).
    pub above_value: Option<f64>,
}

impl SearchCertificate {
    pub fn is_consistent(&self) -> bool {
        self.at_value.is_none_or(|m| m > 0.0) && self.above_value.is_none_or(|m| m <= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToleranceResult {
    pub metric: ToleranceMetric,
    pub n_a: usize,
    pub n_b: usize,
    pub value: usize,
    /// The search hit its cap; the true value is at least `value`.
    pub capped: bool,
    pub trials: usize,
    /// Allocation used (the fixed and instantaneous metrics only).
    pub allocation: Option<PowerAllocation>,
    pub certificate: SearchCertificate,
    /// Draws dropped because the optimizer did not converge, summed over all
    /// evaluated antenna counts.
    pub excluded_draws: usize,
}

/// Outcome of a largest-positive search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    pub value: usize,
    pub capped: bool,
    pub certificate: SearchCertificate,
}

/// Largest `n` in `1..=cap` with `margin(n) > 0`, assuming the margin changes sign
/// once. Exponential bracketing followed by bisection.
pub fn search_largest_positive(
    mut margin: impl FnMut(usize) -> Result<f64>,
    cap: usize,
) -> Result<SearchOutcome> {
    let first = margin(1)?;
    if first <= 0.0 || cap == 0 {
        return Ok(SearchOutcome {
            value: 0,
            capped: false,
            certificate: SearchCertificate {
                at_value: None,
                above_value: Some(first),
            },
        });
    }
    let (mut good, mut good_margin) = (1usize, first);
    let mut bad = None;
    while bad.is_none() {
        if good >= cap {
            return Ok(SearchOutcome {
                value: cap,
                capped: true,
                certificate: SearchCertificate {
                    at_value: Some(good_margin),
                    above_value: None,
                },
            });
        }
        let probe = (good * 2).min(cap);
        let m = margin(probe)?;
        if m > 0.0 {
            (good, good_margin) = (probe, m);
        } else {
            bad = Some((probe, m));
        }
    }
    let (mut bad, mut bad_margin) = bad.expect("bracket found");
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        let m = margin(mid)?;
        if m > 0.0 {
            (good, good_margin) = (mid, m);
        } else {
            (bad, bad_margin) = (mid, m);
        }
    }
    Ok(SearchOutcome {
        value: good,
        capped: false,
        certificate: SearchCertificate {
            at_value: Some(good_margin),
            above_value: Some(bad_margin),
        },
    })
}

/// Largest `n` reached by stepping up from 1 while `margin(n) > 0`.
pub fn linear_scan_largest_positive(
    mut margin: impl FnMut(usize) -> Result<f64>,
    cap: usize,
) -> Result<SearchOutcome> {
    let mut last = None;
    for n in 1..=cap {
        let m = margin(n)?;
        if m <= 0.0 {
            return Ok(SearchOutcome {
                value: n - 1,
                capped: false,
                certificate: SearchCertificate {
                    at_value: last,
                    above_value: Some(m),
                },
            });
        }
        last = Some(m);
    }
    Ok(SearchOutcome {
        value: cap,
        capped: true,
        certificate: SearchCertificate {
            at_value: last,
            above_value: None,
        },
    })
}

/// The fixed allocation: `r = n_b` equal streams, `p_s = p_n = p_a_max / 2` and
/// `p_b = p_a_max` (capped at `p_b_max`).
pub fn fixed_allocation(cfg: &NetworkConfig) -> Result<PowerAllocation> {
    let half = cfg.p_a_max / 2.0;
    PowerAllocation::uniform(cfg.n_b, half, half, cfg.p_a_max.min(cfg.p_b_max))
}

/// Large-system secrecy margin of the fixed allocation.
pub fn fixed_margin(cfg: &NetworkConfig, pos: EvePosition) -> Result<f64> {
    let gains = path_loss(pos, cfg)?;
    let alloc = fixed_allocation(cfg)?;
    let bob = asymptotic_rate_bob(cfg, alloc.p_s(), alloc.p_b())?;
    let eve =
        asymptotic_rate_eve_equal_power(cfg, alloc.p_s(), alloc.p_n(), alloc.p_b(), gains)?.rate();
    Ok(bob - eve)
}

pub fn max_tolerable_ne_fixed(
    cfg: &NetworkConfig,
    pos: EvePosition,
    cap: usize,
) -> Result<ToleranceResult> {
    cfg.validate()?;
    let out = search_largest_positive(|n_e| fixed_margin(&cfg.with_n_e(n_e), pos), cap)?;
    Ok(ToleranceResult {
        metric: ToleranceMetric::Fixed,
        n_a: cfg.n_a,
        n_b: cfg.n_b,
        value: out.value,
        capped: out.capped,
        trials: 0,
        allocation: Some(fixed_allocation(cfg)?),
        certificate: out.certificate,
        excluded_draws: 0,
    })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median exact secrecy rate over `eve_draws` fresh Eve channels with `n_e` antennas.
pub fn instantaneous_margin(
    legit: &LegitChannels,
    alloc: &PowerAllocation,
    cfg: &NetworkConfig,
    pos: EvePosition,
    eve_draws: usize,
    seed: u64,
) -> Result<f64> {
    let gains = path_loss(pos, cfg)?;
    let r_ab = exact_rate_bob(legit, alloc, cfg)?;
    let mut secrecy = (0..eve_draws as u64)
        .into_par_iter()
        .map(|d| {
            let mut rng = substream(seed, stream_index(EVE_DRAW_TAG, &[cfg.n_e as u64, d]));
            let eve = EveChannels::sample(cfg, &mut rng);
            Ok(secrecy_rate(
                r_ab,
                exact_rate_eve(legit, &eve, alloc, cfg, gains)?,
            ))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(median(&mut secrecy))
}

/// Steps `n_e` upward until the median secrecy over Eve draws is no longer positive.
pub fn max_tolerable_ne_instantaneous(
    legit: &LegitChannels,
    alloc: &PowerAllocation,
    cfg: &NetworkConfig,
    pos: EvePosition,
    eve_draws: usize,
    seed: u64,
    cap: usize,
) -> Result<ToleranceResult> {
    cfg.validate()?;
    if eve_draws == 0 {
        return Err(Error::InvalidConfig("need at least one Eve draw".into()));
    }
    let out = linear_scan_largest_positive(
        |n_e| instantaneous_margin(legit, alloc, &cfg.with_n_e(n_e), pos, eve_draws, seed),
        cap,
    )?;
    Ok(ToleranceResult {
        metric: ToleranceMetric::Instantaneous,
        n_a: cfg.n_a,
        n_b: cfg.n_b,
        value: out.value,
        capped: out.capped,
        trials: eve_draws,
        allocation: Some(alloc.clone()),
        certificate: out.certificate,
        excluded_draws: 0,
    })
}

/// Mean optimized margin `-g*` over the draws of Bob's channels, and the number of
/// draws dropped for non-convergence.
pub fn optimized_margin(
    cfg: &NetworkConfig,
    pos: EvePosition,
    draws: usize,
    seed: u64,
    settings: &ScaSettings,
) -> Result<(f64, usize)> {
    let gains = path_loss(pos, cfg)?;
    let results = (0..draws as u64)
        .into_par_iter()
        .map(|l| {
            let legit = LegitChannels::sample(cfg, &mut substream(seed, l));
            let res = optimize_powers(&legit, cfg, gains, settings)?;
            Ok((res.all_converged(), -res.g))
        })
        .collect::<Result<Vec<(bool, f64)>>>()?;
    let kept: Vec<f64> = results
        .iter()
        .filter(|(ok, _)| *ok)
        .map(|(_, m)| *m)
        .collect();
    let excluded = draws - kept.len();
    if kept.is_empty() {
        return Ok((0.0, excluded));
    }
    Ok((kept.iter().sum::<f64>() / kept.len() as f64, excluded))
}

pub fn max_tolerable_ne_opt(
    cfg: &NetworkConfig,
    pos: EvePosition,
    draws: usize,
    seed: u64,
    settings: &ScaSettings,
    cap: usize,
) -> Result<ToleranceResult> {
    cfg.validate()?;
    if draws == 0 {
        return Err(Error::InvalidConfig(
            "need at least one channel draw".into(),
        ));
    }
    let mut excluded = 0;
    let out = search_largest_positive(
        |n_e| {
            let (m, ex) = optimized_margin(&cfg.with_n_e(n_e), pos, draws, seed, settings)?;
            excluded += ex;
            Ok(m)
        },
        cap,
    )?;
    Ok(ToleranceResult {
        metric: ToleranceMetric::Optimized,
        n_a: cfg.n_a,
        n_b: cfg.n_b,
        value: out.value,
        capped: out.capped,
        trials: draws,
        allocation: None,
        certificate: out.certificate,
        excluded_draws: excluded,
    })
}
