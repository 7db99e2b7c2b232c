use mimome_core::channel::{
    db_to_linear, path_loss, worst_case_eve_position, ChannelRealization, NetworkConfig,
};
use mimome_core::optimizer::{optimize_powers, InterferenceEta, ScaSettings};
use mimome_core::rng::{stream_index, substream};
use mimome_core::tolerance::{
    max_tolerable_ne_fixed, max_tolerable_ne_opt, ToleranceResult, DEFAULT_SEARCH_CAP,
};
use rand::Rng;
use rayon::prelude::*;

use super::{require_nonempty, Experiment, Preset};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::table::{float, run_cells, Row, Table};

const BOOTSTRAP_TAG: u64 = 0xB007_5700;
const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Settings shared by the optimizer sweeps. Bob always has `n_a / 2` antennas.
#[derive(Debug, Clone)]
struct SweepSetup {
    n_a: Vec<usize>,
    p_a_db: f64,
    p_b_db: f64,
    delta: f64,
    alpha: f64,
    rho: f64,
    settings: ScaSettings,
    trials: usize,
    seed: u64,
}

impl SweepSetup {
    fn from_params(p: &mut Params, preset: Preset) -> CliResult<Self> {
        let base = NetworkConfig::default();
        let eta = match p.get_str("interference_eta").as_deref() {
            None | Some("tracked") => InterferenceEta::Tracked,
            Some("frozen") => InterferenceEta::Frozen,
            Some(other) => {
                return Err(CliError::usage(format!(
                    "interference_eta must be tracked or frozen, got `{other}`"
                )))
            }
        };
        let settings = ScaSettings {
            epsilon: p.get("epsilon", 0.01)?,
            max_iterations: p.get("max_iterations", 500)?,
            interference_eta: eta,
            ..ScaSettings::default()
        };
        Ok(Self {
            n_a: p.grid_usize(
                "n_a",
                &preset.pick(vec![4, 8], vec![4, 6, 8, 10, 12, 14, 16]),
            )?,
            p_a_db: p.get("p_a_db", 30.0)?,
            p_b_db: p.get("p_b_db", 30.0)?,
            delta: p.get("delta", base.delta)?,
            alpha: p.get("alpha", base.alpha)?,
            rho: p.get("rho", base.rho)?,
            settings,
            trials: p.get("trials", preset.pick(20, 100))?,
            seed: p.get("seed", 1)?,
        })
    }

    fn config(&self, n_a: usize, n_e: usize) -> NetworkConfig {
        NetworkConfig {
            n_a,
            n_b: n_a / 2,
            n_e,
            delta: self.delta,
            alpha: self.alpha,
            rho: self.rho,
            p_a_max: db_to_linear(self.p_a_db),
            p_b_max: db_to_linear(self.p_b_db),
        }
    }

    fn eta_name(&self) -> &'static str {
        match self.settings.interference_eta {
            InterferenceEta::Tracked => "tracked",
            InterferenceEta::Frozen => "frozen",
        }
    }

    fn problems(&self, n_e_for: impl Fn(usize) -> usize) -> Vec<String> {
        let mut out = Vec::new();
        require_nonempty(&mut out, "n_a", self.n_a.len());
        if self.trials == 0 {
            out.push("trials must be at least 1".into());
        }
        if let Err(e) = self.settings.validate() {
            out.push(e.to_string());
        }
        for &n_a in &self.n_a {
            if n_a < 2 || n_a % 2 == 1 {
                out.push(format!(
                    "n_a = {n_a}: needs an even value >= 2 so that n_b = n_a / 2 > 0"
                ));
                continue;
            }
            let cfg = self.config(n_a, n_e_for(n_a));
            if let Err(e) = cfg
                .validate()
                .and_then(|_| path_loss(worst_case_eve_position(&cfg), &cfg))
            {
                out.push(format!("n_a = {n_a}: {e}"));
            }
        }
        out
    }
}

const NE_HEADER: &[&str] = &[
    "experiment",
    "metric",
    "n_a",
    "n_b",
    "p_a_db",
    "p_b_db",
    "delta",
    "alpha",
    "rho",
    "epsilon",
    "interference_eta",
    "cap",
    "trials",
    "seed",
    "n_e_max",
    "capped",
    "excluded_draws",
    "margin_at_value",
    "margin_above_value",
];

/// Largest tolerable Eve antenna count with the fixed and the optimized allocation.
#[derive(Debug, Clone)]
pub struct NeSweep {
    setup: SweepSetup,
    cap: usize,
}

impl NeSweep {
    pub fn from_params(p: &mut Params, preset: Preset) -> CliResult<Self> {
        Ok(Self {
            setup: SweepSetup::from_params(p, preset)?,
            cap: p.get("cap", DEFAULT_SEARCH_CAP)?,
        })
    }

    fn row(&self, res: &ToleranceResult) -> Row {
        let s = &self.setup;
        let opt = |m: Option<f64>| m.map(float).unwrap_or_default();
        Row::new()
            .text("ne-sweep")
            .text(res.metric.name())
            .count(res.n_a)
            .count(res.n_b)
            .float(s.p_a_db)
            .float(s.p_b_db)
            .float(s.delta)
            .float(s.alpha)
            .float(s.rho)
            .float(s.settings.epsilon)
            .text(s.eta_name())
            .count(self.cap)
            .count(res.trials)
            .int(s.seed)
            .count(res.value)
            .flag(res.capped)
            .count(res.excluded_draws)
            .text(opt(res.certificate.at_value))
            .text(opt(res.certificate.above_value))
    }

    fn cell(&self, n_a: usize) -> CliResult<Vec<Row>> {
        let s = &self.setup;
        let cfg = s.config(n_a, 1);
        let pos = worst_case_eve_position(&cfg);
        let fixed = max_tolerable_ne_fixed(&cfg, pos, self.cap)?;
        let opt = max_tolerable_ne_opt(&cfg, pos, s.trials, s.seed, &s.settings, self.cap)?;
        Ok(vec![self.row(&fixed), self.row(&opt)])
    }
}

impl Experiment for NeSweep {
    fn cell_count(&self) -> usize {
        self.setup.n_a.len() * self.cap
    }

    fn infeasible(&self) -> Vec<String> {
        let mut out = self.setup.problems(|_| 1);
        if self.cap == 0 {
            out.push("cap must be at least 1".into());
        }
        out
    }

    fn run(&self) -> CliResult<Table> {
        Ok(Table::new(
            NE_HEADER,
            run_cells(&self.setup.n_a, |&n_a| self.cell(n_a))?,
        ))
    }
}

const SCA_HEADER: &[&str] = &[
    "experiment",
    "kind",
    "n_a",
    "n_b",
    "n_e",
    "p_a_db",
    "p_b_db",
    "delta",
    "alpha",
    "rho",
    "epsilon",
    "interference_eta",
    "trials",
    "seed",
    "trial",
    "iterations",
    "max_run_iterations",
    "converged",
    "secrecy_margin",
    "mean_iterations",
    "ci_low",
    "ci_high",
];

/// Optimizer iterations per channel draw, summed over the stream counts tried,
/// with a per-`n_a` mean and 95% percentile-bootstrap interval.
#[derive(Debug, Clone)]
pub struct ScaConvergence {
    setup: SweepSetup,
    /// Eve's antenna count; `None` means equal to `n_a`.
    n_e: Option<usize>,
}

struct DrawOutcome {
    iterations: usize,
    max_run_iterations: usize,
    converged: bool,
    margin: f64,
}

impl ScaConvergence {
    pub fn from_params(p: &mut Params, preset: Preset) -> CliResult<Self> {
        let setup = SweepSetup::from_params(p, preset)?;
        let n_e = match p.get_str("n_e").as_deref() {
            None | Some("n_a") => None,
            Some(s) => Some(s.parse().map_err(|_| {
                CliError::usage(format!("n_e must be an integer or n_a, got `{s}`"))
            })?),
        };
        Ok(Self { setup, n_e })
    }

    fn n_e_for(&self, n_a: usize) -> usize {
        self.n_e.unwrap_or(n_a)
    }

    fn echo(&self, kind: &str, cfg: &NetworkConfig) -> Row {
        let s = &self.setup;
        Row::new()
            .text("sca-convergence")
            .text(kind)
            .count(cfg.n_a)
            .count(cfg.n_b)
            .count(cfg.n_e)
            .float(s.p_a_db)
            .float(s.p_b_db)
            .float(s.delta)
            .float(s.alpha)
            .float(s.rho)
            .float(s.settings.epsilon)
            .text(s.eta_name())
            .count(s.trials)
            .int(s.seed)
    }

    fn draw(&self, cfg: &NetworkConfig, trial: u64) -> CliResult<DrawOutcome> {
        let gains = path_loss(worst_case_eve_position(cfg), cfg)?;
        let ch = ChannelRealization::sample(cfg, self.setup.seed, trial);
        let res = optimize_powers(&ch.legit, cfg, gains, &self.setup.settings)?;
        Ok(DrawOutcome {
            iterations: res.runs.iter().map(|r| r.iterations).sum(),
            max_run_iterations: res.runs.iter().map(|r| r.iterations).max().unwrap_or(0),
            converged: res.all_converged(),
            margin: -res.g,
        })
    }

    fn cell(&self, n_a: usize) -> CliResult<Vec<Row>> {
        let cfg = self.setup.config(n_a, self.n_e_for(n_a));
        let draws = (0..self.setup.trials as u64)
            .into_par_iter()
            .map(|t| self.draw(&cfg, t))
            .collect::<CliResult<Vec<_>>>()?;
        let mut rows: Vec<Row> = draws
            .iter()
            .enumerate()
            .map(|(t, d)| {
                self.echo("trial", &cfg)
                    .count(t)
                    .count(d.iterations)
                    .count(d.max_run_iterations)
                    .flag(d.converged)
                    .float(d.margin)
                    .blank()
                    .blank()
                    .blank()
            })
            .collect();
        let its: Vec<f64> = draws.iter().map(|d| d.iterations as f64).collect();
        let (mean, lo, hi) = bootstrap_mean_ci(&its, self.setup.seed, n_a as u64);
        let converged = draws.iter().all(|d| d.converged);
        rows.push(
            self.echo("summary", &cfg)
                .blank()
                .blank()
                .blank()
                .flag(converged)
                .blank()
                .float(mean)
                .float(lo)
                .float(hi),
        );
        Ok(rows)
    }
}

/// Sample mean and 2.5% / 97.5% percentiles of the resampled means.
pub fn bootstrap_mean_ci(xs: &[f64], seed: u64, key: u64) -> (f64, f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let mut rng = substream(seed, stream_index(BOOTSTRAP_TAG, &[key]));
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    let at = |q: f64| {
        means
            [((q * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize).min(BOOTSTRAP_RESAMPLES - 1)]
    };
    (mean, at(0.025), at(0.975))
}

impl Experiment for ScaConvergence {
    fn cell_count(&self) -> usize {
        self.setup.n_a.len() * self.setup.trials
    }

    fn infeasible(&self) -> Vec<String> {
        self.setup.problems(|n_a| self.n_e_for(n_a))
    }

    fn run(&self) -> CliResult<Table> {
        Ok(Table::new(
            SCA_HEADER,
            run_cells(&self.setup.n_a, |&n_a| self.cell(n_a))?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_interval_brackets_the_mean() {
        let xs: Vec<f64> = (0..50).map(|i| (i % 7) as f64 + 3.0).collect();
        let (m, lo, hi) = bootstrap_mean_ci(&xs, 4, 8);
        assert!(lo <= m && m <= hi);
        assert!(hi - lo > 0.0);
        assert_eq!(bootstrap_mean_ci(&xs, 4, 8), (m, lo, hi));
    }

    #[test]
    fn constant_sample_has_zero_width() {
        let (m, lo, hi) = bootstrap_mean_ci(&[5.0; 10], 1, 1);
        assert_eq!((m, lo, hi), (5.0, 5.0, 5.0));
    }
}
