use mimome_core::blind::{eve_blind_rate, BlindConfig, MseEstimator};
use mimome_core::channel::db_to_linear;

use super::{product, require_nonempty, Experiment, Preset};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::table::{run_cells, Row, Table};

const HEADER: &[&str] = &[
    "experiment",
    "n_a",
    "n_b",
    "n_e",
    "k2",
    "p_db",
    "a",
    "estimator",
    "trials",
    "seed",
    "r_ae2",
    "r_ae_known_csi",
    "r_ab",
    "q_bar_logdet",
    "m_bar_logdet",
    "m_bar_singular",
    "trials_used",
    "trials_flagged",
    "secrecy_blind",
    "secrecy_known_csi",
];

/// Eve's effective rate under blind detection over a grid of `(n_e, k2)`.
/// `blind-rate` sweeps `k2`, `blind-secrecy` sweeps `n_e`; the columns match.
#[derive(Debug, Clone)]
pub struct BlindSweep {
    id: &'static str,
    n_a: usize,
    n_b: usize,
    n_e: Vec<usize>,
    k2: Vec<usize>,
    p_db: f64,
    a: f64,
    estimator: MseEstimator,
    trials: usize,
    seed: u64,
}

impl BlindSweep {
    pub fn rate_from_params(p: &mut Params, preset: Preset) -> CliResult<Self> {
        Self::from_params(p, preset, "blind-rate", &[8], &[5, 6, 8, 12])
    }

    pub fn secrecy_from_params(p: &mut Params, preset: Preset) -> CliResult<Self> {
        Self::from_params(p, preset, "blind-secrecy", &[4, 8, 16, 32], &[8])
    }

    fn from_params(
        p: &mut Params,
        preset: Preset,
        id: &'static str,
        n_e: &[usize],
        k2: &[usize],
    ) -> CliResult<Self> {
        let estimator = match p.get_str("mse").as_deref() {
            None | Some("symmetrized") => MseEstimator::Symmetrized,
            Some("raw") => MseEstimator::Raw,
            Some(other) => {
                return Err(CliError::usage(format!(
                    "mse must be symmetrized or raw, got `{other}`"
                )))
            }
        };
        Ok(Self {
            id,
            n_a: p.get("n_a", 4)?,
            n_b: p.get("n_b", 4)?,
            n_e: p.grid_usize("n_e", n_e)?,
            k2: p.grid_usize("k2", k2)?,
            p_db: p.get("p_db", 30.0)?,
            a: p.get("a", 1.0)?,
            estimator,
            trials: p.get("trials", preset.pick(30, 100))?,
            seed: p.get("seed", 1)?,
        })
    }

    fn config(&self, n_e: usize, k2: usize) -> BlindConfig {
        BlindConfig {
            n_a: self.n_a,
            n_b: self.n_b,
            n_e,
            k2,
            p_a: db_to_linear(self.p_db),
            a: self.a,
            trials: self.trials,
            seed: self.seed,
            estimator: self.estimator,
        }
    }

    fn cell(&self, n_e: usize, k2: usize) -> CliResult<Vec<Row>> {
        let cfg = self.config(n_e, k2);
        let r = eve_blind_rate(&cfg)?;
        Ok(vec![Row::new()
            .text(self.id)
            .count(cfg.n_a)
            .count(cfg.n_b)
            .count(n_e)
            .count(k2)
            .float(self.p_db)
            .float(self.a)
            .text(self.estimator.name())
            .count(self.trials)
            .int(self.seed)
            .float(r.r_ae2)
            .float(r.r_ae_known)
            .float(r.r_ab)
            .float(r.q_bar_logdet)
            .float(r.m_bar_logdet)
            .flag(r.m_bar_singular)
            .count(r.trials_used)
            .count(r.trials_flagged)
            .float(r.secrecy_blind())
            .float(r.secrecy_known())])
    }
}

impl Experiment for BlindSweep {
    fn cell_count(&self) -> usize {
        self.n_e.len() * self.k2.len()
    }

    fn infeasible(&self) -> Vec<String> {
        let mut out = Vec::new();
        require_nonempty(&mut out, "n_e", self.n_e.len());
        require_nonempty(&mut out, "k2", self.k2.len());
        for &k2 in &self.k2 {
            if k2 <= self.n_a {
                out.push(format!(
                    "k2 = {k2}: blind detection needs k2 > n_a = {}; with k2 <= n_a any invertible mixing of the \
                     symbols fits the observation equally well",
                    self.n_a
                ));
            }
        }
        for (n_e, k2) in product(&self.n_e, &self.k2) {
            if k2 <= self.n_a {
                continue;
            }
            if let Err(e) = self.config(n_e, k2).validate() {
                out.push(format!("n_e = {n_e}, k2 = {k2}: {e}"));
            }
        }
        out.dedup();
        out
    }

    fn run(&self) -> CliResult<Table> {
        let cells = product(&self.n_e, &self.k2);
        Ok(Table::new(
            HEADER,
            run_cells(&cells, |&(n_e, k2)| self.cell(n_e, k2))?,
        ))
    }
}
