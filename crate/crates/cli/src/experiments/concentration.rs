use mimome_core::channel::{
    db_to_linear, exact_rate_eve, path_loss, worst_case_eve_position, ChannelRealization,
    NetworkConfig, PowerAllocation,
};
use mimome_core::rmt::asymptotic_rate_eve_general;

use super::{product, require_nonempty, Experiment};
use crate::error::CliResult;
use crate::params::Params;
use crate::table::{run_cells, Row, Table};

const HEADER: &[&str] = &[
    "experiment",
    "kind",
    "n_a",
    "n_b",
    "n_e",
    "r",
    "p_db",
    "delta",
    "alpha",
    "rho",
    "trials",
    "seed",
    "trial",
    "rate_eve",
    "rate_eve_per_antenna",
    "rel_dev",
];

/// Exact Eve rate per draw at the worst-case position with `r` equal streams,
/// `p_s = p_n = p / 2` and `p_b = p`, plus one large-system reference row per cell.
#[derive(Debug, Clone)]
pub struct Concentration {
    n_a: usize,
    n_b: usize,
    r: usize,
    n_e: Vec<usize>,
    p_db: Vec<f64>,
    delta: f64,
    alpha: f64,
    rho: f64,
    trials: usize,
    seed: u64,
}

impl Concentration {
    pub fn from_params(p: &mut Params) -> CliResult<Self> {
        let base = NetworkConfig::default();
        Ok(Self {
            n_a: p.get("n_a", 8)?,
            n_b: p.get("n_b", 4)?,
            r: p.get("r", 4)?,
            n_e: p.grid_usize("n_e", &[8, 16, 64])?,
            p_db: p.grid_f64("p_db", &[0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0])?,
            delta: p.get("delta", base.delta)?,
            alpha: p.get("alpha", base.alpha)?,
            rho: p.get("rho", base.rho)?,
            trials: p.get("trials", 100)?,
            seed: p.get("seed", 1)?,
        })
    }

    fn config(&self, n_e: usize, p_db: f64) -> NetworkConfig {
        let p = db_to_linear(p_db);
        NetworkConfig {
            n_a: self.n_a,
            n_b: self.n_b,
            n_e,
            delta: self.delta,
            alpha: self.alpha,
            rho: self.rho,
            p_a_max: p,
            p_b_max: p,
        }
    }

    fn echo(&self, kind: &str, cfg: &NetworkConfig, p_db: f64) -> Row {
        Row::new()
            .text("concentration")
            .text(kind)
            .count(cfg.n_a)
            .count(cfg.n_b)
            .count(cfg.n_e)
            .count(self.r)
            .float(p_db)
            .float(self.delta)
            .float(self.alpha)
            .float(self.rho)
            .count(self.trials)
            .int(self.seed)
    }

    fn cell(&self, n_e: usize, p_db: f64) -> CliResult<Vec<Row>> {
        let cfg = self.config(n_e, p_db);
        let p = cfg.p_a_max;
        let gains = path_loss(worst_case_eve_position(&cfg), &cfg)?;
        let alloc = PowerAllocation::uniform(self.r, p / 2.0, p / 2.0, p)?;
        let reference = asymptotic_rate_eve_general(&cfg, &alloc, gains)?;
        let per = |x: f64| x / n_e as f64;
        let mut rows = Vec::with_capacity(self.trials + 1);
        for t in 0..self.trials as u64 {
            let ch = ChannelRealization::sample(&cfg, self.seed, t);
            let rate = exact_rate_eve(&ch.legit, &ch.eve, &alloc, &cfg, gains)?;
            let rel = if reference > 0.0 {
                (rate - reference).abs() / reference
            } else {
                f64::NAN
            };
            rows.push(
                self.echo("sample", &cfg, p_db)
                    .int(t)
                    .float(rate)
                    .float(per(rate))
                    .float(rel),
            );
        }
        rows.push(
            self.echo("asymptotic", &cfg, p_db)
                .blank()
                .float(reference)
                .float(per(reference))
                .blank(),
        );
        Ok(rows)
    }
}

impl Experiment for Concentration {
    fn cell_count(&self) -> usize {
        self.n_e.len() * self.p_db.len()
    }

    fn infeasible(&self) -> Vec<String> {
        let mut out = Vec::new();
        require_nonempty(&mut out, "n_e", self.n_e.len());
        require_nonempty(&mut out, "p_db", self.p_db.len());
        if self.trials == 0 {
            out.push("trials must be at least 1".into());
        }
        if self.r == 0 || self.r > self.n_b {
            out.push(format!("r = {} must lie in 1..=n_b = {}", self.r, self.n_b));
        }
        for (n_e, p_db) in product(&self.n_e, &self.p_db) {
            let cfg = self.config(n_e, p_db);
            if let Err(e) = cfg
                .validate()
                .and_then(|_| path_loss(worst_case_eve_position(&cfg), &cfg))
            {
                out.push(format!("n_e = {n_e}, p_db = {p_db}: {e}"));
            }
        }
        out
    }

    fn run(&self) -> CliResult<Table> {
        let cells = product(&self.n_e, &self.p_db);
        Ok(Table::new(
            HEADER,
            run_cells(&cells, |&(n_e, p_db)| self.cell(n_e, p_db))?,
        ))
    }
}
