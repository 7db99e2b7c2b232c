use mimome_core::channel::{db_to_linear, LargeScale, NetworkConfig};
use mimome_core::rmt::{asymptotic_rate_eve_equal_power, limit_rate_eve};

use super::{require_nonempty, Experiment};
use crate::error::CliResult;
use crate::params::Params;
use crate::table::{run_cells, Row, Table};

const HEADER: &[&str] = &[
    "experiment",
    "n_a",
    "n_b",
    "n_e",
    "p_db",
    "a",
    "b",
    "rate_eve_asymptotic",
    "rate_eve_limit",
    "rel_gap",
];

/// Equal-power large-system Eve rate with `p_s = p_n = p / 2`, `p_b = p`,
/// against its limit for many Eve antennas.
#[derive(Debug, Clone)]
pub struct LimitCheck {
    n_a: usize,
    n_b: usize,
    n_e: Vec<usize>,
    p_db: f64,
    gains: LargeScale,
}

impl LimitCheck {
    pub fn from_params(p: &mut Params) -> CliResult<Self> {
        Ok(Self {
            n_a: p.get("n_a", 8)?,
            n_b: p.get("n_b", 4)?,
            n_e: p.grid_usize("n_e", &[16, 32, 64, 128, 256, 512, 1024])?,
            p_db: p.get("p_db", 30.0)?,
            gains: LargeScale {
                a: p.get("a", 1.0)?,
                b: p.get("b", 1.0)?,
            },
        })
    }

    fn config(&self, n_e: usize) -> NetworkConfig {
        let p = db_to_linear(self.p_db);
        NetworkConfig {
            n_a: self.n_a,
            n_b: self.n_b,
            n_e,
            p_a_max: p,
            p_b_max: p,
            ..NetworkConfig::default()
        }
    }

    fn cell(&self, n_e: usize) -> CliResult<Vec<Row>> {
        let cfg = self.config(n_e);
        let p = cfg.p_a_max;
        let rate = asymptotic_rate_eve_equal_power(&cfg, p / 2.0, p / 2.0, p, self.gains)?.rate();
        let limit = limit_rate_eve(&cfg, p / 2.0, self.gains.a);
        let gap = if limit > 0.0 {
            (rate - limit).abs() / limit
        } else {
            f64::NAN
        };
        Ok(vec![Row::new()
            .text("limit-check")
            .count(self.n_a)
            .count(self.n_b)
            .count(n_e)
            .float(self.p_db)
            .float(self.gains.a)
            .float(self.gains.b)
            .float(rate)
            .float(limit)
            .float(gap)])
    }
}

impl Experiment for LimitCheck {
    fn cell_count(&self) -> usize {
        self.n_e.len()
    }

    fn infeasible(&self) -> Vec<String> {
        let mut out = Vec::new();
        require_nonempty(&mut out, "n_e", self.n_e.len());
        if self.n_a <= self.n_b {
            out.push(format!(
                "equal-power asymptotics need n_a > n_b, got n_a = {}, n_b = {}",
                self.n_a, self.n_b
            ));
        }
        if !(self.gains.a > 0.0 && self.gains.b > 0.0) {
            out.push("large-scale gains a and b must be positive".into());
        }
        for &n_e in &self.n_e {
            if let Err(e) = self.config(n_e).validate() {
                out.push(format!("n_e = {n_e}: {e}"));
            }
        }
        out
    }

    fn run(&self) -> CliResult<Table> {
        Ok(Table::new(
            HEADER,
            run_cells(&self.n_e, |&n_e| self.cell(n_e))?,
        ))
    }
}
