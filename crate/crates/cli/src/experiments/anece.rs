use mimome_core::anece::{
    bound_alice_two_way, bound_bob, bound_eve_one_way, bound_eve_two_way, sdof_limits,
    secrecy_bounds, AneceConfig, RateBounds, TransmissionMode,
};

use super::{require_nonempty, Experiment, Preset};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::table::{run_cells, Row, Table};

fn parse_modes(p: &mut Params) -> CliResult<Vec<TransmissionMode>> {
    p.grid_words("mode", &["one-way", "two-way"])?
        .iter()
        .map(|w| match w.as_str() {
            "one-way" => Ok(TransmissionMode::OneWay),
            "two-way" => Ok(TransmissionMode::TwoWay),
            other => Err(CliError::usage(format!(
                "mode must be one-way or two-way, got `{other}`"
            ))),
        })
        .collect()
}

const BOUNDS_HEADER: &[&str] = &[
    "experiment",
    "mode",
    "quantity",
    "n_a",
    "n_b",
    "n_e",
    "k1",
    "k2",
    "p_db",
    "a",
    "b",
    "lower",
    "upper",
    "se_lower",
    "se_upper",
    "trials",
    "seed",
];

/// Bounds on each mutual-information term and on the per-sample secrecy rate.
#[derive(Debug, Clone)]
pub struct AneceBounds {
    base: AneceConfig,
    modes: Vec<TransmissionMode>,
    k2: Vec<usize>,
    p_db: Vec<f64>,
}

type BoundsCell = (TransmissionMode, usize, f64);

impl AneceBounds {
    pub fn from_params(p: &mut Params, preset: Preset) -> CliResult<Self> {
        let d = AneceConfig::default();
        let base = AneceConfig {
            n_a: p.get("n_a", d.n_a)?,
            n_b: p.get("n_b", d.n_b)?,
            n_e: p.get("n_e", d.n_e)?,
            k1: p.get("k1", d.k1)?,
            k2: d.k2,
            p: d.p,
            a: p.get("a", d.a)?,
            b: p.get("b", d.b)?,
            trials: p.get("trials", preset.pick(500, 2000))?,
            seed: p.get("seed", d.seed)?,
        };
        Ok(Self {
            modes: parse_modes(p)?,
            k2: p.grid_usize("k2", &[2, 4, 8, 12])?,
            p_db: p.grid_f64("p_db", &[30.0, 40.0, 50.0])?,
            base,
        })
    }

    fn cells(&self) -> Vec<BoundsCell> {
        let mut out = Vec::new();
        for &m in &self.modes {
            for &k2 in &self.k2 {
                for &p in &self.p_db {
                    out.push((m, k2, p));
                }
            }
        }
        out
    }

    fn cell(&self, &(mode, k2, p_db): &BoundsCell) -> CliResult<Vec<Row>> {
        let cfg = self.base.with_k2(k2).with_p_db(p_db);
        let mut terms: Vec<(&str, RateBounds)> = vec![("bob", bound_bob(&cfg)?)];
        match mode {
            TransmissionMode::OneWay => terms.push(("eve", bound_eve_one_way(&cfg)?)),
            TransmissionMode::TwoWay => {
                terms.push(("alice", bound_alice_two_way(&cfg)?));
                terms.push(("eve", bound_eve_two_way(&cfg)?));
            }
        }
        terms.push(("secrecy", secrecy_bounds(&cfg, mode)?));
        Ok(terms
            .into_iter()
            .map(|(q, b)| {
                Row::new()
                    .text("anece-bounds")
                    .text(mode.name())
                    .text(q)
                    .count(cfg.n_a)
                    .count(cfg.n_b)
                    .count(cfg.n_e)
                    .count(cfg.k1)
                    .count(k2)
                    .float(p_db)
                    .float(cfg.a)
                    .float(cfg.b)
                    .float(b.lower)
                    .float(b.upper)
                    .float(b.se_lower)
                    .float(b.se_upper)
                    .count(cfg.trials)
                    .int(cfg.seed)
            })
            .collect())
    }
}

impl Experiment for AneceBounds {
    fn cell_count(&self) -> usize {
        self.modes.len() * self.k2.len() * self.p_db.len()
    }

    fn infeasible(&self) -> Vec<String> {
        let mut out = Vec::new();
        require_nonempty(&mut out, "mode", self.modes.len());
        require_nonempty(&mut out, "k2", self.k2.len());
        require_nonempty(&mut out, "p_db", self.p_db.len());
        for &(_, k2, p_db) in &self.cells() {
            if !p_db.is_finite() {
                out.push(format!("p_db = {p_db} is not finite"));
            } else if let Err(e) = self.base.with_k2(k2).with_p_db(p_db).validate() {
                out.push(format!("k2 = {k2}, p_db = {p_db}: {e}"));
            }
        }
        out.dedup();
        out
    }

    fn run(&self) -> CliResult<Table> {
        Ok(Table::new(
            BOUNDS_HEADER,
            run_cells(&self.cells(), |c| self.cell(c))?,
        ))
    }
}

const SDOF_HEADER: &[&str] = &[
    "experiment",
    "mode",
    "n_a",
    "n_b",
    "n_e",
    "k2",
    "sdof_lower",
    "sdof_upper",
];

/// High-power slopes of the secrecy bounds. No randomness involved.
#[derive(Debug, Clone)]
pub struct Sdof {
    n_a: usize,
    n_b: usize,
    n_e: usize,
    k2: Vec<usize>,
    modes: Vec<TransmissionMode>,
}

impl Sdof {
    pub fn from_params(p: &mut Params) -> CliResult<Self> {
        // Closed form: seed and trial counts from shared configs have no effect.
        let _ = (p.get_str("seed"), p.get_str("trials"));
        Ok(Self {
            n_a: p.get("n_a", 4)?,
            n_b: p.get("n_b", 4)?,
            n_e: p.get("n_e", 8)?,
            k2: p.grid_usize("k2", &(1..=16).collect::<Vec<_>>())?,
            modes: parse_modes(p)?,
        })
    }
}

impl Experiment for Sdof {
    fn cell_count(&self) -> usize {
        self.modes.len() * self.k2.len()
    }

    fn infeasible(&self) -> Vec<String> {
        let mut out = Vec::new();
        require_nonempty(&mut out, "mode", self.modes.len());
        require_nonempty(&mut out, "k2", self.k2.len());
        if self.n_b == 0 || self.n_e == 0 || self.n_a < self.n_b {
            out.push(format!(
                "need n_a >= n_b >= 1 and n_e >= 1, got ({}, {}, {})",
                self.n_a, self.n_b, self.n_e
            ));
        }
        if self.k2.contains(&0) {
            out.push("k2 must be at least 1".into());
        }
        out
    }

    fn run(&self) -> CliResult<Table> {
        let cells: Vec<(TransmissionMode, usize)> = self
            .modes
            .iter()
            .flat_map(|&m| self.k2.iter().map(move |&k| (m, k)))
            .collect();
        let out = run_cells(&cells, |&(mode, k2)| {
            let (lo, hi) = sdof_limits(self.n_a, self.n_b, self.n_e, k2, mode);
            Ok(vec![Row::new()
                .text("sdof")
                .text(mode.name())
                .count(self.n_a)
                .count(self.n_b)
                .count(self.n_e)
                .count(k2)
                .float(lo)
                .float(hi)])
        })?;
        Ok(Table::new(SDOF_HEADER, out))
    }
}
