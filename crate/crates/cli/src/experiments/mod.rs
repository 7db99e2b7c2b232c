//! The experiment catalogue. Each experiment reads its parameters, reports
//! infeasible grid cells before any work starts, and produces one table.

mod anece;
mod blind;
mod concentration;
mod limit;
mod sweep;

use clap::ValueEnum;

use crate::error::CliResult;
use crate::params::Params;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentId {
    /// Exact Eve rates scattered around the large-system value.
    Concentration,
    /// Largest tolerable Eve antenna count, fixed vs optimized powers.
    NeSweep,
    /// Iterations the power optimizer needs, with confidence intervals.
    ScaConvergence,
    /// Large-system Eve rate against its many-antenna limit.
    LimitCheck,
    /// Monte Carlo mutual-information bounds under the anti-eavesdropping scheme.
    AneceBounds,
    /// Closed-form secure degrees of freedom.
    Sdof,
    /// Eve's blind-detection rate over the data length.
    BlindRate,
    /// Secrecy with and without blind detection over Eve's antenna count.
    BlindSecrecy,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Concentration,
        ExperimentId::NeSweep,
        ExperimentId::ScaConvergence,
        ExperimentId::LimitCheck,
        ExperimentId::AneceBounds,
        ExperimentId::Sdof,
        ExperimentId::BlindRate,
        ExperimentId::BlindSecrecy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Concentration => "concentration",
            ExperimentId::NeSweep => "ne-sweep",
            ExperimentId::ScaConvergence => "sca-convergence",
            ExperimentId::LimitCheck => "limit-check",
            ExperimentId::AneceBounds => "anece-bounds",
            ExperimentId::Sdof => "sdof",
            ExperimentId::BlindRate => "blind-rate",
            ExperimentId::BlindSecrecy => "blind-secrecy",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            ExperimentId::Concentration => "exact vs large-system Eve rate per channel draw",
            ExperimentId::NeSweep => "max tolerable Eve antennas, fixed vs optimized powers",
            ExperimentId::ScaConvergence => "optimizer iterations with 95% bootstrap intervals",
            ExperimentId::LimitCheck => "large-system Eve rate vs its many-antenna limit",
            ExperimentId::AneceBounds => "Monte Carlo rate bounds with estimated channels",
            ExperimentId::Sdof => "closed-form secure degrees of freedom",
            ExperimentId::BlindRate => "Eve's blind-detection rate over data length",
            ExperimentId::BlindSecrecy => "secrecy with blind vs known-channel Eve",
        }
    }
}

/// Scale of the default grids and trial counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Preset {
    /// Reduced grids and trials that finish in minutes.
    #[default]
    Desk,
    /// Full trial counts and grids.
    Full,
}

impl Preset {
    fn pick<T>(self, desk: T, full: T) -> T {
        match self {
            Preset::Desk => desk,
            Preset::Full => full,
        }
    }
}

pub trait Experiment {
    /// Units of work: grid cells, or cells times search budget for searches.
    fn cell_count(&self) -> usize;
    /// One message per grid problem; empty when the run is feasible.
    fn infeasible(&self) -> Vec<String>;
    fn run(&self) -> CliResult<Table>;
}

/// Reads the experiment's parameters. Unknown keys are rejected.
pub fn build(
    id: ExperimentId,
    params: &mut Params,
    preset: Preset,
) -> CliResult<Box<dyn Experiment>> {
    let exp: Box<dyn Experiment> = match id {
        ExperimentId::Concentration => Box::new(concentration::Concentration::from_params(params)?),
        ExperimentId::NeSweep => Box::new(sweep::NeSweep::from_params(params, preset)?),
        ExperimentId::ScaConvergence => {
            Box::new(sweep::ScaConvergence::from_params(params, preset)?)
        }
        ExperimentId::LimitCheck => Box::new(limit::LimitCheck::from_params(params)?),
        ExperimentId::AneceBounds => Box::new(anece::AneceBounds::from_params(params, preset)?),
        ExperimentId::Sdof => Box::new(anece::Sdof::from_params(params)?),
        ExperimentId::BlindRate => Box::new(blind::BlindSweep::rate_from_params(params, preset)?),
        ExperimentId::BlindSecrecy => {
            Box::new(blind::BlindSweep::secrecy_from_params(params, preset)?)
        }
    };
    params.reject_unknown()?;
    Ok(exp)
}

pub(crate) fn require_nonempty(out: &mut Vec<String>, name: &str, len: usize) {
    if len == 0 {
        out.push(format!("grid `{name}` is empty"));
    }
}

/// Cartesian product of two grids, first index outermost.
pub(crate) fn product<A: Clone, B: Clone>(xs: &[A], ys: &[B]) -> Vec<(A, B)> {
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}
