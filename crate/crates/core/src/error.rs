use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("eavesdropper at distance {distance} from Alice is inside the secured zone of radius {delta}")]
    InsideSecuredZone { distance: f64, delta: f64 },

    #[error("infeasible power allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("eta = {eta} does not solve the fixed-point equation (residual {residual:e})")]
    EtaMismatch { eta: f64, residual: f64 },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("matrix is singular: {0}")]
    Singular(&'static str),

    #[error("exhaustive search needs {candidates} candidates, above the cap of {cap}")]
    EnumerationCap { candidates: f64, cap: u64 },

    #[error("every Monte Carlo trial was flagged ({flagged} of {trials})")]
    AllTrialsFlagged { flagged: usize, trials: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
