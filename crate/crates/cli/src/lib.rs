//! Command-line experiment runner over `mimome-core`.
//!
//! Every experiment writes one CSV table whose rows echo their full parameter
//! set. Output bytes depend only on the parameters and the seed, never on the
//! number of worker threads.

pub mod app;
pub mod error;
pub mod experiments;
pub mod params;
pub mod table;

pub use error::{CliError, CliResult};
