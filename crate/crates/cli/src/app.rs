//! Argument definitions and subcommand dispatch.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::experiments::{build, Experiment, ExperimentId, Preset};
use crate::params::Params;

/// Environment variable that fixes the worker-thread count.
pub const THREADS_ENV: &str = "MIMOME_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mimome",
    version,
    about = "Secrecy experiments for full-duplex MIMOME networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write its CSV table.
    Run(RunArgs),
    /// Check an experiment's grid without running it.
    Validate(ExperimentArgs),
    /// List the available experiments.
    List,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub experiment: ExperimentId,
    /// Parameter override `key=value`; grids take `a,b,c` or `start:stop:step`.
    #[arg(long = "param", short = 'p', value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    pub preset: Preset,
    /// Flat `key=value` file; command-line values take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o', value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Append a per-cell `runtime_ms` column (output is then not reproducible).
    #[arg(long)]
    pub timing: bool,
}

impl ExperimentArgs {
    pub fn params(&self) -> CliResult<Params> {
        let mut p = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", path.display()))
                })?;
                Params::parse_file(&text)?
            }
            None => Params::default(),
        };
        for pair in &self.params {
            p.set_pair(pair)?;
        }
        if let Some(s) = self.seed {
            p.set("seed", s.to_string());
        }
        if let Some(t) = self.trials {
            p.set("trials", t.to_string());
        }
        Ok(p)
    }

    pub fn build(&self) -> CliResult<Box<dyn Experiment>> {
        build(self.experiment, &mut self.params()?, self.preset)
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    // Only fails if a pool already exists, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn reject_infeasible(exp: &dyn Experiment) -> CliResult<()> {
    let problems = exp.infeasible();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "infeasible grid:\n  {}",
            problems.join("\n  ")
        )))
    }
}

fn run(args: &RunArgs) -> CliResult<()> {
    let exp = args.experiment.build()?;
    reject_infeasible(exp.as_ref())?;
    // Open the output before computing so a bad path fails fast.
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            File::create(path)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let table = exp.run()?;
    table.write(BufWriter::new(sink), args.timing)
}

fn validate(args: &ExperimentArgs) -> CliResult<()> {
    let exp = args.build()?;
    let problems = exp.infeasible();
    println!("experiment: {}", args.experiment.name());
    println!("cells: {}", exp.cell_count());
    if problems.is_empty() {
        println!("status: ok");
        Ok(())
    } else {
        for p in &problems {
            println!("infeasible: {p}");
        }
        Err(CliError::usage(format!(
            "{} infeasible grid problem(s)",
            problems.len()
        )))
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Command::Run(args) => run(args),
        Command::Validate(args) => validate(args),
        Command::List => {
            for id in ExperimentId::ALL {
                println!("{:<16} {}", id.name(), id.summary());
            }
            Ok(())
        }
    }
}
