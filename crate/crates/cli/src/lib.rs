//! Batch front-end: loads or generates an instance, runs one command and
//! writes a CSV or JSON report.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod instance;
pub mod output;

use instance::Source;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    Curvature,
    Bounds,
    ValidateMatroid,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Table,
    Tasks,
    Infogain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "strsub", version, about = "Greedy vs optimal on string submodular objectives")]
pub struct RunConfig {
    #[arg(long = "cmd", value_enum)]
    pub command: Command,
    /// JSON instance; a seeded random instance is generated when absent.
    #[arg(long = "instance")]
    pub instance_path: Option<PathBuf>,
    #[arg(long = "model", value_enum, default_value = "table")]
    pub model: ModelKind,
    /// Output file; stdout when absent.
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    #[arg(long = "format", value_enum, default_value = "csv")]
    pub output_format: OutputFormat,
    #[arg(long, default_value_t = strsub::DEFAULT_TOL)]
    pub tol: f64,
    /// Cap on oracle evaluations per enumeration.
    #[arg(long, default_value_t = strsub::DEFAULT_BUDGET)]
    pub budget: u128,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Power-split grid of an infogain model, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Enumeration depth for σ, ε and η.
    #[arg(long)]
    pub search_len: Option<usize>,
    /// Action count of generated instances.
    #[arg(long, default_value_t = 3)]
    pub actions: usize,
    /// Horizon override.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Seeds in a sweep without an instance file.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.horizon == Some(0) {
            return Err(CliError::Input("--horizon must be at least 1".into()));
        }
        if self.grid.is_some() && self.model != ModelKind::Infogain {
            return Err(CliError::Input("--grid applies to infogain models only".into()));
        }
        if let Some(p) = &self.instance_path {
            if !p.is_file() {
                return Err(CliError::Input(format!("{} is not a readable file", p.display())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] strsub::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(strsub::Error::BudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

/// Outcome of a successful run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    BoundFailed,
}

/// Dispatches the command and writes its report.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let src = Source::read(cfg.instance_path.as_deref())?;
    let (out, failed) = match cfg.command {
        Command::Sweep => commands::sweep(cfg, &src)?,
        cmd => {
            let inst = src.instance(cfg, cfg.seed)?;
            match cmd {
                Command::Solve => (commands::solve(cfg, &inst)?, false),
                Command::Curvature => (commands::curvature(cfg, &inst)?, false),
                Command::Bounds => commands::bounds(cfg, &inst)?,
                Command::ValidateMatroid => (commands::validate_matroid(cfg, &inst)?, false),
                Command::Sweep => unreachable!(),
            }
        }
    };
    out.write(cfg.output_format, cfg.output_path.as_deref())?;
    Ok(if failed { Outcome::BoundFailed } else { Outcome::Ok })
}

/// Exit status: 0 success, 1 a bound check failed, 2 input error, 3 budget exceeded.
pub fn run(cfg: &RunConfig) -> u8 {
    match execute(cfg) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::BoundFailed) => 1,
        Err(e) => {
            eprintln!("strsub: {e}");
            e.exit_code()
        }
    }
}
