mod sample;
mod solve;
mod spectrum;
mod verify;

use std::fs;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::config::{ConfigError, Overrides, RunConfig};
use crate::{Cli, Command, Common};
use radwave::functional::NonlinearitySpec;
use radwave::spectrum::{Tolerances, Truncation};

pub use sample::{sample_grid, write_sample};
pub use solve::solve_to;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config or arguments; exit code 2.
    #[error("{0}")]
    Validation(String),
    /// A suite or search failed after writing its artifacts; exit code 1.
    #[error("{0}")]
    Failure(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Failure(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Problem data as echoed into every JSON artifact.
#[derive(Debug, Serialize)]
pub(crate) struct ProblemDoc {
    n: u32,
    #[serde(rename = "R_coef")]
    r_coef: String,
    #[serde(rename = "T_coef")]
    t_coef: String,
    #[serde(rename = "R")]
    radius: f64,
    #[serde(rename = "T")]
    period: f64,
    mu: f64,
    beta: f64,
    eta: f64,
    nonlinearity: NonlinearitySpec,
    truncation: Truncation,
    tolerances: Tolerances,
}

impl ProblemDoc {
    pub(crate) fn new(cfg: &RunConfig) -> Self {
        let p = &cfg.problem;
        Self {
            n: p.n,
            r_coef: p.r_coef.to_string(),
            t_coef: p.t_coef.to_string(),
            radius: p.r_coef.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI,
            period: p.t_coef.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI,
            mu: p.mu,
            beta: p.beta,
            eta: p.eta,
            nonlinearity: cfg.nonlinearity,
            truncation: p.truncation,
            tolerances: p.tolerances,
        }
    }
}

fn prepare(common: &Common) -> Result<RunConfig, CliError> {
    let overrides = Overrides { seed: common.seed, truncation_scale: common.truncation_scale };
    let cfg = RunConfig::load(&common.config, overrides)?;
    fs::create_dir_all(&common.out)?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Spectrum(c) => spectrum::run(&prepare(c)?, &c.out),
        Command::Verify(c) => verify::run(&prepare(c)?, &c.out),
        Command::Solve(c) => solve::run(&prepare(c)?, &c.out),
        Command::Sample { common, id } => sample::run(&prepare(common)?, &common.out, *id),
    }
}
