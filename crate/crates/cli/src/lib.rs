//! Config-driven driver for the radwave solver: `spectrum`, `verify`,
//! `solve` and `sample` subcommands that write their results as files.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run, CliError};

#[derive(Debug, Parser)]
#[command(name = "radwave", version, about = "Periodic radial solutions of semilinear wave equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides `search.seed` (and the verify seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Multiplies `j_max`, `k_max`, `nt` and `nr`.
    #[arg(long)]
    pub truncation_scale: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Enumerate the spectrum: spectrum.csv, arithmetic.json.
    Spectrum(Common),
    /// Run the property suites: verify.json.
    Verify(Common),
    /// Search for critical points: solutions.json, landscape.csv, ladder.csv, sample_<k>.csv.
    Solve(Common),
    /// Write the (t, r, u) grid of one solution: sample_<id>.csv.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Index into `points` of solutions.json.
        #[arg(long)]
        id: usize,
    },
}
