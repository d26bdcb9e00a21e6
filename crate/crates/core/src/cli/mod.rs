//! `risloc` command line.
//!
//! Exit codes: 0 success, 2 config or input error, 3 model error, 4 I/O
//! error. Every command writes a [`RunManifest`] beside its output; the
//! `replay` subcommand re-executes one and checks the output hashes.

mod commands;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use manifest::{FileHash, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "risloc",
    version,
    about = "RIS sector probing and angle regression"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Trace the received-power pattern of one steered beam.
    Pattern(PatternArgs),
    /// Generate a labeled probing dataset.
    GenData(GenDataArgs),
    /// Split a dataset into train and test CSVs.
    Split(SplitArgs),
    /// Fit one regressor and save it as JSON.
    Train(TrainArgs),
    /// Score every model in a directory on a test set.
    Eval(EvalArgs),
    /// Compare predicted-angle beam patterns against the true-angle beam.
    Compare(CompareArgs),
    /// Run the whole pipeline with fixed seeds into a work directory.
    Repro(ReproArgs),
    /// Re-run the command recorded in a manifest and verify its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PatternArgs {
    /// JSON config; omitted keys take the built-in defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Steering angle in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub steer: f64,
    /// Evaluation grid `start:stop:step` in degrees.
    #[arg(long, default_value = "0:90:0.5")]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenDataArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_STEP_DEG)]
    pub step: f64,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_REPEATS)]
    pub repeats: usize,
    /// Measurement noise standard deviation, dB.
    #[arg(long, default_value_t = crate::dataset::DEFAULT_SIGMA_DB)]
    pub sigma: f64,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::probing::DEFAULT_SECTORS)]
    pub sectors: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// One of DT, SVR, KNN, XGB, GB, RF (case-insensitive).
    #[arg(long)]
    pub model: String,
    /// Kind-specific hyperparameters as a JSON object.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Directory of model JSON files.
    #[arg(long)]
    pub models: PathBuf,
    /// Report JSON; the text table goes to the same path with `.txt`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CompareArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// True user angle in degrees.
    #[arg(long, default_value_t = 52.0, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long, default_value = "0:90:0.5")]
    pub grid: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReproArgs {
    /// Not recorded in the manifest; replay uses the manifest's directory.
    #[arg(long)]
    #[serde(skip)]
    pub workdir: PathBuf,
    #[arg(long, default_value_t = crate::dataset::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Model(_) => EXIT_MODEL,
        Error::Io { .. } => EXIT_IO,
        Error::InvalidConfig { .. }
        | Error::Domain(_)
        | Error::InvalidInput(_)
        | Error::Parse { .. }
        | Error::Json { .. } => EXIT_INPUT,
    }
}

pub fn run(command: &Command) -> crate::Result<()> {
    commands::run(command)
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
