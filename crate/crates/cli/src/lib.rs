//! Command-line pipeline: synthesize data, fit a symbolic model, predict,
//! analyze and sweep response curves. Every command writes into `--out`
//! and echoes its resolved configuration there.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub mod artifact;
pub mod commands;
pub mod config;

pub use artifact::{Manifest, ModelArtifact};
pub use config::{Overrides, RunConfig};

/// Written into the output directory when a command fails.
pub const FAILED_MARKER: &str = "_FAILED";
pub const CONFIG_ECHO: &str = "resolved_config.toml";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<blersr::data::DataError> for CliError {
    fn from(e: blersr::data::DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<blersr::gp::GpError> for CliError {
    fn from(e: blersr::gp::GpError) -> Self {
        match e {
            blersr::gp::GpError::Config(m) => CliError::Config(m),
            blersr::gp::GpError::EmptyDataset | blersr::gp::GpError::Schema(_) => {
                CliError::Data(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<blersr::analysis::AnalysisError> for CliError {
    fn from(e: blersr::analysis::AnalysisError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<blersr::expr::ExprError> for CliError {
    fn from(e: blersr::expr::ExprError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<blersr::synth::SynthError> for CliError {
    fn from(e: blersr::synth::SynthError) -> Self {
        CliError::Config(e.to_string())
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

#[derive(Debug, Parser)]
#[command(name = "blersr", version, about = "Symbolic-regression BLER modelling")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Bundled search profile.
    #[arg(long, global = true, value_parser = ["small", "paper"])]
    pub profile: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset from the oracle.
    Synth,
    /// Evolve a model on a dataset and write the artifact.
    Fit {
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Append Y_pred and BLER_pred columns to a CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Defaults to `<out>/predictions.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Metrics, residuals, sensitivities and feature frequencies on a CSV.
    Analyze {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Evaluate the configured curve sweeps.
    Curves {
        /// Model directory, or `oracle`.
        #[arg(long)]
        model: Option<String>,
    },
    /// Feature-frequency table of an expression (the bundled listing by default).
    Freq {
        #[arg(long)]
        expr: Option<PathBuf>,
        /// Model directory whose schema names the variables.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        profile: cli.profile.clone(),
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cli.out.display())))?;
    let _ = std::fs::remove_file(cli.out.join(FAILED_MARKER));
    write_file(&cli.out.join(CONFIG_ECHO), &cfg.to_toml())?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Synth => commands::synth(&cfg, out).map(|_| ()),
        Command::Fit { data } => commands::fit(&cfg, data.as_deref(), out).map(|_| ()),
        Command::Predict {
            model,
            input,
            output,
        } => {
            let output = output
                .clone()
                .unwrap_or_else(|| out.join("predictions.csv"));
            commands::predict(&cfg, model, input, &output).map(|_| ())
        }
        Command::Analyze { model, data } => {
            commands::analyze(&cfg, model.as_deref(), data.as_deref(), out).map(|_| ())
        }
        Command::Curves { model } => commands::curves(&cfg, model.as_deref(), out).map(|_| ()),
        Command::Freq { expr, model } => {
            commands::freq(expr.as_deref(), model.as_deref(), out).map(|_| ())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if cli.out.is_dir() {
                let _ = std::fs::write(cli.out.join(FAILED_MARKER), format!("{e}\n"));
            }
            e.exit_code()
        }
    }
}
