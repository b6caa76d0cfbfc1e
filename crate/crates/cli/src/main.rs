//! `dgcl`: frame generation, StRIP verification, compressed-learning sweeps
//! and Fisher discriminant fits from the command line.
//!
//! Exit codes: 0 success, 1 verification failed, 2 usage or input error,
//! 3 internal error.

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "dgcl",
    version,
    about = "Delsarte-Goethals frames and compressed learning"
)]
struct Cli {
    /// Worker threads; outputs do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print timing to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build G(m, r) and write it as a frame file.
    GenFrame(GenFrameArgs),
    /// Check the StRIP-ability rules on a frame file.
    Verify(VerifyArgs),
    /// Monte Carlo estimate of the StRIP failure rate.
    Estimate(EstimateArgs),
    /// Count sparse vectors that are not the unique sparse preimage of their measurement.
    Uniqueness(UniquenessArgs),
    /// Run a compressed-learning sweep from a JSON config.
    Experiment(ExperimentArgs),
    /// Fit PCA + Fisher discriminant on a labeled CSV.
    Fld(FldArgs),
    /// Closed-form bound calculators.
    #[command(subcommand)]
    Bounds(BoundsCommand),
}

#[derive(Args, serde::Serialize)]
pub struct GenFrameArgs {
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Write the header only.
    #[arg(long)]
    pub no_materialize: bool,
    /// Also write the normalized entries as `row,col,re,im`.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, serde::Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Seed for sampled closure pairs on large frames.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4096)]
    pub exhaustive_limit: u64,
    #[arg(long, default_value_t = 100_000)]
    pub sampled_pairs: u64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
pub struct UniquenessArgs {
    #[arg(long)]
    pub frame: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Refuse runs enumerating more supports per trial than this.
    #[arg(long, default_value_t = 10_000_000)]
    pub ceiling: u128,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args, serde::Serialize)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to the config's `output` field.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Overrides the config's seed list, e.g. `--seeds 1,2,3`.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Write per-m mean accuracy and hinge tables for plotting.
    #[arg(long)]
    pub emit_plot_data: bool,
}

#[derive(Args, serde::Serialize)]
pub struct FldArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "label")]
    pub label_column: String,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Subcommand, serde::Serialize)]
#[serde(tag = "bound", rename_all = "kebab-case")]
pub enum BoundsCommand {
    /// Failure probability and row count for a StRIP-able matrix.
    Strip {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        epsilon: f64,
        /// Row count used in the failure probability.
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        eta: f64,
        /// Column count.
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Rows needed for compressed learning with a G(o, r) sensing matrix.
    DgLearning {
        #[arg(long)]
        o: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        epsilon1: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
}

#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Usage(String),
    Internal(String),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Self::Internal(msg.into())
    }

    fn code(&self) -> u8 {
        match self {
            Self::Verification(_) => 1,
            Self::Usage(_) => 2,
            Self::Internal(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Verification(m) => write!(f, "verification failed: {m}"),
            Self::Usage(m) => write!(f, "error: {m}"),
            Self::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<dgcl::Error> for Failure {
    fn from(e: dgcl::Error) -> Self {
        match e {
            dgcl::Error::Io(_) => Self::Internal(e.to_string()),
            other => Self::Usage(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::internal(e.to_string()))?;
    }
    let start = std::time::Instant::now();
    let result = match cli.command {
        Command::GenFrame(a) => commands::gen_frame(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Uniqueness(a) => commands::uniqueness(&a),
        Command::Experiment(a) => commands::experiment(&a),
        Command::Fld(a) => commands::fld(&a),
        Command::Bounds(b) => commands::bounds(&b),
    };
    if cli.verbose {
        eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    }
    result
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
