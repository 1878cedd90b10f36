mod codespec;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const OUT_DIR_ENV: &str = "SUBSYS_OUT_DIR";

const CONFIG_HELP: &str = "\
Config file grammar (--config FILE):
  # or ; starts a comment line; ' #' starts an inline comment
  key = value        long flag name without dashes; value may be \"quoted\"
  [section]          following keys apply to that subcommand
Keys before the first section (or under [global]) are global flags.
Switches take true or false. Flags on the command line override the file.

Exit codes: 0 ok, 1 usage error, 2 verification failure, 3 runtime error.";

#[derive(Parser, Debug, Serialize)]
#[command(name = "subsys", version, about = "Build, verify and simulate BBS, SHP and HGP subsystem codes")]
#[command(after_help = CONFIG_HELP, args_override_self = true)]
pub struct Cli {
    /// Worker threads for Monte Carlo engines (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Directory for every output file.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out_dir: PathBuf,

    /// Read defaults from a sectioned key = value file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Construct a code and write its manifest.
    Build(BuildArgs),
    /// Run a phenomenological or circuit-level Monte Carlo sweep.
    Simulate(SimulateArgs),
    /// Check a manifest, or the gauge-fixing relation of a pair of checks.
    Verify(VerifyArgs),
    /// Pick the best of a random (b,c)-biregular ensemble under BSC + BP.
    SelectCode(SelectArgs),
    /// Fit P_L = A p^D to a CSV written by `simulate`.
    Fit(FitArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Bbs,
    Shp,
    Hgp,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct BuildArgs {
    pub kind: CodeKind,
    /// Classical code used for both factors (hamming7, repN, ldpc:N,B,C,SEED or an alist path).
    #[arg(long, conflicts_with_all = ["h1", "h2"])]
    pub code: Option<String>,
    /// First classical code (C1 for BBS, H1 for products).
    #[arg(long, requires = "h2")]
    pub h1: Option<String>,
    /// Second classical code.
    #[arg(long, requires = "h1")]
    pub h2: Option<String>,
    /// BBS only: search for a Q with fewer qubits instead of Q = I.
    #[arg(long, conflicts_with = "q")]
    pub minimize_q: bool,
    /// BBS only: explicit Q as comma-separated rows, e.g. 0010,0101,1000,0100.
    #[arg(long)]
    pub q: Option<String>,
    /// Random restarts of the Q search.
    #[arg(long, default_value_t = 40)]
    pub q_attempts: usize,
    /// Seed of the Q search.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Brute-force distance budget: give up beyond 2^cap candidate supports.
    #[arg(long, default_value_t = 24)]
    pub distance_cap: u32,
    /// Fail when the distance cannot be computed within the budget.
    #[arg(long)]
    pub require_distance: bool,
    /// Output file stem (default: the code id, e.g. bbs-21-4).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    Pheno,
    Circuit,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorArg {
    Direct,
    Importance,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceArg {
    /// 1 - (1 - p)^K: K unencoded qubits
    Unencoded,
    /// p
    Physical,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    pub mode: SimMode,
    /// Code manifest written by `build`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated physical error rates.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["p_min", "p_max"])]
    pub grid: Option<Vec<f64>>,
    /// Lowest rate of a log-spaced grid.
    #[arg(long, requires = "p_max")]
    pub p_min: Option<f64>,
    /// Highest rate of a log-spaced grid.
    #[arg(long, requires = "p_min")]
    pub p_max: Option<f64>,
    /// Points of the log-spaced grid.
    #[arg(long, default_value_t = 6)]
    pub points: usize,
    /// Trials per grid point (the cap when --target-failures is set).
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Pheno only: stop a point early once this many block failures are seen.
    #[arg(long)]
    pub target_failures: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pheno only: measurement error rate; defaults to p.
    #[arg(long)]
    pub p_meas: Option<f64>,
    /// Pheno only.
    #[arg(long, value_enum, default_value = "direct")]
    pub estimator: EstimatorArg,
    /// Importance sampling: largest number of faults sampled.
    #[arg(long, default_value_t = 8)]
    pub weight_max: usize,
    /// Importance sampling: configurations per fault count.
    #[arg(long, default_value_t = 10_000)]
    pub samples_per_weight: u64,
    /// Importance sampling: rate the decoder priors assume (default: grid midpoint).
    #[arg(long)]
    pub prior: Option<f64>,
    /// Circuit only: block pseudothreshold reference curve.
    #[arg(long, value_enum, default_value = "unencoded")]
    pub reference: ReferenceArg,
    /// Output file stem (default: manifest stem plus mode).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    /// Code manifest to check.
    #[arg(long, conflicts_with_all = ["h1", "h2"], required_unless_present = "h1")]
    pub manifest: Option<PathBuf>,
    /// First check matrix of a gauge-fixing check (code spec or alist path).
    #[arg(long, requires = "h2")]
    pub h1: Option<String>,
    #[arg(long, requires = "h1")]
    pub h2: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct SelectArgs {
    /// Code length.
    #[arg(long)]
    pub n: usize,
    /// Variable degree.
    #[arg(long)]
    pub b: usize,
    /// Check degree.
    #[arg(long)]
    pub c: usize,
    /// Candidate graphs.
    #[arg(long, default_value_t = 50)]
    pub graphs: usize,
    /// BSC flip rate used for ranking.
    #[arg(long, default_value_t = subsys::classical::DEFAULT_SELECTION_P)]
    pub channel_p: f64,
    /// BSC trials per candidate.
    #[arg(long, default_value_t = subsys::classical::DEFAULT_SELECTION_TRIALS)]
    pub bsc_trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file stem (default: ldpc-N-B-C).
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[command(args_override_self = true)]
pub struct FitArgs {
    /// CSV written by `simulate`.
    #[arg(long)]
    pub csv: PathBuf,
    /// Fit one logical qubit instead of the block rate.
    #[arg(long)]
    pub qubit: Option<usize>,
    #[arg(long)]
    pub p_min: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
}

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Verification(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<subsys::Error> for Failure {
    fn from(e: subsys::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn parse_args(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let first = Cli::try_parse_from(&argv)?;
    let Some(path) = first.config.clone() else {
        return Ok(first);
    };
    let mut cmd = Cli::command();
    let fail = |msg: String| cmd.clone().error(clap::error::ErrorKind::InvalidValue, msg);
    let text = std::fs::read_to_string(&path).map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
    let cfg = config::ConfigFile::parse(&text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let sub = first.command.name();
    let spliced = cfg.splice(&argv, &cmd, sub).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    cmd.build();
    Cli::try_parse_from(spliced)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
            Command::SelectCode(_) => "select-code",
            Command::Fit(_) => "fit",
        }
    }
}

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
