use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, CommandFactory, Parser, Subcommand, ValueEnum};
use odd_core::verify::Suite;
use odd_core::Error;
use serde::Serialize;

mod commands;
mod config;

/// Off-diagonal decay matrix toolkit.
#[derive(Parser, Debug)]
#[command(name = "odd", version)]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "ODD_THREADS")]
    threads: Option<usize>,

    /// `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a decay matrix and write it as JSON.
    Gen(GenArgs),
    /// Evaluate norms of a matrix.
    Norm(NormArgs),
    /// Besov norm with its dyadic sequence.
    Besov(BesovArgs),
    /// Banded approximation errors and approximation-space norms.
    Approx(ApproxArgs),
    /// Bessel potential norm, embedding chain and hypersingular evaluator.
    Bessel(BesselArgs),
    /// Diagonal envelope and fitted decay exponent.
    Profile(ProfileArgs),
    /// Property suites over a seeded corpus.
    Verify(VerifyArgs),
    /// Spectral-invariance experiment.
    Report(ReportArgs),
}

#[derive(clap::Args, Debug, Serialize)]
pub struct GenArgs {
    /// det, phase or mag.
    #[arg(long, default_value = "det")]
    pub model: String,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Half-width of the index window.
    #[arg(long = "W", alias = "half-width", default_value_t = 64)]
    pub half_width: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Matrix file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct InputArgs {
    /// Matrix JSON, or dense CSV when the name ends in `.csv`.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Window half-width for dense CSV input.
    #[arg(long = "csv-W")]
    pub csv_half_width: Option<usize>,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct NormArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Base, Besov (`besov:...`) or approximation-space (`approx:...`) spec. Repeatable.
    #[arg(long, required = true)]
    pub spec: Vec<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct BesovArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub spec: String,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "jaffard:r=0")]
    pub base: String,
    /// `approx:...` spec evaluated from the same errors. Repeatable.
    #[arg(long)]
    pub space: Vec<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct BesselArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value = "jaffard:r=0")]
    pub base: String,
    /// Also evaluate the Besov embedding chain and, for 0 < r < 2, the hypersingular norm.
    #[arg(long)]
    pub embedding: bool,
    /// Write the hypersingular multiplier table as CSV.
    #[arg(long)]
    pub multipliers: Option<PathBuf>,
    /// Epsilon levels of the multiplier table.
    #[arg(long, default_value_t = 12)]
    pub levels: u32,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// First fitted shell.
    #[arg(long)]
    pub lo: Option<usize>,
    /// Last fitted shell.
    #[arg(long)]
    pub hi: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// Suite name; repeat or comma-separate. All suites when absent.
    #[arg(long, value_delimiter = ',')]
    #[serde(serialize_with = "suite_names")]
    pub suite: Vec<Suite>,
    #[arg(long, default_value_t = 20)]
    pub seed: u64,
    /// Number of corpus matrices.
    #[arg(long, default_value_t = 100)]
    pub corpus: usize,
    #[arg(long = "W", alias = "half-width", default_value_t = 64)]
    pub half_width: usize,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// JSON report file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn suite_names<S: serde::Serializer>(v: &[Suite], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(Suite::name))
}

#[derive(clap::Args, Debug, Serialize)]
pub struct ReportArgs {
    #[arg(long, default_value = "det")]
    pub model: String,
    #[arg(long, default_value_t = 3.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Strictly increasing half-widths, each at least 16.
    #[arg(long = "W", alias = "half-width", value_delimiter = ',', default_value = "64,128,256")]
    pub half_widths: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Norm evaluated on B and its inverse. Repeatable; defaults to `jaffard:r=<r>` and `op`.
    #[arg(long)]
    pub norm: Vec<String>,
    /// Directory for report.json, report.csv and plot.csv.
    #[arg(long, default_value = "odd-report")]
    pub out_dir: PathBuf,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Process exit status for an error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_)
        | Error::InvalidParameter(_)
        | Error::NonSolidBase(_)
        | Error::UnsupportedDim(_)
        | Error::IndexOutOfRange { .. }
        | Error::WindowMismatch(_) => 2,
        Error::NonConvergence(_) => 3,
        _ => 1,
    }
}

/// `--config` path and subcommand name, found without a full parse so that
/// required flags may come from the config file.
fn scan(cmd: &clap::Command, raw: &[OsString]) -> (Option<PathBuf>, Option<String>) {
    let mut config = None;
    let mut sub = None;
    let mut it = raw.iter().skip(1).filter_map(|a| a.to_str());
    while let Some(a) = it.next() {
        if a == "--config" {
            config = it.next().map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
        } else if sub.is_none() && cmd.find_subcommand(a).is_some() {
            sub = Some(a.to_string());
        }
    }
    (config, sub)
}

fn parse_args(raw: Vec<OsString>) -> Result<Cli, ExitCode> {
    let clap_fail = |e: clap::Error| {
        let _ = e.print();
        ExitCode::from(if e.use_stderr() { 2 } else { 0 })
    };
    let cmd = Cli::command();
    let args = match scan(&cmd, &raw) {
        (Some(path), Some(sub)) => match config::read(&path).and_then(|e| config::merge(&cmd, &sub, &raw, &e)) {
            Ok(args) => args,
            Err(e) => {
                eprintln!("error: {e}");
                return Err(ExitCode::from(exit_code(&e)));
            }
        },
        _ => raw,
    };
    Cli::try_parse_from(args).map_err(clap_fail)
}

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args_os().collect()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialised: {e}");
        }
    }
    let threads = rayon::current_num_threads();
    let result = match &cli.command {
        Cmd::Gen(a) => commands::gen(a),
        Cmd::Norm(a) => commands::norm(a),
        Cmd::Besov(a) => commands::besov(a),
        Cmd::Approx(a) => commands::approx(a),
        Cmd::Bessel(a) => commands::bessel(a),
        Cmd::Profile(a) => commands::profile(a),
        Cmd::Verify(a) => commands::verify(a, threads),
        Cmd::Report(a) => commands::report(a, threads),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
