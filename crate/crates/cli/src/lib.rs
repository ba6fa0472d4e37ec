//! The `relrate` command-line tool.
//!
//! Subcommands: `epsn` prints a backoff level, `rate` selects a rate from a
//! sample file, `sweep` and `mismatch` write CSV tables from TOML configs
//! (see `configs/SCHEMA.md`). Exit codes: 0 success, 2 usage or config,
//! 3 no solution or insufficient data, 4 I/O or parse.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use relrate_core::rateselect::{epsn_powerlaw, epsn_rayleigh_ar, epsn_rayleigh_pcr};
use relrate_core::{select_rate, Constraint, TailMode, TrainingSample};

pub mod config;
mod tables;

pub use config::{ChannelName, ConstraintName, MismatchConfig, SelectorName, SweepConfig};
pub use tables::{mismatch_csv, sweep_csv, MISMATCH_HEADER, SWEEP_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {}", .0.display(), .1)]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Core(#[from] relrate_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use relrate_core::Error as E;
        match self {
            Self::Usage(_) | Self::Config(_) => 2,
            Self::Io(..) => 4,
            Self::Core(e) => match e {
                E::Domain { .. } | E::Unsupported(_) => 2,
                E::Parse { .. } | E::Io(_) => 4,
                _ => 3,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "relrate",
    version,
    about = "Rate selection under statistical reliability constraints"
)]
pub struct Cli {
    /// More diagnostics on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the backoff level eps_n.
    Epsn(EpsnArgs),
    /// Select a rate from a file of power measurements.
    Rate(RateArgs),
    /// Run a Monte Carlo sweep and write CSV.
    Sweep(RunArgs),
    /// Tabulate outage and meta-probability under model mismatch.
    Mismatch(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Rayleigh,
    PowerlawAsym,
    PowerlawNonasym,
}

#[derive(Debug, Args)]
struct TargetArgs {
    #[arg(long, value_enum)]
    constraint: ConstraintName,
    /// Outage target.
    #[arg(long)]
    eps: f64,
    /// Meta-probability target (pcr only).
    #[arg(long)]
    xi: Option<f64>,
}

impl TargetArgs {
    fn target(&self) -> Result<relrate_core::ReliabilityTarget, CliError> {
        if self.constraint == ConstraintName::Pcr && self.xi.is_none() {
            return Err(CliError::Usage("--constraint pcr requires --xi".into()));
        }
        if self.constraint == ConstraintName::Ar && self.xi.is_some() {
            return Err(CliError::Usage("--xi only applies to --constraint pcr".into()));
        }
        config::target(self.constraint, self.eps, self.xi)
    }
}

#[derive(Debug, Args)]
struct EpsnArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[command(flatten)]
    target: TargetArgs,
    /// Training sample size.
    #[arg(long)]
    n: usize,
    /// Tail fraction for the power-law families.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
}

#[derive(Debug, Args)]
struct RateArgs {
    #[arg(long, value_enum)]
    selector: SelectorName,
    #[command(flatten)]
    target: TargetArgs,
    /// Tail fraction for the power-law selectors.
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    /// One received-power measurement per line.
    #[arg(long)]
    sample: PathBuf,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML config file.
    config: PathBuf,
    /// Overrides the config's `output`; `-` for stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Overrides the config's `workers`.
    #[arg(long)]
    workers: Option<usize>,
}

/// Formats a value with 12 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();

    let stdout = std::io::stdout();
    match execute(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("relrate: error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let stdout_err = |e| CliError::Io(PathBuf::from("<stdout>"), e);
    match command {
        Command::Epsn(a) => {
            let target = a.target.target()?;
            let eps_n = match (a.family, target.constraint) {
                (Family::Rayleigh, Constraint::Averaged) => epsn_rayleigh_ar(target.epsilon, a.n)?,
                (Family::Rayleigh, Constraint::ProbablyCorrect { xi }) => epsn_rayleigh_pcr(target.epsilon, xi, a.n)?,
                (Family::PowerlawAsym, _) => epsn_powerlaw(&target, a.n, a.beta, TailMode::Asymptotic)?,
                (Family::PowerlawNonasym, _) => epsn_powerlaw(&target, a.n, a.beta, TailMode::NonAsymptotic)?,
            };
            writeln!(out, "{}", sci(eps_n)).map_err(stdout_err)
        }
        Command::Rate(a) => {
            let target = a.target.target()?;
            let spec = a.selector.spec(Some(a.beta))?;
            let sample = TrainingSample::from_path(&a.sample).map_err(|e| match e {
                relrate_core::Error::Io(io) => CliError::Io(a.sample.clone(), io),
                other => other.into(),
            })?;
            let rate = select_rate(spec, &target, &sample)?;
            if rate == 0.0 {
                eprintln!(
                    "note: zero rate; n = {} is too small for {} at this target",
                    sample.len(),
                    spec.name()
                );
            }
            writeln!(out, "{}", sci(rate)).map_err(stdout_err)
        }
        Command::Sweep(a) => {
            let config = SweepConfig::load(&a.config)?;
            let workers = check_workers(a.workers.or(config.workers))?;
            let bytes = sweep_csv(&config, workers)?;
            emit(&bytes, a.output.or(config.output), out)
        }
        Command::Mismatch(a) => {
            let config = MismatchConfig::load(&a.config)?;
            let workers = check_workers(a.workers.or(config.workers))?;
            let bytes = mismatch_csv(&config, workers)?;
            emit(&bytes, a.output.or(config.output), out)
        }
    }
}

fn check_workers(w: Option<usize>) -> Result<Option<usize>, CliError> {
    match w {
        Some(0) => Err(CliError::Usage("workers must be at least 1".into())),
        w => Ok(w),
    }
}

fn emit(bytes: &[u8], path: Option<PathBuf>, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(&p, bytes).map_err(|e| CliError::Io(p, e)),
        _ => out
            .write_all(bytes)
            .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e)),
    }
}
