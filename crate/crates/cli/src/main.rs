//! `chaobell` command-line front end.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or validation error,
//! 3 acceptance threshold not met.

mod angles;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chaobell::CountMode;
use output::Format;

#[derive(Parser, Debug)]
#[command(name = "chaobell", version, about = "Chaotic-light Bell correlation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized correlation against angle difference, with the closed form alongside.
    Sweep(commands::SweepArgs),
    /// CHSH value from four analyzer settings.
    Chsh(commands::ChshArgs),
    /// Sampled count distribution against the Bose-Einstein law.
    DistCheck(commands::DistCheckArgs),
    /// Bell and CHSH inequalities on ±1 datasets, in exact arithmetic.
    BellDatasets(commands::BellDatasetsArgs),
    /// Two ideal polarizers in both orders.
    DemoNoncommute(commands::DemoArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Mean counts per observation window of each polarization component.
    #[arg(long, default_value_t = 1.0)]
    pub mean_intensity: f64,
    /// 64-bit seed, or `random` to draw one from the OS.
    #[arg(long, default_value = "42")]
    pub seed: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Poisson)]
    pub mode: ModeArg,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Intensity,
    Poisson,
    Matched,
}

impl From<ModeArg> for CountMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Intensity => CountMode::IntensityOnly,
            ModeArg::Poisson => CountMode::IndependentPoisson,
            ModeArg::Matched => CountMode::MatchedPairs,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
    Threshold(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Threshold(_) => 3,
        }
    }
}

impl From<chaobell::Error> for CliError {
    fn from(e: chaobell::Error) -> Self {
        // every core error reachable from here traces back to an argument
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Sweep(a) => commands::sweep(&a),
        Command::Chsh(a) => commands::chsh(&a),
        Command::DistCheck(a) => commands::dist_check(&a),
        Command::BellDatasets(a) => commands::bell_datasets(&a),
        Command::DemoNoncommute(a) => commands::demo_noncommute(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("chaobell: {m}"),
                CliError::Internal(m) => eprintln!("internal error: {m}"),
                CliError::Threshold(m) => eprintln!("threshold not met: {m}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
