mod automaton;
mod experiment;
mod simulate;
mod sources;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cdam_core::CdamError;

/// Correlated dense associative memory simulator.
#[derive(Parser)]
#[command(name = "cdam", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one triggered simulation; writes trace.csv and manifest.json.
    Simulate(simulate::SimulateArgs),
    /// Re-run a simulation from its manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce a named experiment and write its report directory.
    Experiment(experiment::ExperimentArgs),
    /// Question answering over an automaton, scripted or interactive.
    Automaton(automaton::AutomatonArgs),
}

/// Dynamics parameters shared by every command.
#[derive(Args, Clone, Debug)]
pub struct ModelFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Maximum number of updates.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Stop once no neuron moves by more than this in one update.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Amplitude of the uniform trigger noise.
    #[arg(long = "noise-c", default_value_t = 1.0)]
    pub noise_c: f64,
}

/// Errors mapped onto the exit-code contract.
pub enum Failure {
    Usage(String),
    Core(CdamError),
}

impl From<CdamError> for Failure {
    fn from(e: CdamError) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                CdamError::NumericDivergence { .. }
                | CdamError::EnergyUndefined(_)
                | CdamError::UndefinedCorrelation(_) => 3,
                CdamError::Io(_) | CdamError::Json(_) | CdamError::Csv(_) => 1,
                _ => 2,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

pub type CliResult<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate::run(&args),
        Command::Replay { manifest, out } => simulate::replay(&manifest, &out),
        Command::Experiment(args) => experiment::run(&args),
        Command::Automaton(args) => automaton::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
