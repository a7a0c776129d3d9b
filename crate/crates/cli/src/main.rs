mod commands;
mod output;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  an invariant check failed (verify) or an internal consistency check tripped
  2  invalid input: unreadable or malformed scenario, bad flag values
  3  the pre- and post-selection are orthogonal for this setup";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Orthogonal(String),
    #[error("{0}")]
    Invariant(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Input(_) => 2,
            CliError::Orthogonal(_) => 3,
        }
    }
}

impl From<weakshift_core::Error> for CliError {
    fn from(e: weakshift_core::Error) -> Self {
        use weakshift_core::Error;
        match e {
            Error::OrthogonalSelection { .. } => CliError::Orthogonal(e.to_string()),
            Error::Inconsistent(_) => CliError::Invariant(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "weakshift", version, about = "Weak-measurement pointer shifts with a Gaussian meter", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SpacingArg {
    Lin,
    Log,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ObjectiveArg {
    Max,
    Min,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ObservableArg {
    /// Projector onto the first basis state.
    Projector,
    Identity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    Schwarz,
    Bounds,
    Oracle,
    Hardy,
    Info,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Pointer shifts for one scenario file: exact, first and second order,
    /// and the quadrature oracle when the file has a pointer_grid.
    #[command(after_help = EXIT_CODES)]
    Run { scenario: PathBuf },

    /// Inferred occupation probabilities of Hardy's setup against coupling
    /// strength, as CSV.
    #[command(after_help = EXIT_CODES)]
    HardySweep {
        #[arg(long, default_value_t = 1e-3)]
        g_min: f64,
        #[arg(long, default_value_t = 10.0)]
        g_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = SpacingArg::Log)]
        spacing: SpacingArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Which-path information gain and the smallest available mean shift
    /// against coupling strength, as CSV.
    #[command(after_help = EXIT_CODES)]
    InfoSweep {
        #[arg(long, default_value_t = 0.0)]
        g_min: f64,
        #[arg(long, default_value_t = 10.0)]
        g_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = SpacingArg::Lin)]
        spacing: SpacingArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Multistart search for the extreme mean position shift over pure
    /// pre/post selections.
    #[command(after_help = EXIT_CODES)]
    BoundsOptimize {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        g: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Both)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = weakshift_core::bounds::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ObservableArg::Projector)]
        observable: ObservableArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Runs invariant suites; exits 1 and prints a replayable instance for
    /// every failed check.
    #[command(after_help = EXIT_CODES)]
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = weakshift_core::verify::DEFAULT_SEED)]
        seed: u64,
        /// Reduced instance counts.
        #[arg(long)]
        quick: bool,
        /// Write each failing instance as a scenario file into this directory.
        #[arg(long)]
        replay_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario } => commands::run(&scenario),
        Command::HardySweep {
            g_min,
            g_max,
            points,
            delta,
            spacing,
            out,
        } => commands::hardy_sweep(g_min, g_max, points, delta, spacing, out.as_deref()),
        Command::InfoSweep {
            g_min,
            g_max,
            points,
            delta,
            spacing,
            out,
        } => commands::info_sweep(g_min, g_max, points, delta, spacing, out.as_deref()),
        Command::BoundsOptimize {
            dim,
            g,
            delta,
            objective,
            restarts,
            seed,
            observable,
            out,
        } => commands::bounds_optimize(dim, g, delta, objective, restarts, seed, observable, out.as_deref()),
        Command::Verify {
            suite,
            seed,
            quick,
            replay_dir,
        } => commands::verify(suite, seed, quick, replay_dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
