//! `qubitflip`: calibration, optimization, design checks and game transcripts.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 I/O error, 4 no solution.

mod commands;
mod moves;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qubitflip::calib::{Averaging, Convention, GridScale};
use qubitflip::optim::Player;
use qubitflip::strategy::PauliTable;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    NoSolution(String),
    #[error(transparent)]
    Core(#[from] qubitflip::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::NoSolution(_) => 4,
            CliError::Core(qubitflip::Error::NoRoot { .. }) => 4,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qubitflip", version, about = "Qubit-flip game on Heisenberg spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableArg {
    Printed,
    Corrected,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AveragingArg {
    Independent,
    Correlated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlayerArg {
    Alice,
    Bob,
}

impl From<PlayerArg> for Player {
    fn from(p: PlayerArg) -> Self {
        match p {
            PlayerArg::Alice => Player::Alice,
            PlayerArg::Bob => Player::Bob,
        }
    }
}

/// How the Pauli strategy is compiled and how Alice's draws are combined.
#[derive(Debug, Args)]
struct ConventionArgs {
    /// Angle table used to compile the Pauli strategy into pulses.
    #[arg(long, value_enum, default_value = "printed")]
    table: TableArg,
    /// Whether Alice draws her two Pauli moves independently.
    #[arg(long, value_enum, default_value = "independent")]
    averaging: AveragingArg,
}

impl ConventionArgs {
    fn convention(&self) -> Convention {
        Convention {
            table: match self.table {
                TableArg::Printed => PauliTable::Printed,
                TableArg::Corrected => PauliTable::Corrected,
            },
            averaging: match self.averaging {
                AveragingArg::Independent => Averaging::Independent,
                AveragingArg::Correlated => Averaging::Correlated,
            },
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a strategy set is a unitary 1-design.
    DesignCheck {
        /// `pauli`, `printed`, `corrected`, or `haar:<samples>`.
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bob's mean payoff over a grid of couplings, written as CSV.
    ScanJ {
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "linear")]
        scale: ScaleArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "T", default_value_t = 1.0)]
        move_time: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        convention: ConventionArgs,
    },
    /// Smallest coupling at which Bob's Pauli-vs-Pauli mean payoff is 1/2.
    FindFairJ {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "T", default_value_t = 1.0)]
        move_time: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = qubitflip::calib::COARSE_START)]
        lower: f64,
        #[arg(long, default_value_t = qubitflip::calib::DEFAULT_SEARCH_UPPER)]
        upper: f64,
        #[command(flatten)]
        convention: ConventionArgs,
    },
    /// Maximize one player's payoff against the Pauli strategy.
    Optimize {
        #[arg(long, value_enum)]
        player: PlayerArg,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Coupling; defaults to the calibrated two-spin fair value.
        #[arg(long = "J")]
        coupling: Option<f64>,
        #[arg(long = "T", default_value_t = 1.0)]
        move_time: f64,
        /// Pulses per move.
        #[arg(long = "N", default_value_t = 3)]
        pulses: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path for the result JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bob's best payoff for several chain lengths.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
        lengths: Vec<usize>,
        #[arg(long = "J")]
        coupling: Option<f64>,
        #[arg(long = "T", default_value_t = 1.0)]
        move_time: f64,
        #[arg(long = "N", default_value_t = 3)]
        pulses: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play the game and print a transcript.
    Play {
        #[command(subcommand)]
        mode: PlayMode,
    },
}

#[derive(Debug, Subcommand)]
enum PlayMode {
    /// Hadamard trick against a classical opponent.
    DemoMeyer,
    /// Ideal unitaries on a single qubit.
    Single {
        /// `pauli`, `haar`, `identity`, `hadamard`, `flip` or `euler:<phi>,<psi>,<theta>`.
        #[arg(long, default_value = "pauli")]
        alice: String,
        /// Alice's second move; same as `--alice` when omitted.
        #[arg(long)]
        alice2: Option<String>,
        #[arg(long, default_value = "pauli")]
        bob: String,
        /// `exhaustive` or a Monte Carlo sample count.
        #[arg(long, default_value = "exhaustive")]
        samples: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Pulse-controlled moves on a chain.
    Chain {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long = "J")]
        coupling: Option<f64>,
        #[arg(long = "T", default_value_t = 1.0)]
        move_time: f64,
        /// Optimization result JSON whose controls are replayed against the Pauli opponent.
        #[arg(long)]
        controls: Option<PathBuf>,
        #[command(flatten)]
        convention: ConventionArgs,
    },
}

fn grid_scale(s: ScaleArg) -> GridScale {
    match s {
        ScaleArg::Linear => GridScale::Linear,
        ScaleArg::Log => GridScale::Log,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::DesignCheck { set, tol, seed } => commands::design_check(&set, tol, seed),
        Command::ScanJ {
            min,
            max,
            steps,
            scale,
            n,
            move_time,
            out,
            convention,
        } => commands::scan_j(
            min,
            max,
            steps,
            grid_scale(scale),
            n,
            move_time,
            out.as_deref(),
            convention.convention(),
        ),
        Command::FindFairJ {
            n,
            move_time,
            tol,
            lower,
            upper,
            convention,
        } => commands::find_fair_j(n, move_time, tol, lower, upper, convention.convention()),
        Command::Optimize {
            player,
            n,
            coupling,
            move_time,
            pulses,
            restarts,
            seed,
            out,
        } => commands::optimize(player.into(), n, coupling, move_time, pulses, restarts, seed, out.as_deref()),
        Command::Sweep {
            lengths,
            coupling,
            move_time,
            pulses,
            restarts,
            seed,
        } => commands::sweep(&lengths, coupling, move_time, pulses, restarts, seed),
        Command::Play { mode } => match mode {
            PlayMode::DemoMeyer => commands::play_demo(),
            PlayMode::Single {
                alice,
                alice2,
                bob,
                samples,
                seed,
            } => commands::play_single(&alice, alice2.as_deref(), &bob, &samples, seed),
            PlayMode::Chain {
                n,
                coupling,
                move_time,
                controls,
                convention,
            } => commands::play_chain(n, coupling, move_time, controls.as_deref(), convention.convention()),
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
