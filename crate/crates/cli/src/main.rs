mod batch;
mod config;
mod error;
mod estimate;
mod inspect;
mod ladder;
mod sample;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sample games, measure agents on them and rank agents against each other.
#[derive(Parser, Debug)]
#[command(name = "ggb", version, about)]
struct Cli {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a batch of games and write `games.gdl` plus `meta.json`.
    Sample(SampleArgs),
    /// Measure one or more agents on a batch or with the doubling scheme.
    Estimate(EstimateArgs),
    /// Round-robin matches on two-player games with Elo ratings.
    Ladder(LadderArgs),
    /// Show a game, play it by hand, record or replay a trajectory.
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Number of games.
    #[arg(short, long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// keep-all, drop-impossible, drop-non-playable or learnable.
    #[arg(long)]
    pub filter: Option<String>,
    /// Only games with this many players (1 or 2).
    #[arg(long)]
    pub players: Option<u8>,
    /// length (games follow 2^-l) or complexity (games follow 2^-K).
    #[arg(long)]
    pub prior: Option<String>,
    /// Random rollouts used to measure tau.
    #[arg(long)]
    pub tau_rollouts: Option<u32>,
    /// Output directory.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Agent spec; repeat to evaluate several agents on the same games.
    #[arg(short, long = "agent")]
    pub agents: Vec<String>,
    /// Batch directory from `sample`, or a `.gdl` file.
    #[arg(short, long)]
    pub batch: Option<PathBuf>,
    /// Budget per game when evaluating a batch.
    #[arg(short = 'T', long = "budget")]
    pub budget: Option<u64>,
    /// Run the doubling scheme for iterations 0..=ITERS instead of a batch.
    #[arg(long)]
    pub iters: Option<u32>,
    /// Smallest budget of the doubling scheme.
    #[arg(long)]
    pub t0: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// plain or weighted; defaults to what the batch prior calls for.
    #[arg(long)]
    pub mode: Option<String>,
    /// Filter for games drawn by the doubling scheme.
    #[arg(long)]
    pub filter: Option<String>,
    /// Player count for games drawn by the doubling scheme.
    #[arg(long)]
    pub players: Option<u8>,
    /// Report paired per-game differences between consecutive agents.
    #[arg(long)]
    pub paired: bool,
    /// Worker threads.
    #[arg(short, long)]
    pub jobs: Option<usize>,
    /// Run log path (newline-delimited JSON).
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Wall-clock ceiling per external decision, in milliseconds.
    #[arg(long)]
    pub ceiling_ms: Option<u64>,
}

#[derive(Args, Debug)]
pub struct LadderArgs {
    /// Agent spec; at least two.
    #[arg(short, long = "agent")]
    pub agents: Vec<String>,
    /// Batch directory or `.gdl` file; one-player games are skipped.
    #[arg(short, long)]
    pub batch: Option<PathBuf>,
    #[arg(long)]
    pub rounds: Option<u32>,
    #[arg(short = 'T', long = "budget")]
    pub budget: Option<u64>,
    #[arg(long)]
    pub k_factor: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub ceiling_ms: Option<u64>,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    /// A `.gdl` file or batch directory.
    pub game: PathBuf,
    /// Which game of the file.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// Play player one from stdin: w a s d to move, x to stay, `p X Y` to place, q to quit.
    #[arg(long, conflicts_with_all = ["replay", "trace"])]
    pub play: bool,
    /// Re-execute a trajectory log and check its rewards.
    #[arg(long, conflicts_with = "trace")]
    pub replay: Option<PathBuf>,
    /// Record one random-play episode as a trajectory log.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Engine seed for `--play` and `--trace`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Sample(a) => sample::run(a, &cfg),
        Command::Estimate(a) => estimate::run(a, &cfg),
        Command::Ladder(a) => ladder::run(a, &cfg),
        Command::Inspect(a) => inspect::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ggb: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
