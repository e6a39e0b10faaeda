use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cogito_core::Family;
use tracing::Level;

mod commands;
mod config;

use config::EngineArgs;

#[derive(Debug, Parser)]
#[command(name = "cogito", version, about = "Reverse-order multi-agent code generation")]
struct Cli {
    /// More log output on stderr (repeat for debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve every task of a dataset and report pass@k
    Run(RunArgs),
    /// Solve one task of a dataset
    Solve(SolveArgs),
    /// Re-run a dataset against a recorded script
    Replay(ReplayArgs),
    /// Print region counts and a task's version chain
    InspectMemory(InspectArgs),
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// JSON Lines task file
    #[arg(long, value_name = "PATH")]
    pub dataset: PathBuf,
    #[arg(long, default_value = "basic")]
    pub family: Family,
    /// Skip malformed dataset lines instead of failing
    #[arg(long)]
    pub lenient: bool,
    /// Output directory for metrics, task results and memory
    #[arg(long, value_name = "DIR", default_value = "cogito-out")]
    pub out: PathBuf,
    /// Memory store to start from and write back to
    #[arg(long, value_name = "DIR")]
    pub store: Option<PathBuf>,
    /// Python file whose style is loaded into personalization memory
    #[arg(long, value_name = "PATH")]
    pub user_code: Option<PathBuf>,
    /// Exit 1 when any task does not pass
    #[arg(long)]
    pub strict: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// k values for pass@k
    #[arg(long = "k", value_name = "K", value_delimiter = ',', default_value = "1")]
    pub k: Vec<u32>,
    /// Worker threads, defaults to the CPU count
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long = "k", value_name = "K", value_delimiter = ',', default_value = "1")]
    pub k: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub task_id: String,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long, value_name = "DIR")]
    pub store: PathBuf,
    #[arg(long)]
    pub task_id: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => Level::WARN,
        1 => Level::INFO,
        _ => Level::DEBUG,
    };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();

    let outcome = match cli.command {
        Command::Run(args) => commands::run(args.data, &args.k, args.jobs, commands::Mode::Run),
        Command::Replay(args) => commands::run(args.data, &args.k, Some(1), commands::Mode::Replay),
        Command::Solve(args) => commands::solve(args),
        Command::InspectMemory(args) => commands::inspect(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e.source);
            ExitCode::from(e.code)
        }
    }
}
