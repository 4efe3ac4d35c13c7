mod commands;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use evigrid::render::RenderStyle;

/// Map-aided evidential occupancy grids: run simulated scenarios or replay
/// recorded scans.
#[derive(Debug, Parser)]
#[command(name = "evigrid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and fuse every epoch.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
        /// Write the simulated scans as a replayable log.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fuse the scans of a recorded log against a map.
    Replay {
        log: PathBuf,
        map: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    render: RenderArg,
    /// Render every N-th epoch, starting with epoch 0.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    every: u64,
    /// Epochs whose perception grid is dumped as CSV.
    #[arg(long, value_delimiter = ',')]
    dump_grid: Vec<usize>,
    /// TOML file with `grid`, `sensor`, `map_confidence` and `fusion` tables.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum RenderArg {
    Pignistic,
    Decision,
    Both,
}

impl From<RenderArg> for RenderStyle {
    fn from(r: RenderArg) -> Self {
        match r {
            RenderArg::Pignistic => RenderStyle::Pignistic,
            RenderArg::Decision => RenderStyle::Decision,
            RenderArg::Both => RenderStyle::Both,
        }
    }
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad input before any epoch ran: exit 1.
    Config(anyhow::Error),
    /// Failure while processing epochs: exit 2.
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EVIGRID_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            record,
            seed,
        } => commands::run(&scenario, &out.into(), record.as_deref(), seed),
        Command::Replay { log, map, out } => commands::replay(&log, &map, &out.into()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", describe(failure.error()));
            ExitCode::from(failure.code())
        }
    }
}

/// The error and its causes on one line. Library errors often repeat their
/// cause in their own message; such causes are not printed twice.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if msg.contains(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}

impl From<OutputArgs> for output::OutputOptions {
    fn from(a: OutputArgs) -> Self {
        Self {
            dir: a.out,
            style: a.render.into(),
            every: a.every as usize,
            dump_epochs: a.dump_grid,
            params: a.params,
        }
    }
}
