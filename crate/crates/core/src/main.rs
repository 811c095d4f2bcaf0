use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tls_planner::routing::Metric;
use tls_planner::{pipeline, RunConfig};

#[derive(Parser)]
#[command(
    name = "tls-planner",
    version,
    about = "Plan, route, simulate and evaluate multi-scan TLS surveys"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Visibility analysis and greedy scan-location selection
    Plan(Args),
    /// Exact and nearest-neighbor tours, waypoint plan
    Route(Args),
    /// Pure-pursuit mission simulation
    Simulate(Args),
    /// Scan synthesis and registration scoring
    Evaluate(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Navigation metric for the mission route (overrides the config)
    #[arg(long)]
    metric: Option<Metric>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &Args) -> tls_planner::Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(m) = args.metric {
        cfg.planning.metric = m;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> tls_planner::Result<String> {
    Ok(match &cli.command {
        Command::Plan(a) => pipeline::run_plan(&load(a)?)?.summary(),
        Command::Route(a) => pipeline::run_route(&load(a)?)?.summary(),
        Command::Simulate(a) => pipeline::run_simulate(&load(a)?)?.summary(),
        Command::Evaluate(a) => pipeline::run_evaluate(&load(a)?)?.summary(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
