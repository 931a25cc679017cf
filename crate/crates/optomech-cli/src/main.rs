use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use optomech::models::Cutoffs;
use optomech_cli::config::parse_cutoffs;
use optomech_cli::{configure_threads, run, run_compare, run_converge, RunOptions, RunResult};

#[derive(Parser)]
#[command(name = "optomech", version, about = "Spectra and open-system dynamics of cavity optomechanics with qubits")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; each scenario writes into its own `output.path` below it.
    #[arg(long, global = true, env = "OPTOMECH_OUT", default_value = "results")]
    out: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long, global = true, env = "OPTOMECH_THREADS")]
    threads: Option<usize>,
    /// Recorded in the manifest. No current scenario is stochastic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario and write its tables, report and manifest.
    Run,
    /// Rerun a scenario over increasing cutoffs and report relative changes.
    Converge {
        /// Scalar output to track; repeatable.
        #[arg(long = "quantity")]
        quantities: Vec<String>,
        /// Cutoff set `phonon,photon[,photon2]`; repeat in increasing order.
        #[arg(long = "ladder", value_parser = parse_ladder)]
        ladder: Vec<Cutoffs>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Compare numeric splittings with closed-form rates.
    CompareRates,
}

fn parse_ladder(s: &str) -> Result<Cutoffs, String> {
    parse_cutoffs(s).map_err(|e| e.to_string())
}

fn dispatch(cli: Cli) -> Result<RunResult> {
    configure_threads(cli.global.threads)?;
    let config = cli.global.config.ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    let opts = RunOptions { out_root: cli.global.out, seed: cli.global.seed };
    match cli.command {
        Command::Run => run(&config, &opts),
        Command::Converge { quantities, ladder, tolerance } => {
            run_converge(&config, &quantities, &ladder, tolerance, &opts)
        }
        Command::CompareRates => run_compare(&config, &opts),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(r) => {
            println!("wrote {} ({:.2} s)", r.dir.display(), r.manifest.wall_time_seconds);
            for c in &r.convergence {
                let flag = if c.converged { "converged" } else { "NOT CONVERGED" };
                println!("  {}: relative change {:.3e} ({flag}, tolerance {})", c.quantity, c.final_relative_change, c.tolerance);
            }
            if r.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
