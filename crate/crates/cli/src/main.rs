//! `polaron-lab`: command-line front end of the Polaron laboratory.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Ctx;
use crate::config::Loaded;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "polaron-lab", version, about = "Pekar solver, Polaron path sampler and Pekar diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output root; every subcommand writes to `<out>/<subcommand>/`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override a config value, e.g. `--set lattice.eps=0.25`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve the Pekar problem by self-consistent iteration.
    SolvePekar,
    /// Sample the Polaron path measure.
    SamplePolaron,
    /// Estimate g(eps) by thermodynamic integration over the coupling.
    EstimateG,
    /// Simulate the stationary Pekar diffusion.
    SimulatePekar,
    /// Compare Polaron and Pekar increments and tabulate trends.
    Compare,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let loaded = Loaded::load(cli.config.as_deref(), &cli.set, cli.seed)?;
    let ctx = Ctx { loaded, out: cli.out };
    match cli.command {
        Command::SolvePekar => commands::solve_pekar(&ctx),
        Command::SamplePolaron => commands::sample_polaron_cmd(&ctx),
        Command::EstimateG => commands::estimate_g(&ctx),
        Command::SimulatePekar => commands::simulate_pekar_cmd(&ctx),
        Command::Compare => commands::compare(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
