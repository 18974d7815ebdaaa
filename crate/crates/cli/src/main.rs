use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nonholo_cli::config::{parse_values, prepare, RunConfig};
use nonholo_cli::simulate::simulate;
use nonholo_cli::sweep::{run_sweep, write_sweep, SweepParam};
use nonholo_cli::verify::{run_verify, write_verify};
use nonholo_cli::CliError;
use nonholo_core::model::registry_names;

#[derive(Parser)]
#[command(name = "nonholo", version, about = "Simulate nonholonomic systems, sweep discretization parameters and check Helmholtz conditions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write CSVs, a summary and a plot script.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a run for several values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        param: Param,
        /// Comma-separated values; fractions such as `1/3` are accepted.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a multiplier candidate against an associated system at random points.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in systems.
    Systems,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Alpha,
    H,
}

fn out_dir(flag: Option<PathBuf>, config: &RunConfig) -> PathBuf {
    flag.or_else(|| config.out.clone()).unwrap_or_else(|| PathBuf::from("out"))
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { config, out } => {
            let config = RunConfig::load(&config)?;
            let dir = out_dir(out, &config);
            let prep = prepare(&config)?;
            let art = simulate(&prep, &dir)?;
            println!("{} steps written to {}", art.steps_completed(), dir.display());
        }
        Command::Sweep { config, param, values, out } => {
            let config = RunConfig::load(&config)?;
            let dir = out_dir(out, &config);
            let param = match param {
                Param::Alpha => SweepParam::Alpha,
                Param::H => SweepParam::H,
            };
            let runs = run_sweep(&config, param, &parse_values(&values)?)?;
            write_sweep(&dir, param, &runs)?;
            for run in &runs {
                if let Err(m) = &run.row.status {
                    eprintln!("{} = {}: {m}", param.name(), run.row.value);
                }
            }
            println!("{} runs written to {}", runs.len(), Path::new(&dir).join("sweep_summary.csv").display());
        }
        Command::Verify { config, out } => {
            let config = RunConfig::load(&config)?;
            let dir = out_dir(out, &config);
            let outcome = run_verify(&config)?;
            write_verify(&dir, &outcome)?;
            println!("{}", outcome.verdict());
        }
        Command::Systems => {
            for (name, about) in registry_names() {
                println!("{name:<22}{about}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nonholo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
