use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prgd::harness::{
    load_config, run_experiment, run_verify, thresholds_report, ExperimentConfig, Outcome, EXIT_DATA, EXIT_OK,
};

#[derive(Parser)]
#[command(name = "prgd", version, about = "Perturbed Riemannian gradient descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding `out` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed, overriding `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the lemma checks, one report file per check.
    Verify {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the derived thresholds without running anything.
    Thresholds { config: PathBuf },
}

fn load(path: &Path, out: Option<PathBuf>, seed: Option<u64>) -> Result<ExperimentConfig, prgd::Error> {
    let mut cfg = load_config(path)?;
    if let Some(o) = out {
        cfg.out = o;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed } => load(&config, out, seed).and_then(|c| run_experiment(&c)),
        Command::Verify { config, out, seed } => load(&config, out, seed).and_then(|c| run_verify(&c)),
        Command::Thresholds { config } => load(&config, None, None).and_then(|c| {
            Ok(Outcome {
                exit_code: EXIT_OK,
                summary: thresholds_report(&c)?,
                files: vec![],
            })
        }),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA as u8)
        }
    }
}
