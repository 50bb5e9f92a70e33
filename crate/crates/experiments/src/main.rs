use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qprc_experiments::run::execute;
use qprc_experiments::{Error, ExperimentConfig, Task};

/// Reservoir computing experiments on atom ensembles in structured photonic
/// environments. Outputs CSV files and a manifest.json to --out.
#[derive(Debug, Parser)]
#[command(name = "qprc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` config applied over the task defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding the four MNIST IDX files.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Worker threads (0: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Population dynamics in a cavity or at a band edge.
    Simulate,
    /// Test accuracy against training-set size.
    MnistSizeSweep,
    /// Test accuracy against epoch count at a fixed training size.
    MnistEpochSweep,
    /// Predict band-edge dynamics from cavity reservoir features.
    PbgRegression,
    /// Regression error over reservoir and target spectral widths.
    GammaHeatmap,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let task = match cli.command {
        Command::Simulate => Task::Simulate,
        Command::MnistSizeSweep => Task::MnistSizeSweep,
        Command::MnistEpochSweep => Task::MnistEpochSweep,
        Command::PbgRegression => Task::PbgRegression,
        Command::GammaHeatmap => Task::GammaHeatmap,
    };
    let mut cfg = ExperimentConfig::for_task(task);
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
        if cfg.task != task {
            return Err(Error::Config(format!("config file is for {:?}, not {task:?}", cfg.task)));
        }
    }
    if let Some(dir) = &cli.data_dir {
        cfg.data_dir = dir.clone();
    }
    if let Some(dir) = &cli.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = cli.reps {
        cfg.repetitions = reps;
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| execute(&cfg, &|line| eprintln!("{line}")).map(|m| (cfg, m)));
    match result {
        Ok((cfg, manifest)) => {
            for name in &manifest.outputs {
                println!("{}", cfg.output_dir.join(name).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
