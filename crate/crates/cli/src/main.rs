//! `netload`: synthesize data, train diffusion models, sample and score.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netload_core::Error;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "netload", version, about = "Conditional diffusion models for residential net-load profiles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write per-date PV basis matrices computed from a weather file.
    Basis {
        #[command(flatten)]
        common: Common,
        /// First date to export (inclusive); defaults to the first weather date.
        #[arg(long)]
        start: Option<chrono::NaiveDate>,
        /// Last date to export (inclusive); defaults to the last weather date.
        #[arg(long)]
        end: Option<chrono::NaiveDate>,
    },
    /// Generate a synthetic dataset with known load and solar components.
    SynthData {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        customers: Option<usize>,
        #[arg(long)]
        days: Option<usize>,
    },
    /// Train one model variant and write checkpoints plus a loss log.
    Train {
        #[command(flatten)]
        common: Common,
        /// Optimizer steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Draw trajectories from a trained model.
    Sample {
        #[command(flatten)]
        common: Common,
        /// `CUSTOMER_ID:YYYY-MM-DD`; repeatable. Defaults to the held-out split.
        #[arg(long = "condition")]
        conditions: Vec<String>,
    },
    /// Score sampled trajectories against observed profiles.
    Evaluate {
        #[command(flatten)]
        common: Common,
    },
    /// Print report tables as aligned text.
    Report {
        #[command(flatten)]
        common: Common,
        /// Report CSVs to print; defaults to `<out>/report.csv`.
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output (run) directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Directory with `weather.csv`, `netload.csv` and `pv.csv`.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_parser = ["bdm", "pdm"])]
    variant: Option<String>,
    #[arg(long)]
    seed_data: Option<u64>,
    #[arg(long)]
    seed_split: Option<u64>,
    #[arg(long)]
    seed_train: Option<u64>,
    #[arg(long)]
    seed_sample: Option<u64>,
    /// Trajectories per condition.
    #[arg(long)]
    samples: Option<usize>,
}

impl Common {
    fn resolve(&self, extra: RunConfig) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            data_dir: self.data.clone(),
            variant: self.variant.clone(),
            seed_data: self.seed_data,
            seed_split: self.seed_split,
            seed_train: self.seed_train,
            seed_sample: self.seed_sample,
            samples: self.samples,
            ..extra
        };
        cfg.overlay(&flags);
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Basis { common, start, end } => commands::basis(&common.resolve(RunConfig::default())?, &common.out, start, end),
        Command::SynthData { common, customers, days } => {
            let cfg = common.resolve(RunConfig { customers, days, ..Default::default() })?;
            commands::synth_data(&cfg, &common.out)
        }
        Command::Train { common, steps } => {
            let cfg = common.resolve(RunConfig { train_steps: steps, ..Default::default() })?;
            commands::train(&cfg, &common.out)
        }
        Command::Sample { common, conditions } => commands::sample(&common.resolve(RunConfig::default())?, &common.out, &conditions),
        Command::Evaluate { common } => commands::evaluate(&common.resolve(RunConfig::default())?, &common.out),
        Command::Report { common, inputs } => commands::report(&common.out, &inputs),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Csv(_) => 2,
        Error::Config(_) => 3,
        Error::Numeric(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
