//! `kkqkd`: calibration, end-to-end simulation, parameter estimation, key
//! rates, sweeps, and cost tables from declarative configs.
//!
//! Exit codes: 0 success, 2 config error, 3 pipeline error, 4 security
//! monitor alarm.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kkqkd_cli::commands::{self, Outcome};
use kkqkd_cli::config::{load_preset, ConfigError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "kkqkd",
    version,
    about = "Direct-detection CV-QKD simulator with a Kramers-Kronig receiver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to a TOML experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Name of a built-in preset (paper-experiment, fig3-4user).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate shot noise and electronic noise for every user.
    Calibrate(CommonArgs),
    /// Run the full waveform simulation and estimate parameters per user.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory holding calibration records (defaults to <out>/calibration).
        #[arg(long)]
        calibration_dir: Option<PathBuf>,
        /// Dump waveform/photocurrent/symbol CSVs for this many initial frames.
        #[arg(long, default_value_t = 0)]
        dump_frames: usize,
        /// Scale the received DC component to exercise the intensity monitor.
        #[arg(long, default_value_t = 1.0)]
        tamper_dc_factor: f64,
    },
    /// Compute asymptotic and finite-size key rates from configured parameters.
    Skr(CommonArgs),
    /// Analytic distance sweep of per-user key rates for all detection models.
    Sweep(CommonArgs),
    /// Hardware cost table for the four access-network schemes.
    Cost {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest user count to tabulate.
        #[arg(long, default_value_t = 64)]
        n_max: usize,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Calibrate(c) | Command::Skr(c) | Command::Sweep(c) => c,
            Command::Simulate { common, .. } | Command::Cost { common, .. } => common,
        }
    }
}

fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_toml_str(&text)?
        }
        (None, Some(name)) => load_preset(name)?,
        _ => return Err(ConfigError("pass --config <path> or --preset <name>".into())),
    };
    if let Some(seed) = common.seed {
        cfg.run.master_seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.command.common();

    let cfg = match load_config(common) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if common.workers > 0 {
        // The global pool can only be set once; a failure here means it
        // already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(common.workers)
            .build_global();
    }

    let result = match &cli.command {
        Command::Calibrate(c) => commands::calibrate::run(&cfg, &c.out),
        Command::Simulate { common, calibration_dir, dump_frames, tamper_dc_factor } => {
            commands::simulate::run(
                &cfg,
                &common.out,
                calibration_dir.as_deref(),
                *dump_frames,
                *tamper_dc_factor,
            )
        }
        Command::Skr(c) => commands::skr::run(&cfg, &c.out),
        Command::Sweep(c) => commands::sweep::run(&cfg, &c.out),
        Command::Cost { common, n_max } => commands::cost::run(&cfg, &common.out, *n_max),
    };

    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Alarm) => {
            eprintln!("security monitor raised an alarm");
            ExitCode::from(4)
        }
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
