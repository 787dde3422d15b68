//! `kkqkd cost`: hardware cost table for the four access-network schemes.

use std::io::Write;
use std::path::Path;

use kkqkd_core::economics::{network_cost, Scheme};

use crate::commands::{CmdResult, Outcome};
use crate::config::{ConfigError, ExperimentConfig};
use crate::output::OutDir;

pub fn run(cfg: &ExperimentConfig, out: &Path, n_max: usize) -> CmdResult {
    if n_max == 0 {
        return Err(Box::new(ConfigError("--n-max must be >= 1".into())));
    }
    let model = cfg.cost.to_core();
    let mut dir = OutDir::create(out)?;
    let mut csv = dir.writer("cost.csv")?;
    writeln!(csv, "scheme,n_users,cost_cpd")?;
    for scheme in Scheme::ALL {
        for n in 1..=n_max {
            writeln!(csv, "{},{n},{}", scheme.label(), network_cost(scheme, n, &model)?)?;
        }
    }
    csv.flush()?;
    dir.write_manifest(&cfg.source_text, cfg.run.master_seed)?;
    println!("cost table for N = 1..{n_max} -> {}", dir.path("cost.csv").display());
    Ok(Outcome::Ok)
}
