//! `kkqkd calibrate`: shot-noise and electronic-noise calibration per user.

use std::path::Path;

use kkqkd_core::calibration::{calibrate, CalibrationConfig, CalibrationRecord};
use kkqkd_core::channel::compose_effective_channel;
use kkqkd_core::rng::derive_substream;

use crate::commands::{CmdResult, Outcome};
use crate::config::ExperimentConfig;
use crate::output::OutDir;

/// Substream label space for per-user calibration seeds.
pub const CAL_SEED_LABEL: u64 = 0x43414c00;

pub fn calibration_config(
    cfg: &ExperimentConfig,
    user: usize,
) -> Result<CalibrationConfig, Box<dyn std::error::Error>> {
    let topo = cfg.qan_topology()?;
    let users = &cfg.topology.as_ref().unwrap().users;
    let channel = compose_effective_channel(&topo, user)?;
    // The reliable reference path mimics the real channel's attenuation
    // unless the config pins a specific value.
    let reference_attenuation_db = cfg
        .calibration
        .reference_attenuation_db
        .unwrap_or_else(|| -10.0 * channel.transmittance_t.log10());
    Ok(CalibrationConfig {
        modulation: cfg.modulation_params(0),
        reference_attenuation_db,
        receiver: cfg.receiver_chain(&users[user]),
        frames: cfg.calibration.frames,
    })
}

pub fn calibrate_user(
    cfg: &ExperimentConfig,
    user: usize,
) -> Result<CalibrationRecord, Box<dyn std::error::Error>> {
    let cal_cfg = calibration_config(cfg, user)?;
    let seed = derive_substream(cfg.run.master_seed, CAL_SEED_LABEL + user as u64);
    Ok(calibrate(&cal_cfg, seed)?)
}

pub fn record_name(user: usize) -> String {
    format!("calibration/user_{user}.txt")
}

pub fn run(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let topo = cfg.qan_topology()?;
    let mut dir = OutDir::create(out)?;
    for user in 0..topo.n_users() {
        let record = calibrate_user(cfg, user)?;
        dir.write_string(&record_name(user), &record.to_kv_string())?;
        println!(
            "user {user}: snu_per_quadrature = {:.6}, v_el = {:.6} SNU, a_r_reference = {:.4}, c_offset = {:.4}",
            record.snu_per_quadrature, record.v_el, record.a_r_reference, record.c_offset
        );
    }
    dir.write_manifest(&cfg.source_text, cfg.run.master_seed)?;
    Ok(Outcome::Ok)
}
