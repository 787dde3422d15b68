//! `kkqkd skr`: key rates from configured (not simulated) parameters.

use std::io::Write;
use std::path::Path;

use kkqkd_core::security::{skr_asymptotic, skr_finite_size};

use crate::commands::{CmdResult, Outcome};
use crate::config::ExperimentConfig;
use crate::output::{opt_cell, OutDir};

pub fn run(cfg: &ExperimentConfig, out: &Path) -> CmdResult {
    let analytic = cfg.analytic()?;
    let link = cfg.analytic_link()?;
    let t_eff = link.transmittance(analytic.distance_km);
    let mut dir = OutDir::create(out)?;
    let mut csv = dir.writer("skr_configured.csv")?;
    writeln!(
        csv,
        "user,distance_km,t_eff,v_a_snu,eps_snu,v_el_snu,i_ab,chi_be,skr_asym_bps,skr_fs_bps"
    )?;
    for (user, u) in analytic.users.iter().enumerate() {
        let p = cfg.security_params_from(u, t_eff);
        let asym = skr_asymptotic(&p)?;
        let fs = match &cfg.security.finite_size {
            Some(f) => Some(skr_finite_size(&p, &f.to_core())?.skr_bps),
            None => None,
        };
        writeln!(
            csv,
            "{user},{},{t_eff:.6},{:.4},{:.4},{:.4},{:.6},{:.6},{:.3},{}",
            analytic.distance_km,
            u.v_a_snu,
            u.excess_noise_snu,
            u.v_el_snu,
            asym.i_ab,
            asym.chi_be,
            asym.skr_bps,
            opt_cell(fs)
        )?;
        match fs {
            Some(f) => println!(
                "user {user}: SKR_asym = {:.3} kbit/s, SKR_fs = {:.3} kbit/s",
                asym.skr_bps / 1e3,
                f / 1e3
            ),
            None => println!("user {user}: SKR_asym = {:.3} kbit/s", asym.skr_bps / 1e3),
        }
    }
    csv.flush()?;
    dir.write_manifest(&cfg.source_text, cfg.run.master_seed)?;
    Ok(Outcome::Ok)
}
