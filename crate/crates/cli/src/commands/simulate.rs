//! `kkqkd simulate`: full waveform simulation per user, parameter
//! estimation, DC monitoring, and key rates from the estimated channel.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use kkqkd_core::calibration::CalibrationRecord;
use kkqkd_core::channel::{compose_effective_channel, propagate, EffectiveChannel};
use kkqkd_core::estimation::{estimate_parameters, normalize_to_snu};
use kkqkd_core::pipeline::{FramePipeline, ReceiverChain, RxOutput};
use kkqkd_core::receiver::{cross_correlate, monitor_dc_intensity, DcStatus};
use kkqkd_core::rng::{derive_seed, derive_substream, Stream};
use kkqkd_core::security::{skr_asymptotic, skr_finite_size, SecurityParams};
use kkqkd_core::waveform::{ComplexWaveform, SymbolFrame};

use crate::commands::{CmdResult, Outcome};
use crate::config::ExperimentConfig;
use crate::output::{opt_cell, OutDir};

const USER_SEED_LABEL: u64 = 0x53494d00;

struct FrameRecord {
    frame: usize,
    estimate: Option<kkqkd_core::ParameterEstimate>,
    corr_lag: i64,
    corr_peak: f64,
    a_r_hat: f64,
    dc_status: DcStatus,
    clamped_fraction: f64,
    kk_flagged: bool,
    tx: SymbolFrame,
    rx_norm: SymbolFrame,
}

struct Dump {
    tx_waveform: Vec<(f64, Complex64)>,
    photocurrent: Vec<(f64, f64)>,
}

#[allow(clippy::too_many_arguments)]
fn run_frame(
    pipe: &FramePipeline,
    channel: &EffectiveChannel,
    rx_chain: &ReceiverChain,
    cal: &CalibrationRecord,
    user_seed: u64,
    frame: usize,
    dc_threshold: f64,
    tamper_dc_factor: f64,
    want_dump: bool,
) -> Result<(FrameRecord, Option<Dump>), kkqkd_core::Error> {
    let params = pipe.params();
    let (tx_frame, tx_wf) = pipe.transmit(derive_seed(user_seed, Stream::Symbols, frame as u64))?;
    let mut arrived = propagate(
        &tx_wf,
        channel,
        params,
        derive_seed(user_seed, Stream::ExcessNoise, frame as u64),
    )?;
    if tamper_dc_factor != 1.0 {
        // An adversary scaling only the co-propagated DC tone.
        let a_ch = channel.transmittance_t.sqrt() * params.dc_amplitude();
        let extra = (tamper_dc_factor - 1.0) * a_ch;
        let w = std::f64::consts::TAU * params.f_car;
        for (k, s) in arrived.samples.iter_mut().enumerate() {
            let t = arrived.t0 + k as f64 / params.sample_rate();
            *s += extra * Complex64::from_polar(1.0, w * t);
        }
    }
    let trace = pipe.detect(
        &arrived,
        rx_chain,
        derive_seed(user_seed, Stream::Vacuum, frame as u64),
        derive_seed(user_seed, Stream::Electronic, frame as u64),
    )?;
    let dump = want_dump.then(|| Dump {
        tx_waveform: tx_wf
            .samples
            .iter()
            .enumerate()
            .map(|(k, &s)| (tx_wf.time(k), s))
            .collect(),
        photocurrent: trace
            .samples
            .iter()
            .enumerate()
            .map(|(k, &v)| (k as f64 / trace.sample_rate, v))
            .collect(),
    });
    let RxOutput { mut recovered, kk, .. } = pipe.recover(&trace, rx_chain)?;
    let (lag, peak) = cross_correlate(&recovered.symbols, &tx_frame)?;
    if lag != 0 {
        kkqkd_core::receiver::apply_alignment(&mut recovered, lag);
    }
    let dc_status = monitor_dc_intensity(recovered.a_r_estimate, cal.a_r_reference, dc_threshold)?;
    let rx_norm = normalize_to_snu(&recovered, cal)?;
    let estimate = if kk.flagged {
        None
    } else {
        Some(estimate_parameters(&tx_frame, &rx_norm, rx_chain.eta, cal.v_el)?)
    };
    Ok((
        FrameRecord {
            frame,
            estimate,
            corr_lag: lag,
            corr_peak: peak,
            a_r_hat: recovered.a_r_estimate,
            dc_status,
            clamped_fraction: kk.clamped_fraction,
            kk_flagged: kk.flagged,
            tx: tx_frame,
            rx_norm,
        },
        dump,
    ))
}

pub fn run(
    cfg: &ExperimentConfig,
    out: &Path,
    calibration_dir: Option<&Path>,
    dump_frames: usize,
    tamper_dc_factor: f64,
) -> CmdResult {
    let topo = cfg.qan_topology()?;
    let users = &cfg.topology.as_ref().unwrap().users;
    let mut dir = OutDir::create(out)?;

    let mut estimates_csv = dir.writer("estimates.csv")?;
    writeln!(estimates_csv, "frame,user,v_a_hat,t_hat,eps_hat")?;
    let mut frames_csv = dir.writer("frames.csv")?;
    writeln!(
        frames_csv,
        "frame,user,corr_lag,corr_peak,a_r_hat,dc_status,clamped_fraction,kk_flagged"
    )?;
    let mut skr_csv = dir.writer("skr.csv")?;
    writeln!(
        skr_csv,
        "user,frames_used,frames_skipped,dc_alarms,corr_peak_mean,v_a_hat,t_hat,eps_hat,v_el_snu,i_ab,chi_be,skr_asym_bps,skr_fs_bps"
    )?;

    let mut any_alarm = false;
    for user in 0..topo.n_users() {
        let cal_path = match calibration_dir {
            Some(d) => d.join(format!("user_{user}.txt")),
            None => dir.path(&super::calibrate::record_name(user)),
        };
        let cal_text = std::fs::read_to_string(&cal_path).map_err(|e| {
            format!(
                "missing calibration record {} (run `kkqkd calibrate` first): {e}",
                cal_path.display()
            )
        })?;
        let cal = CalibrationRecord::from_kv_str(&cal_text)?;

        let channel = compose_effective_channel(&topo, user)?;
        let rx_chain = cfg.receiver_chain(&users[user]);
        let pipe = FramePipeline::new(cfg.modulation_params(0))?;
        let user_seed = derive_substream(cfg.run.master_seed, USER_SEED_LABEL + user as u64);

        let results: Vec<_> = (0..cfg.run.frames)
            .into_par_iter()
            .map(|frame| {
                run_frame(
                    &pipe,
                    &channel,
                    &rx_chain,
                    &cal,
                    user_seed,
                    frame,
                    cfg.run.dc_monitor_threshold,
                    tamper_dc_factor,
                    user == 0 && frame < dump_frames,
                )
            })
            .collect::<Result<_, _>>()?;

        // Deterministic merge: results arrive ordered by frame index.
        let mut pooled_tx = Vec::new();
        let mut pooled_rx = Vec::new();
        let mut peak_sum = 0.0;
        let mut skipped = 0usize;
        let mut alarms = 0usize;
        for (rec, dump) in &results {
            if let Some(est) = &rec.estimate {
                writeln!(
                    estimates_csv,
                    "{},{user},{:.8},{:.8},{:.8}",
                    rec.frame, est.v_a_hat, est.t_hat, est.eps_hat
                )?;
            }
            writeln!(
                frames_csv,
                "{},{user},{},{:.6},{:.6},{},{:.3e},{}",
                rec.frame,
                rec.corr_lag,
                rec.corr_peak,
                rec.a_r_hat,
                match rec.dc_status {
                    DcStatus::Ok => "ok",
                    DcStatus::Alarm => "alarm",
                },
                rec.clamped_fraction,
                rec.kk_flagged
            )?;
            if rec.dc_status == DcStatus::Alarm {
                alarms += 1;
            }
            if rec.kk_flagged {
                skipped += 1;
            } else {
                pooled_tx.extend_from_slice(&rec.tx.symbols);
                pooled_rx.extend_from_slice(&rec.rx_norm.symbols);
            }
            peak_sum += rec.corr_peak;

            if let Some(d) = dump {
                let mut w = dir.writer(&format!("dumps/waveform_u{user}_f{}.csv", rec.frame))?;
                writeln!(w, "t,re,im")?;
                for (t, s) in &d.tx_waveform {
                    writeln!(w, "{t:.9e},{:.9e},{:.9e}", s.re, s.im)?;
                }
                let mut w = dir.writer(&format!("dumps/photocurrent_u{user}_f{}.csv", rec.frame))?;
                writeln!(w, "t,i")?;
                for (t, i) in &d.photocurrent {
                    writeln!(w, "{t:.9e},{i:.9e}")?;
                }
                let mut w = dir.writer(&format!("dumps/symbols_u{user}_f{}.csv", rec.frame))?;
                writeln!(w, "index,re_tx,im_tx,re_rx,im_rx")?;
                for (i, (t, r)) in rec.tx.symbols.iter().zip(&rec.rx_norm.symbols).enumerate() {
                    writeln!(w, "{i},{:.9e},{:.9e},{:.9e},{:.9e}", t.re, t.im, r.re, r.im)?;
                }
            }
        }
        any_alarm |= alarms > 0;

        let frames_used = cfg.run.frames - skipped;
        let tx_pool = SymbolFrame { symbols: pooled_tx, v_a_nominal: None };
        let rx_pool = SymbolFrame { symbols: pooled_rx, v_a_nominal: None };
        let pooled = estimate_parameters(&tx_pool, &rx_pool, rx_chain.eta, cal.v_el)?;

        let sec = SecurityParams {
            v_a: pooled.v_a_hat,
            t: pooled.t_hat.min(1.0),
            eps: pooled.eps_hat.max(0.0),
            eta: rx_chain.eta,
            v_el: cal.v_el,
            beta: cfg.security.beta,
            f_rep: cfg.security.f_rep_hz,
            detection: cfg.detection()?,
        };
        let asym = skr_asymptotic(&sec)?;
        let fs = match &cfg.security.finite_size {
            Some(f) => Some(skr_finite_size(&sec, &f.to_core())?.skr_bps),
            None => None,
        };
        let peak_mean = peak_sum / cfg.run.frames as f64;
        writeln!(
            skr_csv,
            "{user},{frames_used},{skipped},{alarms},{peak_mean:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3},{}",
            pooled.v_a_hat,
            pooled.t_hat,
            pooled.eps_hat,
            cal.v_el,
            asym.i_ab,
            asym.chi_be,
            asym.skr_bps,
            opt_cell(fs)
        )?;
        println!(
            "user {user}: frames {frames_used}/{} (skipped {skipped}, alarms {alarms}), corr peak {peak_mean:.3}, \
             V_A = {:.4}, T = {:.4}, eps = {:.4}, SKR = {:.3} kbit/s",
            cfg.run.frames,
            pooled.v_a_hat,
            pooled.t_hat,
            pooled.eps_hat,
            asym.skr_bps / 1e3
        );
    }

    estimates_csv.flush()?;
    frames_csv.flush()?;
    skr_csv.flush()?;
    dir.write_manifest(&cfg.source_text, cfg.run.master_seed)?;
    Ok(if any_alarm { Outcome::Alarm } else { Outcome::Ok })
}
