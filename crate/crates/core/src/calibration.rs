//! Shot-noise and electronic-noise calibration.
//!
//! The shot-noise unit is measured, not assumed: a DC-only frame is sent
//! through a reference attenuation with vacuum injected, and the
//! per-quadrature variance of the recovered symbols defines the raw SNU
//! (equal to `2*V_vac` because the KK receiver collects both the signal-band
//! and image-band vacuum). Electronic noise is recorded with no optical
//! input, offset by the mean photocurrent `C` of the shot-noise run so it
//! rides at the same operating point, pushed through the identical DSP
//! chain, and expressed in the freshly measured SNU.
//!
//! Calibration frames use the same frame length and DSP settings as data
//! frames; the scaling of noise through the chain then matches the signal's
//! by construction.

use crate::channel::EffectiveChannel;
use crate::pipeline::{FramePipeline, ReceiverChain};
use crate::receiver::{demodulate_with, estimate_dc, kk_recover, PhotocurrentTrace};
use crate::rng::{derive_seed, Stream};
use crate::waveform::{ModulationParams, PulseFilter};
use crate::{Error, Result};

/// Persistent result of a calibration run.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    /// Raw per-quadrature variance of vacuum-only recovered symbols.
    pub snu_per_quadrature: f64,
    /// Electronic noise in SNU.
    pub v_el: f64,
    /// DC amplitude at calibration; reference for the DC monitor.
    pub a_r_reference: f64,
    /// Mean photocurrent of the shot-noise run.
    pub c_offset: f64,
}

impl CalibrationRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.snu_per_quadrature > 0.0) {
            return Err(Error::Calibration(format!(
                "snu_per_quadrature must be > 0, got {}",
                self.snu_per_quadrature
            )));
        }
        if self.v_el < 0.0 {
            return Err(Error::Calibration(format!("v_el must be >= 0, got {}", self.v_el)));
        }
        Ok(())
    }

    /// Serialize as `key = value` lines.
    pub fn to_kv_string(&self) -> String {
        format!(
            "snu_per_quadrature = {:.17e}\nv_el = {:.17e}\na_r_reference = {:.17e}\nc_offset = {:.17e}\n",
            self.snu_per_quadrature, self.v_el, self.a_r_reference, self.c_offset
        )
    }

    /// Parse the `key = value` format written by [`Self::to_kv_string`].
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut record = CalibrationRecord {
            snu_per_quadrature: f64::NAN,
            v_el: f64::NAN,
            a_r_reference: f64::NAN,
            c_offset: f64::NAN,
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Calibration(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let value: f64 = value.trim().parse().map_err(|e| {
                Error::Calibration(format!("line {}: bad number: {e}", lineno + 1))
            })?;
            match key.trim() {
                "snu_per_quadrature" => record.snu_per_quadrature = value,
                "v_el" => record.v_el = value,
                "a_r_reference" => record.a_r_reference = value,
                "c_offset" => record.c_offset = value,
                other => {
                    return Err(Error::Calibration(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        if record.snu_per_quadrature.is_nan()
            || record.v_el.is_nan()
            || record.a_r_reference.is_nan()
            || record.c_offset.is_nan()
        {
            return Err(Error::Calibration("missing calibration keys".into()));
        }
        record.validate()?;
        Ok(record)
    }
}

/// Settings for one calibration campaign.
#[derive(Debug, Clone)]
pub struct CalibrationConfig {
    pub modulation: ModulationParams,
    /// Attenuation of the reliable reference path standing in for the
    /// channel during calibration (dB).
    pub reference_attenuation_db: f64,
    pub receiver: ReceiverChain,
    /// Number of vacuum frames pooled for the SNU estimate.
    pub frames: usize,
}

impl CalibrationConfig {
    pub fn reference_channel(&self) -> EffectiveChannel {
        EffectiveChannel {
            transmittance_t: 10f64.powf(-self.reference_attenuation_db / 10.0),
            excess_noise_eps: 0.0,
        }
    }
}

/// Result of the shot-noise stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoiseCalibration {
    pub snu_per_quadrature: f64,
    pub a_r_reference: f64,
    pub c_offset: f64,
}

/// Measure the raw shot-noise unit from vacuum-only frames.
///
/// Runs DC-only frames (no Gaussian modulation) through the reference
/// attenuation and the full receive chain with electronic noise switched
/// off, and pools the per-quadrature variances of the recovered symbols.
/// Frames whose KK recovery flags clamping are rejected.
pub fn calibrate_shot_noise(
    cfg: &CalibrationConfig,
    master_seed: u64,
) -> Result<ShotNoiseCalibration> {
    if cfg.frames == 0 {
        return Err(Error::Calibration("calibration needs at least one frame".into()));
    }
    let pipe = FramePipeline::new(cfg.modulation.clone())?;
    let reference = cfg.reference_channel();
    let rx = ReceiverChain { elec_noise_variance: 0.0, ..cfg.receiver.clone() };

    let mut sum_sq = 0.0;
    let mut count = 0usize;
    let mut a_r_sum = 0.0;
    let mut c_sum = 0.0;
    for frame in 0..cfg.frames {
        let out = pipe.run_vacuum_frame(&reference, &rx, master_seed, frame as u64)?;
        if out.kk.flagged {
            return Err(Error::Calibration(format!(
                "KK recovery flagged clamping on calibration frame {frame} \
                 ({}% of samples)",
                100.0 * out.kk.clamped_fraction
            )));
        }
        for s in &out.recovered.symbols.symbols {
            sum_sq += s.re * s.re + s.im * s.im;
        }
        count += out.recovered.symbols.len();
        a_r_sum += out.recovered.a_r_estimate;
        c_sum += out.photocurrent_mean;
    }
    // Mean over both quadratures; the recovered symbols are zero-mean after
    // DC removal.
    let snu = sum_sq / (2.0 * count as f64);
    Ok(ShotNoiseCalibration {
        snu_per_quadrature: snu,
        a_r_reference: a_r_sum / cfg.frames as f64,
        c_offset: c_sum / cfg.frames as f64,
    })
}

/// Express an electronic-noise trace in SNU.
///
/// The constant `c_offset` (mean photocurrent of the shot-noise run) is
/// superimposed on the dark trace so the nonlinear KK chain operates at the
/// calibrated point; the result is the average of the two quadrature
/// variances of the demodulated output divided by the measured SNU.
pub fn calibrate_electronic_noise(
    elec_trace: &PhotocurrentTrace,
    c_offset: f64,
    snu_per_quadrature: f64,
    cfg: &CalibrationConfig,
) -> Result<f64> {
    if snu_per_quadrature <= 0.0 {
        return Err(Error::Calibration("snu_per_quadrature must be positive".into()));
    }
    let n = cfg.modulation.samples_per_frame();
    if elec_trace.samples.len() < n {
        return Err(Error::Calibration(format!(
            "electronic trace has {} samples, frame needs {n}",
            elec_trace.samples.len()
        )));
    }
    let filter = PulseFilter::new(&cfg.modulation)?;
    let offset = PhotocurrentTrace {
        samples: elec_trace.samples[..n].iter().map(|&v| v + c_offset).collect(),
        sample_rate: elec_trace.sample_rate,
        mu: elec_trace.mu,
    };
    let (wf, _) = kk_recover(&offset, cfg.receiver.upsample_factor)?;
    let a_r = estimate_dc(&wf);
    let rec = demodulate_with(&filter, &wf, a_r, &cfg.modulation)?;
    let (vx, vp) = rec.symbols.quadrature_variances();
    Ok((vx + vp) / 2.0 / snu_per_quadrature)
}

/// Record a dark (no optical input) photocurrent trace of one frame length.
pub fn electronic_noise_trace(cfg: &CalibrationConfig, seed: u64) -> PhotocurrentTrace {
    let n = cfg.modulation.samples_per_frame();
    let mut src = crate::rng::GaussianSource::new(seed);
    let samples = (0..n)
        .map(|_| src.real(cfg.receiver.elec_noise_variance))
        .collect();
    PhotocurrentTrace {
        samples,
        sample_rate: cfg.modulation.sample_rate(),
        mu: cfg.receiver.mu,
    }
}

/// Full calibration: shot noise then electronic noise.
pub fn calibrate(cfg: &CalibrationConfig, master_seed: u64) -> Result<CalibrationRecord> {
    let shot = calibrate_shot_noise(cfg, master_seed)?;
    let v_el = if cfg.receiver.elec_noise_variance > 0.0 {
        let trace = electronic_noise_trace(cfg, derive_seed(master_seed, Stream::Electronic, u64::MAX));
        calibrate_electronic_noise(&trace, shot.c_offset, shot.snu_per_quadrature, cfg)?
    } else {
        0.0
    };
    let record = CalibrationRecord {
        snu_per_quadrature: shot.snu_per_quadrature,
        v_el,
        a_r_reference: shot.a_r_reference,
        c_offset: shot.c_offset,
    };
    record.validate()?;
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(vacuum_scale: f64, elec: f64) -> CalibrationConfig {
        CalibrationConfig {
            modulation: ModulationParams {
                v_a: 5.0,
                g: 100.0,
                symbol_rate: 1.0e6,
                samples_per_symbol: 40,
                bandwidth_b: 10.0e6,
                f_car: 10.0e6,
                rolloff: 0.0,
                n_symbols: 2048,
                filter_span_symbols: 8,
                seed: 0,
            },
            reference_attenuation_db: 7.05,
            receiver: ReceiverChain {
                eta: 0.72,
                vacuum_scale,
                elec_noise_variance: elec,
                ..Default::default()
            },
            frames: 4,
        }
    }

    #[test]
    fn snu_scales_linearly_with_vacuum() {
        let a = calibrate_shot_noise(&cfg(1.0, 0.0), 11).unwrap();
        let b = calibrate_shot_noise(&cfg(2.0, 0.0), 11).unwrap();
        let ratio = b.snu_per_quadrature / a.snu_per_quadrature;
        assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
        // SNU at scale 2 should sit near 2 (one unit per band, two bands).
        assert!(
            (b.snu_per_quadrature - 2.0).abs() < 0.15,
            "snu {}",
            b.snu_per_quadrature
        );
    }

    #[test]
    fn noiseless_limit_measures_zero() {
        let shot = calibrate_shot_noise(&cfg(0.0, 0.0), 3).unwrap();
        assert!(shot.snu_per_quadrature < 1e-10, "snu {}", shot.snu_per_quadrature);
    }

    #[test]
    fn zero_electronic_noise_gives_zero_v_el() {
        let record = calibrate(&cfg(2.0, 0.0), 5).unwrap();
        assert_eq!(record.v_el, 0.0);
    }

    #[test]
    fn record_round_trips_through_text() {
        let record = CalibrationRecord {
            snu_per_quadrature: 1.9938,
            v_el: 0.0178,
            a_r_reference: 99.3,
            c_offset: 9860.2,
        };
        let parsed = CalibrationRecord::from_kv_str(&record.to_kv_string()).unwrap();
        assert_eq!(record, parsed);
        assert!(CalibrationRecord::from_kv_str("snu_per_quadrature = 1.0").is_err());
    }

    #[test]
    fn calibration_is_deterministic() {
        let a = calibrate(&cfg(2.0, 10.0), 17).unwrap();
        let b = calibrate(&cfg(2.0, 10.0), 17).unwrap();
        assert_eq!(a, b);
    }
}
