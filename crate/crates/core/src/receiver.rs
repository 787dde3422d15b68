//! Receiver-side processing: intensity detection, Kramers-Kronig field
//! recovery, DC calibration, demodulation, and frame alignment.
//!
//! Direct detection keeps only `|E|^2`, so the whole receive chain is
//! immune to any phase rotation the channel applies to the optical field.
//! The lost phase is rebuilt from the intensity via the Hilbert transform,
//! valid whenever the field is minimum-phase (winding number zero).

use num_complex::Complex64;

use crate::fft::{decimate, fft_in_place, ifft_in_place, upsample_real};
use crate::rng::GaussianSource;
use crate::waveform::{ComplexWaveform, ModulationParams, PulseFilter, SymbolFrame};
use crate::{Error, Result};

/// Real-valued photocurrent record.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotocurrentTrace {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    /// Photoelectric conversion coefficient.
    pub mu: f64,
}

impl PhotocurrentTrace {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Demodulated symbols plus the receiver-side bookkeeping that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredFrame {
    pub symbols: SymbolFrame,
    /// DC amplitude subtracted during demodulation.
    pub a_r_estimate: f64,
    /// Lag (in symbols) applied to align against the transmitted frame.
    pub alignment_lag: i64,
}

/// Health of one Kramers-Kronig recovery pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KkDiagnostics {
    /// Fraction of upsampled photocurrent samples clamped at the floor.
    pub clamped_fraction: f64,
    /// Set when clamping exceeds 0.1% of samples; the minimum-phase
    /// assumption is then likely violated.
    pub flagged: bool,
}

/// Square-law detection: `I[k] = mu*|E[k]|^2 + n_el[k]`.
///
/// The electronic noise is real white Gaussian in photocurrent units, added
/// after detection to mirror how it is calibrated.
pub fn direct_detect(
    wf: &ComplexWaveform,
    mu: f64,
    elec_noise_variance: f64,
    seed: u64,
) -> PhotocurrentTrace {
    assert!(mu > 0.0, "mu must be positive");
    assert!(elec_noise_variance >= 0.0);
    let mut samples: Vec<f64> = wf.samples.iter().map(|s| mu * s.norm_sqr()).collect();
    if elec_noise_variance > 0.0 {
        let mut src = GaussianSource::new(seed);
        for v in samples.iter_mut() {
            *v += src.real(elec_noise_variance);
        }
    }
    PhotocurrentTrace { samples, sample_rate: wf.sample_rate, mu }
}

/// Discrete Hilbert transform with frequency response `-i*sgn(w)`.
///
/// Full-length spectral multiplication; DC and (for even lengths) the
/// Nyquist bin map to zero. `H(cos) = sin`, and `H(H(x)) = -x` for zero-mean
/// band-limited signals.
pub fn hilbert(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let mut spec: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut spec);
    let half = n / 2;
    spec[0] = Complex64::new(0.0, 0.0);
    if n % 2 == 0 {
        spec[half] = Complex64::new(0.0, 0.0);
    }
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);
    for k in 1..n {
        if k < half || (n % 2 == 1 && k == half) {
            spec[k] *= minus_i;
        } else if k > half {
            spec[k] *= plus_i;
        }
    }
    ifft_in_place(&mut spec);
    spec.iter().map(|v| v.re).collect()
}

/// Rebuild the complex minimum-phase field from an intensity trace.
///
/// The trace is band-limited-upsampled before the nonlinear sqrt/ln/exp
/// chain (which spectrally broadens the signal), floored at
/// `1e-12 * max(I)`, converted to amplitude `sqrt(I/mu)` and phase
/// `H(ln amplitude)`, then decimated back to the input rate.
pub fn kk_recover(
    trace: &PhotocurrentTrace,
    upsample_factor: usize,
) -> Result<(ComplexWaveform, KkDiagnostics)> {
    if upsample_factor < 1 {
        return Err(Error::KkRecovery("upsample_factor must be >= 1".into()));
    }
    if trace.samples.is_empty() {
        return Err(Error::KkRecovery("empty photocurrent trace".into()));
    }
    let up = upsample_real(&trace.samples, upsample_factor);
    let max_i = up.iter().cloned().fold(f64::MIN, f64::max);
    if max_i <= 0.0 {
        return Err(Error::KkRecovery("photocurrent trace is non-positive everywhere".into()));
    }
    let floor = 1e-12 * max_i;
    let mut clamped = 0usize;
    let amplitude: Vec<f64> = up
        .iter()
        .map(|&v| {
            let i = if v < floor {
                clamped += 1;
                floor
            } else {
                v
            };
            (i / trace.mu).sqrt()
        })
        .collect();
    let ln_amp: Vec<f64> = amplitude.iter().map(|&a| a.ln()).collect();
    let phase = hilbert(&ln_amp);
    let field: Vec<Complex64> = amplitude
        .iter()
        .zip(&phase)
        .map(|(&a, &p)| Complex64::from_polar(a, p))
        .collect();
    let samples = decimate(&field, upsample_factor);
    let clamped_fraction = clamped as f64 / up.len() as f64;
    let diag = KkDiagnostics { clamped_fraction, flagged: clamped_fraction > 1e-3 };
    Ok((ComplexWaveform::new(samples, trace.sample_rate, 0.0), diag))
}

/// DC amplitude of a recovered minimum-phase frame: the mean of the real
/// parts. The shifted signal band and the noise average to zero, so the
/// statistical error scales as `O(sqrt(V_A / n_samples))`.
pub fn estimate_dc(wf: &ComplexWaveform) -> f64 {
    wf.samples.iter().map(|s| s.re).sum::<f64>() / wf.samples.len() as f64
}

/// Strip the DC offset and intermediate-frequency shift, matched-filter, and
/// sample at symbol centers.
///
/// `w_IF = pi*B`, the smallest shift that keeps the band single-sided.
pub fn demodulate(
    wf: &ComplexWaveform,
    a_r: f64,
    params: &ModulationParams,
) -> Result<RecoveredFrame> {
    let filter = PulseFilter::new(params)?;
    demodulate_with(&filter, wf, a_r, params)
}

/// [`demodulate`] with a prebuilt filter; avoids rebuilding per frame.
pub fn demodulate_with(
    filter: &PulseFilter,
    wf: &ComplexWaveform,
    a_r: f64,
    params: &ModulationParams,
) -> Result<RecoveredFrame> {
    if wf.len() != params.samples_per_frame() {
        return Err(Error::InvalidModulation(format!(
            "waveform has {} samples, frame geometry expects {}",
            wf.len(),
            params.samples_per_frame()
        )));
    }
    let centered = ComplexWaveform::new(
        wf.samples.iter().map(|&s| s - a_r).collect(),
        wf.sample_rate,
        wf.t0,
    );
    let baseband = centered.rotated(-params.bandwidth_b / 2.0);
    let symbols = filter.matched_filter_downsample(&baseband.samples);
    Ok(RecoveredFrame {
        symbols: SymbolFrame { symbols, v_a_nominal: None },
        a_r_estimate: a_r,
        alignment_lag: 0,
    })
}

/// Normalized circular cross-correlation between two symbol frames.
///
/// Means are removed and the result is scaled so a frame against itself
/// gives peak 1 at lag 0. Returns the argmax lag (rx relative to tx,
/// wrapped to `[-n/2, n/2)`) and the peak magnitude.
pub fn cross_correlate(rx: &SymbolFrame, tx: &SymbolFrame) -> Result<(i64, f64)> {
    let n = rx.len();
    if n == 0 || tx.len() != n {
        return Err(Error::DegenerateCorrelation(format!(
            "frames must be non-empty and equal length (rx {}, tx {})",
            rx.len(),
            tx.len()
        )));
    }
    let center = |f: &SymbolFrame| -> Vec<Complex64> {
        let mean = f.symbols.iter().sum::<Complex64>() / n as f64;
        f.symbols.iter().map(|&c| c - mean).collect()
    };
    let rx0 = center(rx);
    let tx0 = center(tx);
    let e_rx: f64 = rx0.iter().map(|c| c.norm_sqr()).sum();
    let e_tx: f64 = tx0.iter().map(|c| c.norm_sqr()).sum();
    if e_rx <= 0.0 || e_tx <= 0.0 {
        return Err(Error::DegenerateCorrelation("zero-variance input".into()));
    }
    let mut r = rx0;
    let mut t = tx0;
    fft_in_place(&mut r);
    fft_in_place(&mut t);
    for (a, b) in r.iter_mut().zip(&t) {
        *a *= b.conj();
    }
    ifft_in_place(&mut r);
    let norm = (e_rx * e_tx).sqrt();
    let (mut best_lag, mut best) = (0usize, 0.0);
    for (l, v) in r.iter().enumerate() {
        let m = v.norm() / norm;
        if m > best {
            best = m;
            best_lag = l;
        }
    }
    let lag = if best_lag > n / 2 { best_lag as i64 - n as i64 } else { best_lag as i64 };
    Ok((lag, best))
}

/// Circularly shift a recovered frame so it aligns with the transmitted one.
pub fn apply_alignment(frame: &mut RecoveredFrame, lag: i64) {
    let n = frame.symbols.len() as i64;
    if n == 0 {
        return;
    }
    let shift = lag.rem_euclid(n) as usize;
    frame.symbols.symbols.rotate_left(shift);
    frame.alignment_lag = lag;
}

/// DC-intensity monitor verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok,
    Alarm,
}

/// Compare the measured DC amplitude against the calibration reference;
/// alarm when the relative deviation exceeds `threshold_fraction`.
pub fn monitor_dc_intensity(
    a_r_measured: f64,
    a_r_reference: f64,
    threshold_fraction: f64,
) -> Result<DcStatus> {
    if a_r_reference == 0.0 {
        return Err(Error::ZeroDcReference);
    }
    let deviation = (a_r_measured - a_r_reference).abs() / a_r_reference.abs();
    Ok(if deviation > threshold_fraction { DcStatus::Alarm } else { DcStatus::Ok })
}
