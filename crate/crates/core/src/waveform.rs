//! Transmitter-side waveform construction.
//!
//! A frame of Gaussian symbols is pulse-shaped onto a raised-cosine train,
//! spectrally shifted by `B/2` and offset by the DC amplitude `A = g*sqrt(V_A)`
//! to form a minimum-phase signal, then moved onto an RF carrier. Frames are
//! treated as one period of a circular signal, so pulse shaping and its
//! matched-filter inverse are exact.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::fft::{fft_in_place, ifft_in_place};
use crate::rng::GaussianSource;
use crate::{Error, Result};

/// Transmitter constants for one modulation configuration.
///
/// `v_a` is the modulation variance per quadrature in SNU (`Var(a) = Var(b)
/// = V_A`; the CV-QKD literature is split between this and the total-variance
/// convention, so it is worth stating). The sample rate is structurally
/// `symbol_rate * samples_per_symbol`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationParams {
    /// Modulation variance per quadrature (SNU).
    pub v_a: f64,
    /// DC scaling factor; the minimum-phase offset is `A = g*sqrt(v_a)`.
    pub g: f64,
    /// Symbol rate in Hz.
    pub symbol_rate: f64,
    /// Integer oversampling factor (>= 2).
    pub samples_per_symbol: usize,
    /// Spectral-shift parameter B in Hz; the shifted band occupies [0, B].
    pub bandwidth_b: f64,
    /// RF carrier frequency in Hz.
    pub f_car: f64,
    /// Raised-cosine roll-off in [0, 1].
    pub rolloff: f64,
    /// Symbols per frame.
    pub n_symbols: usize,
    /// Pulse truncation half-length in symbol periods.
    pub filter_span_symbols: usize,
    /// RNG seed for symbol generation.
    pub seed: u64,
}

impl ModulationParams {
    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate * self.samples_per_symbol as f64
    }

    pub fn samples_per_frame(&self) -> usize {
        self.n_symbols * self.samples_per_symbol
    }

    /// Occupied baseband width of the pulse-shaped signal in Hz.
    pub fn occupied_bandwidth(&self) -> f64 {
        (1.0 + self.rolloff) * self.symbol_rate
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidModulation(msg));
        if !(self.v_a > 0.0) {
            return fail(format!("v_a must be > 0, got {}", self.v_a));
        }
        if !(self.g > 0.0) {
            return fail(format!("g must be > 0, got {}", self.g));
        }
        if !(self.symbol_rate > 0.0) {
            return fail(format!("symbol_rate must be > 0, got {}", self.symbol_rate));
        }
        if self.samples_per_symbol < 2 {
            return fail(format!(
                "samples_per_symbol must be >= 2, got {}",
                self.samples_per_symbol
            ));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return fail(format!("rolloff must lie in [0, 1], got {}", self.rolloff));
        }
        if self.n_symbols == 0 {
            return fail("n_symbols must be >= 1 (empty frame)".into());
        }
        if self.filter_span_symbols == 0 {
            return fail("filter_span_symbols must be >= 1".into());
        }
        if self.bandwidth_b < self.symbol_rate {
            return fail(format!(
                "bandwidth_b = {} Hz must be >= symbol_rate = {} Hz",
                self.bandwidth_b, self.symbol_rate
            ));
        }
        if self.bandwidth_b < self.occupied_bandwidth() {
            return fail(format!(
                "bandwidth_b = {} Hz cannot hold the shifted band: pulse occupies {} Hz",
                self.bandwidth_b,
                self.occupied_bandwidth()
            ));
        }
        if self.f_car < self.bandwidth_b {
            return fail(format!(
                "f_car = {} Hz must be >= bandwidth_b = {} Hz",
                self.f_car, self.bandwidth_b
            ));
        }
        if self.sample_rate() < 2.0 * (self.f_car + self.bandwidth_b) {
            return fail(format!(
                "sample_rate = {} Hz violates Nyquist for the carrier-shifted band ({} Hz needed)",
                self.sample_rate(),
                2.0 * (self.f_car + self.bandwidth_b)
            ));
        }
        Ok(())
    }

    /// Minimum-phase DC offset `A = g*sqrt(v_a)`.
    pub fn dc_amplitude(&self) -> f64 {
        self.g * self.v_a.sqrt()
    }
}

/// One frame of complex Gaussian symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
    /// Modulation variance the frame was generated with; `None` for frames
    /// recovered from measurements.
    pub v_a_nominal: Option<f64>,
}

impl SymbolFrame {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Sample variances of the real and imaginary quadratures (mean removed).
    pub fn quadrature_variances(&self) -> (f64, f64) {
        let n = self.symbols.len() as f64;
        let (mut mx, mut mp) = (0.0, 0.0);
        for c in &self.symbols {
            mx += c.re;
            mp += c.im;
        }
        mx /= n;
        mp /= n;
        let (mut vx, mut vp) = (0.0, 0.0);
        for c in &self.symbols {
            vx += (c.re - mx) * (c.re - mx);
            vp += (c.im - mp) * (c.im - mp);
        }
        (vx / n, vp / n)
    }
}

/// Uniformly sampled complex field, one frame per period.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveform {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Start time of the first sample in seconds.
    pub t0: f64,
}

impl ComplexWaveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, t0: f64) -> Self {
        assert!(sample_rate > 0.0, "sample_rate must be positive");
        assert!(!samples.is_empty(), "waveform must be non-empty");
        Self { samples, sample_rate, t0 }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.sample_rate
    }

    /// Multiply every sample by `exp(i*2*pi*f*t)`.
    pub(crate) fn rotated(&self, f_hz: f64) -> ComplexWaveform {
        let w = TAU * f_hz;
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, &s)| s * Complex64::from_polar(1.0, w * self.time(k)))
            .collect();
        ComplexWaveform::new(samples, self.sample_rate, self.t0)
    }
}

/// Draw a frame of complex Gaussian symbols with `Var(a) = Var(b) = v_a`.
///
/// Deterministic for a fixed seed.
pub fn generate_symbols(params: &ModulationParams) -> Result<SymbolFrame> {
    params.validate()?;
    let mut src = GaussianSource::new(params.seed);
    let s = params.v_a.sqrt();
    let symbols = (0..params.n_symbols)
        .map(|_| Complex64::new(src.standard() * s, src.standard() * s))
        .collect();
    Ok(SymbolFrame { symbols, v_a_nominal: Some(params.v_a) })
}

/// Raised-cosine impulse response at `t` symbol periods.
///
/// `rc(0) = 1` and `rc(m) = 0` for nonzero integer `m`, so the shaped
/// waveform carries the symbol values exactly at symbol centers.
fn raised_cosine(t: f64, rolloff: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let sinc = (PI * t).sin() / (PI * t);
    if rolloff == 0.0 {
        return sinc;
    }
    let x = 2.0 * rolloff * t;
    if (x.abs() - 1.0).abs() < 1e-12 {
        // Removable singularity of the cos/(1 - x^2) factor.
        return rolloff / 2.0 * (PI / (2.0 * rolloff)).sin();
    }
    sinc * (PI * rolloff * t).cos() / (1.0 - x * x)
}

/// Blackman taper; equals 1 at `x = 0` and ~0 at `x = +-1`.
fn blackman(x: f64) -> f64 {
    0.42 + 0.5 * (PI * x).cos() + 0.08 * (2.0 * PI * x).cos()
}

/// Pulse-shaping filter pair for one frame geometry.
///
/// `tx_spectrum` is the FFT of the truncated, windowed raised-cosine taps
/// laid out circularly over the frame. `rx_spectrum` is the matched filter
/// with a zero-forcing correction over the symbol-rate spectral folds, so
/// shape -> matched filter -> downsample is the identity on symbols to
/// machine precision while keeping the receiver's noise bandwidth at the
/// symbol rate (up to the roll-off excess).
#[derive(Debug, Clone)]
pub struct PulseFilter {
    n: usize,
    sps: usize,
    tx_spectrum: Vec<Complex64>,
    rx_spectrum: Vec<Complex64>,
}

impl PulseFilter {
    pub fn new(params: &ModulationParams) -> Result<Self> {
        params.validate()?;
        let n = params.samples_per_frame();
        let sps = params.samples_per_symbol;
        let span = params.filter_span_symbols;
        let half = (span * sps) as isize;

        // Circular layout; overlapping tails accumulate, which keeps the
        // symbol-center zeros exact even for frames shorter than the span.
        let mut taps = vec![Complex64::new(0.0, 0.0); n];
        for d in -half..=half {
            let t = d as f64 / sps as f64;
            let w = blackman(d as f64 / (half as f64 + 1.0));
            let idx = d.rem_euclid(n as isize) as usize;
            taps[idx] += Complex64::new(raised_cosine(t, params.rolloff) * w, 0.0);
        }
        let mut tx_spectrum = taps;
        fft_in_place(&mut tx_spectrum);

        // Fold |G|^2 over the symbol-rate aliases. n_folds = sps images of
        // n_symbols bins each.
        let n_symbols = params.n_symbols;
        let mut folded = vec![0.0; n_symbols];
        for (k, g) in tx_spectrum.iter().enumerate() {
            folded[k % n_symbols] += g.norm_sqr();
        }
        for (k, &f) in folded.iter().enumerate() {
            if f <= 0.0 {
                return Err(Error::InvalidModulation(format!(
                    "pulse spectrum vanishes on symbol-frequency class {k}; \
                     matched filter is singular"
                )));
            }
        }
        // Decimation by sps averages the spectral aliases (a 1/sps factor),
        // so the zero-forcing filter carries an sps gain to keep the
        // cascade at exactly unit symbol gain.
        let rx_spectrum = tx_spectrum
            .iter()
            .enumerate()
            .map(|(k, g)| sps as f64 * g.conj() / folded[k % n_symbols])
            .collect();

        Ok(Self { n, sps, tx_spectrum, rx_spectrum })
    }

    /// Shape a symbol frame onto the pulse train.
    pub fn shape(&self, frame: &SymbolFrame) -> Vec<Complex64> {
        assert_eq!(frame.len() * self.sps, self.n, "frame length mismatch");
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, &c) in frame.symbols.iter().enumerate() {
            buf[i * self.sps] = c;
        }
        fft_in_place(&mut buf);
        for (b, g) in buf.iter_mut().zip(&self.tx_spectrum) {
            *b *= g;
        }
        ifft_in_place(&mut buf);
        buf
    }

    /// Matched-filter the baseband samples and sample at symbol centers.
    pub fn matched_filter_downsample(&self, samples: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(samples.len(), self.n, "waveform length mismatch");
        let mut buf = samples.to_vec();
        fft_in_place(&mut buf);
        for (b, h) in buf.iter_mut().zip(&self.rx_spectrum) {
            *b *= h;
        }
        ifft_in_place(&mut buf);
        buf.into_iter().step_by(self.sps).collect()
    }
}

/// Raised-cosine pulse shaping of a symbol frame.
///
/// The waveform equals the symbol value at every symbol center (unit gain,
/// zero ISI) and the matched-filter round trip implemented by
/// [`PulseFilter::matched_filter_downsample`] returns the symbols exactly.
pub fn pulse_shape(frame: &SymbolFrame, params: &ModulationParams) -> Result<ComplexWaveform> {
    if frame.len() != params.n_symbols {
        return Err(Error::InvalidModulation(format!(
            "frame has {} symbols, params expect {}",
            frame.len(),
            params.n_symbols
        )));
    }
    let filter = PulseFilter::new(params)?;
    Ok(ComplexWaveform::new(filter.shape(frame), params.sample_rate(), 0.0))
}

/// Shift the baseband signal to `[0, B]` and add the DC offset:
/// `out(t) = A + wf(t)*exp(i*pi*B*t)` with `A = g*sqrt(v_a)`.
///
/// The shift is an exact per-sample rotation, not an FFT bin shift.
pub fn to_minimum_phase(wf: &ComplexWaveform, params: &ModulationParams) -> ComplexWaveform {
    let a = params.dc_amplitude();
    let rotated = wf.rotated(params.bandwidth_b / 2.0);
    let samples = rotated.samples.into_iter().map(|s| s + a).collect();
    ComplexWaveform::new(samples, wf.sample_rate, wf.t0)
}

/// Multiply by `exp(i*2*pi*f_car*t)`; inverted exactly by the opposite sign.
pub fn add_carrier(wf: &ComplexWaveform, f_car: f64) -> Result<ComplexWaveform> {
    if f_car.abs() >= wf.sample_rate / 2.0 {
        return Err(Error::CarrierAliasing {
            f_car_hz: f_car,
            sample_rate_hz: wf.sample_rate,
        });
    }
    Ok(wf.rotated(f_car))
}

/// Per-symbol probability that a Gaussian symbol's amplitude exceeds the DC
/// offset `A = g*sqrt(V_A)`, i.e. the Rayleigh tail `exp(-g^2/2)`.
///
/// A frame of `n` symbols fails to be minimum-phase with probability at most
/// `n * exp(-g^2/2)` (union bound).
pub fn minimum_phase_failure_prob(g: f64) -> Result<f64> {
    if g < 0.0 {
        return Err(Error::InvalidModulation(format!("g must be >= 0, got {g}")));
    }
    Ok((-g * g / 2.0).exp())
}

/// Discrete winding number of the trajectory around the origin: wrapped
/// phase increments between consecutive samples summed and divided by 2*pi,
/// rounded to the nearest integer.
pub fn check_winding(wf: &ComplexWaveform) -> Result<i64> {
    let mut total = 0.0;
    for (k, pair) in wf.samples.windows(2).enumerate() {
        if pair[0].norm_sqr() == 0.0 {
            return Err(Error::SampleAtOrigin { index: k });
        }
        if pair[1].norm_sqr() == 0.0 {
            return Err(Error::SampleAtOrigin { index: k + 1 });
        }
        // arg of the ratio is the phase increment wrapped to (-pi, pi].
        total += (pair[1] / pair[0]).arg();
    }
    Ok((total / TAU).round() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::bin_frequency;
    use crate::fft::fft_in_place as fft;

    pub(crate) fn test_params() -> ModulationParams {
        ModulationParams {
            v_a: 5.0,
            g: 100.0,
            symbol_rate: 1.0e6,
            samples_per_symbol: 40,
            bandwidth_b: 10.0e6,
            f_car: 10.0e6,
            rolloff: 0.0,
            n_symbols: 256,
            filter_span_symbols: 8,
            seed: 7,
        }
    }

    #[test]
    fn symbol_variance_matches_nominal() {
        let mut p = test_params();
        p.n_symbols = 1_000_000;
        p.samples_per_symbol = 40;
        let frame = generate_symbols(&p).unwrap();
        let (vx, vp) = frame.quadrature_variances();
        // chi-square 99% band for 1e6 Gaussian samples at V_A = 5.
        assert!((4.97..=5.03).contains(&vx), "Var(a) = {vx}");
        assert!((4.97..=5.03).contains(&vp), "Var(b) = {vp}");
    }

    #[test]
    fn empty_frame_rejected() {
        let mut p = test_params();
        p.n_symbols = 0;
        assert!(matches!(generate_symbols(&p), Err(Error::InvalidModulation(_))));
    }

    #[test]
    fn frames_are_deterministic() {
        let p = test_params();
        assert_eq!(generate_symbols(&p).unwrap(), generate_symbols(&p).unwrap());
    }

    #[test]
    fn single_symbol_peaks_at_one() {
        let mut p = test_params();
        p.rolloff = 0.3;
        p.n_symbols = 32;
        let mut frame = SymbolFrame {
            symbols: vec![Complex64::new(0.0, 0.0); 32],
            v_a_nominal: None,
        };
        frame.symbols[16] = Complex64::new(1.0, 0.0);
        let wf = pulse_shape(&frame, &p).unwrap();
        let center = wf.samples[16 * p.samples_per_symbol];
        assert!((center - Complex64::new(1.0, 0.0)).norm() < 1e-12, "center {center}");
        let peak = wf.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-6, "peak {peak}");
    }

    #[test]
    fn zero_isi_at_other_symbol_centers() {
        let mut p = test_params();
        p.rolloff = 0.3;
        p.n_symbols = 2;
        let frame = SymbolFrame {
            symbols: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            v_a_nominal: None,
        };
        let wf = pulse_shape(&frame, &p).unwrap();
        assert!(wf.samples[p.samples_per_symbol].norm() < 1e-10);
    }

    #[test]
    fn matched_filter_round_trip_is_identity() {
        for rolloff in [0.0, 0.3, 1.0] {
            let mut p = test_params();
            p.rolloff = rolloff;
            p.n_symbols = 64;
            p.seed = 11;
            let frame = generate_symbols(&p).unwrap();
            let filter = PulseFilter::new(&p).unwrap();
            let shaped = filter.shape(&frame);
            let back = filter.matched_filter_downsample(&shaped);
            let err: f64 = frame
                .symbols
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / frame.symbols.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-10, "rolloff {rolloff}: relative error {err}");
        }
    }

    #[test]
    fn minimum_phase_of_zero_is_constant_dc() {
        let p = test_params();
        let wf = ComplexWaveform::new(
            vec![Complex64::new(0.0, 0.0); 512],
            p.sample_rate(),
            0.0,
        );
        let mp = to_minimum_phase(&wf, &p);
        let a = p.dc_amplitude();
        assert!((a - 100.0 * 5.0_f64.sqrt()).abs() < 1e-9);
        assert!((a - 223.60679).abs() < 1e-4);
        for s in &mp.samples {
            assert!((s - Complex64::new(a, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn minimum_phase_is_single_sideband() {
        let mut p = test_params();
        p.n_symbols = 512;
        let frame = generate_symbols(&p).unwrap();
        let bb = pulse_shape(&frame, &p).unwrap();
        let mp = to_minimum_phase(&bb, &p);
        let mut spec = mp.samples.clone();
        fft(&mut spec);
        let n = spec.len();
        let (mut neg, mut total) = (0.0, 0.0);
        for (k, v) in spec.iter().enumerate() {
            let p_k = v.norm_sqr();
            total += p_k;
            if bin_frequency(k, n, mp.sample_rate) < 0.0 {
                neg += p_k;
            }
        }
        let ratio_db = 10.0 * (neg / total).log10();
        assert!(ratio_db < -60.0, "negative-frequency power {ratio_db} dB");
    }

    #[test]
    fn carrier_is_exactly_invertible() {
        let p = test_params();
        let frame = generate_symbols(&p).unwrap();
        let bb = pulse_shape(&frame, &p).unwrap();
        let mp = to_minimum_phase(&bb, &p);

        let same = add_carrier(&mp, 0.0).unwrap();
        assert_eq!(same.samples, mp.samples);

        let up = add_carrier(&mp, p.f_car).unwrap();
        let back = add_carrier(&up, -p.f_car).unwrap();
        for (a, b) in mp.samples.iter().zip(&back.samples) {
            assert!((a - b).norm() < 1e-12);
        }

        // Pure DC onto a carrier keeps constant modulus.
        let dc = ComplexWaveform::new(
            vec![Complex64::new(3.0, 0.0); 1000],
            p.sample_rate(),
            0.0,
        );
        let tone = add_carrier(&dc, p.f_car).unwrap();
        for s in &tone.samples {
            assert!((s.norm() - 3.0).abs() < 1e-12);
        }

        assert!(matches!(
            add_carrier(&mp, p.sample_rate()),
            Err(Error::CarrierAliasing { .. })
        ));
    }

    #[test]
    fn rayleigh_tail_values() {
        assert!((minimum_phase_failure_prob(5.257).unwrap() - 1e-6).abs() < 2e-8);
        assert_eq!(minimum_phase_failure_prob(0.0).unwrap(), 1.0);
        assert!((minimum_phase_failure_prob(3.0).unwrap() - 1.11e-2).abs() < 2e-4);
        assert!(minimum_phase_failure_prob(-1.0).is_err());
    }

    #[test]
    fn winding_on_canonical_trajectories() {
        let p = test_params();
        let constant = ComplexWaveform::new(
            vec![Complex64::new(223.6, 0.0); 64],
            p.sample_rate(),
            0.0,
        );
        assert_eq!(check_winding(&constant).unwrap(), 0);

        let circle: Vec<Complex64> = (0..=100)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 100.0))
            .collect();
        let circle = ComplexWaveform::new(circle, 1.0, 0.0);
        assert_eq!(check_winding(&circle).unwrap(), 1);

        let with_origin = ComplexWaveform::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            1.0,
            0.0,
        );
        assert!(matches!(check_winding(&with_origin), Err(Error::SampleAtOrigin { .. })));
    }

    #[test]
    fn gaussian_minimum_phase_frame_does_not_wind() {
        let p = test_params();
        let frame = generate_symbols(&p).unwrap();
        let bb = pulse_shape(&frame, &p).unwrap();
        let mp = to_minimum_phase(&bb, &p);
        assert_eq!(check_winding(&mp).unwrap(), 0);
    }
}
