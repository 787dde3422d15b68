//! Thin FFT helpers over rustfft.
//!
//! Frames are treated as one period of a periodic signal, so every spectral
//! operation here is circular. Planners and scratch are created per call;
//! invocations are independent and safe to run in parallel.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// In-place forward FFT (unnormalized).
pub fn fft_in_place(data: &mut [Complex64]) {
    let fft = FftPlanner::new().plan_fft_forward(data.len());
    fft.process(data);
}

/// In-place inverse FFT, normalized by 1/N.
pub fn ifft_in_place(data: &mut [Complex64]) {
    let n = data.len();
    let fft = FftPlanner::new().plan_fft_inverse(n);
    fft.process(data);
    let scale = 1.0 / n as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Forward FFT of a real signal.
pub fn fft_real(data: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_in_place(&mut buf);
    buf
}

/// Signed frequency (Hz) of FFT bin `k` for an `n`-point transform.
pub fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    let k = k as isize;
    let n = n as isize;
    let signed = if k <= n / 2 { k } else { k - n };
    signed as f64 * sample_rate / n as f64
}

/// Band-limited upsampling of a real signal by an integer factor.
///
/// Zero-pads the spectrum between the positive- and negative-frequency
/// halves; an even-length Nyquist bin is split across its two images so the
/// output stays real. Exact for signals confined below the input Nyquist.
pub fn upsample_real(data: &[f64], factor: usize) -> Vec<f64> {
    assert!(factor >= 1);
    if factor == 1 {
        return data.to_vec();
    }
    let n = data.len();
    let m = n * factor;
    let spec = fft_real(data);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    if n % 2 == 0 {
        padded[..half].copy_from_slice(&spec[..half]);
        // Nyquist bin split keeps conjugate symmetry.
        padded[half] = 0.5 * spec[half];
        padded[m - half] = 0.5 * spec[half];
        for k in 1..half {
            padded[m - k] = spec[n - k];
        }
    } else {
        padded[..=half].copy_from_slice(&spec[..=half]);
        for k in 1..=half {
            padded[m - k] = spec[n - k];
        }
    }
    ifft_in_place(&mut padded);
    padded.iter().map(|v| v.re * factor as f64).collect()
}

/// Keep every `factor`-th sample.
pub fn decimate<T: Copy>(data: &[T], factor: usize) -> Vec<T> {
    assert!(factor >= 1);
    data.iter().step_by(factor).copied().collect()
}
