//! Seeded, portable random number generation.
//!
//! All stochastic steps in the simulator draw from ChaCha8 streams keyed by
//! a master seed plus a stream label, so every frame is bit-reproducible
//! across runs and platforms. Gaussians come from a Box-Muller transform of
//! explicitly drawn uniforms rather than a library sampler, which keeps the
//! exact output sequence under our control.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Labels for independent noise streams derived from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Symbols,
    ExcessNoise,
    Vacuum,
    Electronic,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Symbols => 0x53594d42,
            Stream::ExcessNoise => 0x45584353,
            Stream::Vacuum => 0x56414355,
            Stream::Electronic => 0x454c4543,
        }
    }
}

/// splitmix64 finalizer; decorrelates structured seed inputs.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive the seed for a given stream and frame index from a master seed.
pub fn derive_seed(master: u64, stream: Stream, index: u64) -> u64 {
    mix(mix(master ^ stream.tag()).wrapping_add(index))
}

/// Derive an independent master seed for a labeled substream (one per user,
/// per calibration campaign, and so on).
pub fn derive_substream(master: u64, label: u64) -> u64 {
    mix(mix(master).wrapping_add(mix(label)))
}

/// Deterministic Gaussian source over a ChaCha8 stream.
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Standard normal via Box-Muller on two uniforms.
    pub fn standard(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        // u1 in (0, 1]: guards the logarithm.
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Real Gaussian with the given variance.
    pub fn real(&mut self, variance: f64) -> f64 {
        self.standard() * variance.sqrt()
    }

    /// Complex Gaussian with the given variance per quadrature.
    pub fn complex(&mut self, variance_per_quadrature: f64) -> Complex64 {
        let s = variance_per_quadrature.sqrt();
        Complex64::new(self.standard() * s, self.standard() * s)
    }
}
