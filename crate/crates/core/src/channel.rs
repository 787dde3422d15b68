//! Channel models: fiber spans, splitters, fixed losses, and the
//! semiclassical noise fields seen by the receiver.
//!
//! Excess noise is input-referred: a channel `(T, eps)` adds complex Gaussian
//! noise of per-quadrature variance `T*eps/2` at its output, matching the line
//! noise `chi_line = 1/T - 1 + eps` used by the security analysis. Where the
//! noise physically enters is not observable from the receiver side, so the
//! output-injection choice is a convention.

use num_complex::Complex64;

use crate::rng::GaussianSource;
use crate::waveform::{ComplexWaveform, ModulationParams, PulseFilter, SymbolFrame};
use crate::{Error, Result};

/// One element of a channel path.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSegment {
    /// Fiber span with attenuation `alpha_db_per_km`.
    Fiber {
        length_km: f64,
        alpha_db_per_km: f64,
        /// Excess noise contribution referred to the segment input (SNU).
        excess_noise: f64,
    },
    /// 1xN splitter; `loss_db = 10*log10(N)` when ideal.
    Splitter { loss_db: f64, excess_noise: f64 },
    /// Any other fixed attenuation (connectors, VOA, excess insertion loss).
    FixedLoss { loss_db: f64, excess_noise: f64 },
}

impl ChannelSegment {
    pub fn fiber(length_km: f64, alpha_db_per_km: f64) -> Self {
        ChannelSegment::Fiber { length_km, alpha_db_per_km, excess_noise: 0.0 }
    }

    pub fn loss_db(&self) -> f64 {
        match *self {
            ChannelSegment::Fiber { length_km, alpha_db_per_km, .. } => {
                length_km * alpha_db_per_km
            }
            ChannelSegment::Splitter { loss_db, .. } => loss_db,
            ChannelSegment::FixedLoss { loss_db, .. } => loss_db,
        }
    }

    pub fn excess_noise(&self) -> f64 {
        match *self {
            ChannelSegment::Fiber { excess_noise, .. } => excess_noise,
            ChannelSegment::Splitter { excess_noise, .. } => excess_noise,
            ChannelSegment::FixedLoss { excess_noise, .. } => excess_noise,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.loss_db() < 0.0 {
            return Err(Error::InvalidChannel(format!(
                "segment loss must be >= 0 dB, got {}",
                self.loss_db()
            )));
        }
        if self.excess_noise() < 0.0 {
            return Err(Error::InvalidChannel(format!(
                "excess noise must be >= 0, got {}",
                self.excess_noise()
            )));
        }
        Ok(())
    }
}

/// Power transmittance of one segment (`10^(-loss_db/10)`).
pub fn segment_transmittance(seg: &ChannelSegment) -> f64 {
    10f64.powf(-seg.loss_db() / 10.0)
}

/// Detector model for one receiving user.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverModel {
    /// Quantum efficiency in (0, 1].
    pub eta: f64,
    /// Electronic noise variance added to the photocurrent (physical units).
    pub v_el_physical: f64,
}

impl ReceiverModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidChannel(format!(
                "quantum efficiency must lie in (0, 1], got {}",
                self.eta
            )));
        }
        if self.v_el_physical < 0.0 {
            return Err(Error::InvalidChannel(
                "electronic noise variance must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Downstream access-network topology: shared trunk, 1xN splitter, and one
/// branch plus receiver per user.
#[derive(Debug, Clone, PartialEq)]
pub struct QanTopology {
    pub trunk: Vec<ChannelSegment>,
    pub splitter: ChannelSegment,
    pub branches: Vec<Vec<ChannelSegment>>,
    pub receivers: Vec<ReceiverModel>,
}

impl QanTopology {
    pub fn n_users(&self) -> usize {
        self.branches.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.branches.is_empty() {
            return Err(Error::InvalidChannel("topology needs at least one user".into()));
        }
        if self.branches.len() != self.receivers.len() {
            return Err(Error::InvalidChannel(format!(
                "{} branches but {} receivers",
                self.branches.len(),
                self.receivers.len()
            )));
        }
        for seg in self.trunk.iter().chain(std::iter::once(&self.splitter)) {
            seg.validate()?;
        }
        for branch in &self.branches {
            for seg in branch {
                seg.validate()?;
            }
        }
        for rx in &self.receivers {
            rx.validate()?;
        }
        Ok(())
    }
}

/// End-to-end channel parameters seen by one user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveChannel {
    /// Transmittance in (0, 1].
    pub transmittance_t: f64,
    /// Input-referred excess noise (SNU).
    pub excess_noise_eps: f64,
}

impl EffectiveChannel {
    pub fn identity() -> Self {
        Self { transmittance_t: 1.0, excess_noise_eps: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.transmittance_t > 0.0 && self.transmittance_t <= 1.0) {
            return Err(Error::InvalidChannel(format!(
                "transmittance must lie in (0, 1], got {}",
                self.transmittance_t
            )));
        }
        if self.excess_noise_eps < 0.0 {
            return Err(Error::InvalidChannel("excess noise must be >= 0".into()));
        }
        Ok(())
    }
}

/// Compose transmittances (product) and excess noises (sum) along the path
/// trunk -> splitter -> branch for the given user.
pub fn compose_effective_channel(topology: &QanTopology, user: usize) -> Result<EffectiveChannel> {
    topology.validate()?;
    if user >= topology.n_users() {
        return Err(Error::UnknownUser { user, n_users: topology.n_users() });
    }
    let path = topology
        .trunk
        .iter()
        .chain(std::iter::once(&topology.splitter))
        .chain(topology.branches[user].iter());
    let mut t = 1.0;
    let mut eps = 0.0;
    for seg in path {
        t *= segment_transmittance(seg);
        eps += seg.excess_noise();
    }
    Ok(EffectiveChannel { transmittance_t: t, excess_noise_eps: eps })
}

/// Propagate a waveform through an effective channel: amplitude scales by
/// `sqrt(T)` and excess noise of per-quadrature variance `T*eps/2` is added
/// in the modulation band.
///
/// The noise is generated at the symbol level and pulse-shaped onto the same
/// band as the signal (minimum-phase shift plus carrier), so the receiver's
/// estimate of `eps` matches the configured value under the heterodyne
/// convention regardless of the receive filter's exact noise bandwidth.
pub fn propagate(
    wf: &ComplexWaveform,
    channel: &EffectiveChannel,
    params: &ModulationParams,
    seed: u64,
) -> Result<ComplexWaveform> {
    channel.validate()?;
    let amp = channel.transmittance_t.sqrt();
    let mut samples: Vec<Complex64> = wf.samples.iter().map(|&s| s * amp).collect();

    let var_per_quad = channel.transmittance_t * channel.excess_noise_eps / 2.0;
    if var_per_quad > 0.0 {
        let mut src = GaussianSource::new(seed);
        let noise_symbols = SymbolFrame {
            symbols: (0..params.n_symbols).map(|_| src.complex(var_per_quad)).collect(),
            v_a_nominal: None,
        };
        let filter = PulseFilter::new(params)?;
        let shaped = ComplexWaveform::new(filter.shape(&noise_symbols), wf.sample_rate, wf.t0);
        let in_band = shaped.rotated(params.bandwidth_b / 2.0 + params.f_car);
        for (s, n) in samples.iter_mut().zip(&in_band.samples) {
            *s += n;
        }
    }
    Ok(ComplexWaveform::new(samples, wf.sample_rate, wf.t0))
}

/// Add the semiclassical vacuum field: white complex Gaussian noise across
/// the full simulated band with per-sample quadrature variance
/// `scale * (sample_rate / symbol_rate) / 2`, i.e. `scale/2` per quadrature
/// within one symbol-rate band.
///
/// The Kramers-Kronig pipeline picks up one such unit from the signal band
/// and one from the image band, so the raw shot-noise unit measured by
/// calibration is `2 * V_vac` with `V_vac = scale/2`. The absolute scale
/// cancels after normalization.
pub fn inject_vacuum(
    wf: &ComplexWaveform,
    scale: f64,
    params: &ModulationParams,
    seed: u64,
) -> Result<ComplexWaveform> {
    if scale < 0.0 {
        return Err(Error::InvalidChannel(format!("vacuum scale must be >= 0, got {scale}")));
    }
    if scale == 0.0 {
        return Ok(wf.clone());
    }
    let per_sample = scale * params.samples_per_symbol as f64 / 2.0;
    let mut src = GaussianSource::new(seed);
    let samples = wf.samples.iter().map(|&s| s + src.complex(per_sample)).collect();
    Ok(ComplexWaveform::new(samples, wf.sample_rate, wf.t0))
}
