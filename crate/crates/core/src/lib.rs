//! Desk-scale simulator and analysis toolkit for direct-detection
//! continuous-variable QKD built around a Kramers-Kronig receiver.
//!
//! The crate covers the full chain: Gaussian symbol generation and
//! minimum-phase waveform construction ([`waveform`]), fiber/splitter
//! channel models with vacuum and excess-noise injection ([`channel`]),
//! intensity detection and Hilbert-transform field recovery ([`receiver`]),
//! shot-noise and electronic-noise calibration ([`calibration`]), channel
//! parameter estimation ([`estimation`]), asymptotic and finite-size
//! secret-key-rate computation ([`security`]), and a hardware cost model
//! for N-user downstream access networks ([`economics`]).
//!
//! Conventions used throughout:
//! - Modulation variance `V_A` is per quadrature: `Var(a) = Var(b) = V_A`
//!   for symbols `c = a + ib`, in shot-noise units (SNU).
//! - The shot-noise unit is defined empirically by the calibration pipeline;
//!   the vacuum injection scale is a free knob that cancels after
//!   normalization.
//! - Excess noise is input-referred, so a channel `(T, eps)` adds noise of
//!   per-quadrature variance `T*eps/2` at its output.
//! - After shot-noise normalization a recovered quadrature obeys
//!   `y = sqrt(eta*T/2)*x + z` with `Var(z) = 1 + eta*T*eps/2 + v_el`,
//!   the heterodyne-equivalent measurement model.

pub mod calibration;
pub mod channel;
pub mod economics;
pub mod estimation;
pub mod fft;
pub mod pipeline;
pub mod receiver;
pub mod rng;
pub mod security;
pub mod waveform;

pub use calibration::CalibrationRecord;
pub use channel::{ChannelSegment, EffectiveChannel, QanTopology, ReceiverModel};
pub use economics::{CostModel, Scheme};
pub use estimation::ParameterEstimate;
pub use pipeline::{FramePipeline, ReceiverChain};
pub use security::{Detection, FiniteSizeParams, SecurityParams, SkrResult};
pub use waveform::{ComplexWaveform, ModulationParams, SymbolFrame};

use thiserror::Error;

/// Errors surfaced by the simulation and analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulation parameters: {0}")]
    InvalidModulation(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("unknown user index {user} (topology has {n_users} users)")]
    UnknownUser { user: usize, n_users: usize },
    #[error("aliasing: carrier {f_car_hz} Hz exceeds Nyquist band of {sample_rate_hz} Hz")]
    CarrierAliasing { f_car_hz: f64, sample_rate_hz: f64 },
    #[error("winding undefined: sample {index} lies at the origin")]
    SampleAtOrigin { index: usize },
    #[error("cross-correlation requires non-degenerate inputs: {0}")]
    DegenerateCorrelation(String),
    #[error("DC monitor reference must be nonzero")]
    ZeroDcReference,
    #[error("invalid security parameters: {0}")]
    InvalidSecurity(String),
    #[error("symplectic discriminant violation: {0}")]
    SymplecticDiscriminant(String),
    #[error("invalid finite-size parameters: {0}")]
    InvalidFiniteSize(String),
    #[error("Kramers-Kronig recovery failed: {0}")]
    KkRecovery(String),
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("invalid cost model input: {0}")]
    InvalidCost(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
