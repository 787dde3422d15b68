//! End-to-end frame pipeline: transmitter construction, channel, and the
//! full receive chain, with deterministic per-frame seed derivation.
//!
//! The receive chain models quantum efficiency as an amplitude factor
//! `sqrt(eta)` applied to everything arriving from the channel, after which
//! the full-scale vacuum field is injected at the detector (a beam splitter
//! of transmittance `eta` leaves the vacuum level unchanged, so a single
//! injection at the detector is exact). Electronic noise enters the
//! photocurrent after detection.

use num_complex::Complex64;

use crate::channel::{inject_vacuum, propagate, EffectiveChannel};
use crate::receiver::{
    cross_correlate, demodulate_with, direct_detect, estimate_dc, kk_recover, KkDiagnostics,
    PhotocurrentTrace, RecoveredFrame,
};
use crate::rng::{derive_seed, Stream};
use crate::waveform::{
    add_carrier, generate_symbols, to_minimum_phase, ComplexWaveform, ModulationParams,
    PulseFilter, SymbolFrame,
};
use crate::Result;

/// Receiver-side physical and DSP settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverChain {
    /// Quantum efficiency in (0, 1].
    pub eta: f64,
    /// Photoelectric conversion coefficient.
    pub mu: f64,
    /// Electronic noise variance added to the photocurrent (physical units).
    pub elec_noise_variance: f64,
    /// Vacuum injection scale; `V_vac = scale/2` per quadrature per band.
    pub vacuum_scale: f64,
    /// Band-limited upsampling factor for the KK nonlinearity.
    pub upsample_factor: usize,
}

impl Default for ReceiverChain {
    fn default() -> Self {
        Self {
            eta: 1.0,
            mu: 1.0,
            elec_noise_variance: 0.0,
            vacuum_scale: 2.0,
            upsample_factor: 4,
        }
    }
}

/// Output of one receive pass.
#[derive(Debug, Clone)]
pub struct RxOutput {
    pub recovered: RecoveredFrame,
    pub kk: KkDiagnostics,
    /// Mean photocurrent over the frame (the constant C used by the
    /// electronic-noise calibration).
    pub photocurrent_mean: f64,
}

/// One data frame end to end.
#[derive(Debug, Clone)]
pub struct FrameRun {
    pub tx: SymbolFrame,
    pub rx: RxOutput,
    pub correlation_lag: i64,
    pub correlation_peak: f64,
}

/// Cached per-configuration state for running frames.
pub struct FramePipeline {
    params: ModulationParams,
    filter: PulseFilter,
}

impl FramePipeline {
    pub fn new(params: ModulationParams) -> Result<Self> {
        params.validate()?;
        let filter = PulseFilter::new(&params)?;
        Ok(Self { params, filter })
    }

    pub fn params(&self) -> &ModulationParams {
        &self.params
    }

    /// Build the transmitted field for a data frame: symbols, pulse train,
    /// minimum-phase construction, carrier.
    pub fn transmit(&self, symbol_seed: u64) -> Result<(SymbolFrame, ComplexWaveform)> {
        let mut p = self.params.clone();
        p.seed = symbol_seed;
        let frame = generate_symbols(&p)?;
        let baseband =
            ComplexWaveform::new(self.filter.shape(&frame), p.sample_rate(), 0.0);
        let mp = to_minimum_phase(&baseband, &p);
        let tx = add_carrier(&mp, p.f_car)?;
        Ok((frame, tx))
    }

    /// DC-only transmitted field used for shot-noise calibration.
    pub fn transmit_dc_only(&self) -> Result<ComplexWaveform> {
        let p = &self.params;
        let zeros = ComplexWaveform::new(
            vec![Complex64::new(0.0, 0.0); p.samples_per_frame()],
            p.sample_rate(),
            0.0,
        );
        let mp = to_minimum_phase(&zeros, p);
        add_carrier(&mp, p.f_car)
    }

    /// Front half of the receive chain: quantum efficiency, vacuum
    /// injection, square-law detection with electronic noise.
    pub fn detect(
        &self,
        arriving: &ComplexWaveform,
        rx: &ReceiverChain,
        vacuum_seed: u64,
        electronic_seed: u64,
    ) -> Result<PhotocurrentTrace> {
        let root_eta = rx.eta.sqrt();
        let attenuated = ComplexWaveform::new(
            arriving.samples.iter().map(|&s| s * root_eta).collect(),
            arriving.sample_rate,
            arriving.t0,
        );
        let with_vacuum = inject_vacuum(&attenuated, rx.vacuum_scale, &self.params, vacuum_seed)?;
        Ok(direct_detect(&with_vacuum, rx.mu, rx.elec_noise_variance, electronic_seed))
    }

    /// Back half of the receive chain: KK recovery, DC estimation,
    /// demodulation.
    pub fn recover(&self, trace: &PhotocurrentTrace, rx: &ReceiverChain) -> Result<RxOutput> {
        let photocurrent_mean = trace.mean();
        let (recovered_wf, kk) = kk_recover(trace, rx.upsample_factor)?;
        let a_r = estimate_dc(&recovered_wf);
        let recovered = demodulate_with(&self.filter, &recovered_wf, a_r, &self.params)?;
        Ok(RxOutput { recovered, kk, photocurrent_mean })
    }

    /// Receive chain: quantum efficiency, vacuum injection, detection,
    /// KK recovery, DC estimation, demodulation.
    pub fn receive(
        &self,
        arriving: &ComplexWaveform,
        rx: &ReceiverChain,
        vacuum_seed: u64,
        electronic_seed: u64,
    ) -> Result<RxOutput> {
        let trace = self.detect(arriving, rx, vacuum_seed, electronic_seed)?;
        self.recover(&trace, rx)
    }

    /// Run one data frame through channel and receiver; seeds derive from
    /// `master_seed` and the frame index.
    pub fn run_data_frame(
        &self,
        channel: &EffectiveChannel,
        rx: &ReceiverChain,
        master_seed: u64,
        frame_index: u64,
    ) -> Result<FrameRun> {
        let (tx_frame, tx_wf) = self.transmit(derive_seed(master_seed, Stream::Symbols, frame_index))?;
        let arrived = propagate(
            &tx_wf,
            channel,
            &self.params,
            derive_seed(master_seed, Stream::ExcessNoise, frame_index),
        )?;
        let rx_out = self.receive(
            &arrived,
            rx,
            derive_seed(master_seed, Stream::Vacuum, frame_index),
            derive_seed(master_seed, Stream::Electronic, frame_index),
        )?;
        let (lag, peak) = cross_correlate(&rx_out.recovered.symbols, &tx_frame)?;
        Ok(FrameRun {
            tx: tx_frame,
            rx: rx_out,
            correlation_lag: lag,
            correlation_peak: peak,
        })
    }

    /// Run one vacuum-only (DC plus vacuum) frame through a reference
    /// attenuation; used by shot-noise calibration and SNU self-checks.
    pub fn run_vacuum_frame(
        &self,
        reference: &EffectiveChannel,
        rx: &ReceiverChain,
        master_seed: u64,
        frame_index: u64,
    ) -> Result<RxOutput> {
        let tx_wf = self.transmit_dc_only()?;
        let arrived = propagate(
            &tx_wf,
            reference,
            &self.params,
            derive_seed(master_seed, Stream::ExcessNoise, frame_index),
        )?;
        self.receive(
            &arrived,
            rx,
            derive_seed(master_seed, Stream::Vacuum, frame_index),
            derive_seed(master_seed, Stream::Electronic, frame_index),
        )
    }
}
