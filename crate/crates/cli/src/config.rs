//! Declarative experiment configuration: TOML schema, validation with
//! field-anchored diagnostics, and conversion into core types.

use serde::Deserialize;

use kkqkd_core::channel::{ChannelSegment, QanTopology, ReceiverModel};
use kkqkd_core::economics::CostModel;
use kkqkd_core::pipeline::ReceiverChain;
use kkqkd_core::security::{Detection, FiniteSizeParams, QanLinkModel, SecurityParams};
use kkqkd_core::waveform::ModulationParams;

/// Error carrying the config location that failed.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Raw TOML this config was parsed from (for the run manifest).
    #[serde(skip)]
    pub source_text: String,
    pub modulation: ModulationConfig,
    #[serde(default)]
    pub dsp: DspConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    pub topology: Option<TopologyConfig>,
    #[serde(default)]
    pub calibration: CalibrationSection,
    pub security: SecurityConfig,
    pub analytic: Option<AnalyticConfig>,
    #[serde(default)]
    pub cost: CostSection,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    pub v_a_snu: f64,
    pub g: f64,
    pub symbol_rate_hz: f64,
    pub samples_per_symbol: usize,
    pub bandwidth_b_hz: f64,
    pub f_car_hz: f64,
    #[serde(default)]
    pub rolloff: f64,
    pub n_symbols: usize,
    #[serde(default = "default_filter_span")]
    pub filter_span_symbols: usize,
}

fn default_filter_span() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DspConfig {
    pub upsample_factor: usize,
}

impl Default for DspConfig {
    fn default() -> Self {
        Self { upsample_factor: 4 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub mu: f64,
    pub vacuum_scale: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self { mu: 1.0, vacuum_scale: 2.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentConfig {
    Fiber {
        length_km: f64,
        alpha_db_per_km: f64,
        #[serde(default)]
        excess_noise_snu: f64,
    },
    Splitter {
        loss_db: f64,
        #[serde(default)]
        excess_noise_snu: f64,
    },
    FixedLoss {
        loss_db: f64,
        #[serde(default)]
        excess_noise_snu: f64,
    },
}

impl SegmentConfig {
    fn to_core(&self) -> ChannelSegment {
        match *self {
            SegmentConfig::Fiber { length_km, alpha_db_per_km, excess_noise_snu } => {
                ChannelSegment::Fiber {
                    length_km,
                    alpha_db_per_km,
                    excess_noise: excess_noise_snu,
                }
            }
            SegmentConfig::Splitter { loss_db, excess_noise_snu } => {
                ChannelSegment::Splitter { loss_db, excess_noise: excess_noise_snu }
            }
            SegmentConfig::FixedLoss { loss_db, excess_noise_snu } => {
                ChannelSegment::FixedLoss { loss_db, excess_noise: excess_noise_snu }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    #[serde(default)]
    pub trunk: Vec<SegmentConfig>,
    pub splitter: SegmentConfig,
    pub users: Vec<UserConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    #[serde(default)]
    pub branch: Vec<SegmentConfig>,
    pub eta: f64,
    /// Electronic noise variance added to the photocurrent (physical units).
    pub elec_noise_variance: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    /// Reference (VOA) attenuation in dB; when absent, each user calibrates
    /// at its own composed channel attenuation.
    pub reference_attenuation_db: Option<f64>,
    #[serde(default = "default_cal_frames")]
    pub frames: usize,
}

fn default_cal_frames() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecurityConfig {
    pub beta: f64,
    pub f_rep_hz: f64,
    #[serde(default = "default_detection")]
    pub detection: String,
    pub finite_size: Option<FiniteSizeConfig>,
}

fn default_detection() -> String {
    "heterodyne".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSizeConfig {
    pub n_total: f64,
    #[serde(default = "default_key_fraction")]
    pub key_fraction: f64,
    #[serde(default = "default_eps")]
    pub eps_smooth: f64,
    #[serde(default = "default_eps")]
    pub eps_pa: f64,
    #[serde(default = "default_eps")]
    pub eps_pe: f64,
}

fn default_key_fraction() -> f64 {
    0.5
}

fn default_eps() -> f64 {
    1e-10
}

impl FiniteSizeConfig {
    pub fn to_core(&self) -> FiniteSizeParams {
        FiniteSizeParams {
            n_total: self.n_total,
            n_key: self.key_fraction * self.n_total,
            eps_smooth: self.eps_smooth,
            eps_pa: self.eps_pa,
            eps_pe: self.eps_pe,
        }
    }
}

/// Analytic (no-waveform) parameters for the `skr` and `sweep` commands.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticConfig {
    pub alpha_db_per_km: f64,
    pub splitter_loss_db: f64,
    /// Total fiber length used by `skr`.
    pub distance_km: f64,
    #[serde(default)]
    pub sweep_min_km: f64,
    #[serde(default = "default_sweep_max")]
    pub sweep_max_km: f64,
    #[serde(default = "default_sweep_step")]
    pub sweep_step_km: f64,
    pub users: Vec<AnalyticUser>,
}

fn default_sweep_max() -> f64 {
    60.0
}

fn default_sweep_step() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticUser {
    pub v_a_snu: f64,
    pub excess_noise_snu: f64,
    pub eta: f64,
    pub v_el_snu: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    pub pd: f64,
    pub bhd: f64,
    pub spad: f64,
    pub tunable_laser: f64,
}

impl Default for CostSection {
    fn default() -> Self {
        let m = CostModel::default();
        Self { pd: m.pd, bhd: m.bhd, spad: m.spad, tunable_laser: m.tunable_laser }
    }
}

impl CostSection {
    pub fn to_core(&self) -> CostModel {
        CostModel {
            pd: self.pd,
            bhd: self.bhd,
            spad: self.spad,
            tunable_laser: self.tunable_laser,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_dc_threshold")]
    pub dc_monitor_threshold: f64,
}

fn default_frames() -> usize {
    30
}

fn default_seed() -> u64 {
    1
}

fn default_dc_threshold() -> f64 {
    0.05
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            frames: default_frames(),
            master_seed: default_seed(),
            dc_monitor_threshold: default_dc_threshold(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.source_text = text.to_string();
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.modulation_params(0)
            .validate()
            .map_err(|e| ConfigError(format!("[modulation]: {e}")))?;
        if self.dsp.upsample_factor == 0 {
            return Err(ConfigError("[dsp].upsample_factor must be >= 1".into()));
        }
        if !(self.detector.mu > 0.0) {
            return Err(ConfigError("[detector].mu must be > 0".into()));
        }
        if self.detector.vacuum_scale < 0.0 {
            return Err(ConfigError("[detector].vacuum_scale must be >= 0".into()));
        }
        if let Some(topo) = &self.topology {
            self.qan_topology_from(topo)
                .validate()
                .map_err(|e| ConfigError(format!("[topology]: {e}")))?;
        }
        self.detection()?;
        if !(self.security.beta >= 0.0 && self.security.beta <= 1.0) {
            return Err(ConfigError(format!(
                "[security].beta must lie in [0, 1], got {}",
                self.security.beta
            )));
        }
        if !(self.security.f_rep_hz > 0.0) {
            return Err(ConfigError("[security].f_rep_hz must be > 0".into()));
        }
        if let Some(fs) = &self.security.finite_size {
            fs.to_core()
                .validate()
                .map_err(|e| ConfigError(format!("[security.finite_size]: {e}")))?;
        }
        if let Some(a) = &self.analytic {
            if a.users.is_empty() {
                return Err(ConfigError("[analytic].users must not be empty".into()));
            }
            if !(a.sweep_step_km > 0.0) {
                return Err(ConfigError("[analytic].sweep_step_km must be > 0".into()));
            }
            for (k, u) in a.users.iter().enumerate() {
                self.security_params_from(u, 1.0)
                    .validate()
                    .map_err(|e| ConfigError(format!("[analytic.users][{k}]: {e}")))?;
            }
        }
        self.cost
            .to_core()
            .validate()
            .map_err(|e| ConfigError(format!("[cost]: {e}")))?;
        if self.run.frames == 0 {
            return Err(ConfigError("[run].frames must be >= 1".into()));
        }
        if self.calibration.frames == 0 {
            return Err(ConfigError("[calibration].frames must be >= 1".into()));
        }
        Ok(())
    }

    pub fn modulation_params(&self, seed: u64) -> ModulationParams {
        let m = &self.modulation;
        ModulationParams {
            v_a: m.v_a_snu,
            g: m.g,
            symbol_rate: m.symbol_rate_hz,
            samples_per_symbol: m.samples_per_symbol,
            bandwidth_b: m.bandwidth_b_hz,
            f_car: m.f_car_hz,
            rolloff: m.rolloff,
            n_symbols: m.n_symbols,
            filter_span_symbols: m.filter_span_symbols,
            seed,
        }
    }

    fn qan_topology_from(&self, topo: &TopologyConfig) -> QanTopology {
        QanTopology {
            trunk: topo.trunk.iter().map(SegmentConfig::to_core).collect(),
            splitter: topo.splitter.to_core(),
            branches: topo
                .users
                .iter()
                .map(|u| u.branch.iter().map(SegmentConfig::to_core).collect())
                .collect(),
            receivers: topo
                .users
                .iter()
                .map(|u| ReceiverModel { eta: u.eta, v_el_physical: u.elec_noise_variance })
                .collect(),
        }
    }

    pub fn qan_topology(&self) -> Result<QanTopology> {
        let topo = self
            .topology
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs a [topology] section".into()))?;
        Ok(self.qan_topology_from(topo))
    }

    pub fn receiver_chain(&self, user: &UserConfig) -> ReceiverChain {
        ReceiverChain {
            eta: user.eta,
            mu: self.detector.mu,
            elec_noise_variance: user.elec_noise_variance,
            vacuum_scale: self.detector.vacuum_scale,
            upsample_factor: self.dsp.upsample_factor,
        }
    }

    pub fn detection(&self) -> Result<Detection> {
        match self.security.detection.as_str() {
            "heterodyne" | "het" | "dd" => Ok(Detection::Heterodyne),
            "homodyne" | "hom" => Ok(Detection::Homodyne),
            other => Err(ConfigError(format!(
                "[security].detection must be homodyne or heterodyne, got `{other}`"
            ))),
        }
    }

    pub fn security_params_from(&self, user: &AnalyticUser, t: f64) -> SecurityParams {
        SecurityParams {
            v_a: user.v_a_snu,
            t,
            eps: user.excess_noise_snu,
            eta: user.eta,
            v_el: user.v_el_snu,
            beta: self.security.beta,
            f_rep: self.security.f_rep_hz,
            detection: Detection::Heterodyne,
        }
    }

    pub fn analytic(&self) -> Result<&AnalyticConfig> {
        self.analytic
            .as_ref()
            .ok_or_else(|| ConfigError("this command needs an [analytic] section".into()))
    }

    pub fn analytic_link(&self) -> Result<QanLinkModel> {
        let a = self.analytic()?;
        Ok(QanLinkModel {
            alpha_db_per_km: a.alpha_db_per_km,
            splitter_loss_db: a.splitter_loss_db,
        })
    }

    pub fn sweep_grid(&self) -> Result<Vec<f64>> {
        let a = self.analytic()?;
        let mut grid = Vec::new();
        let mut d = a.sweep_min_km;
        while d <= a.sweep_max_km + 1e-9 {
            grid.push(d);
            d += a.sweep_step_km;
        }
        Ok(grid)
    }
}

/// Built-in configurations.
pub const PRESETS: [(&str, &str); 2] = [
    ("paper-experiment", include_str!("../presets/paper-experiment.toml")),
    ("fig3-4user", include_str!("../presets/fig3-4user.toml")),
];

pub fn load_preset(name: &str) -> Result<ExperimentConfig> {
    for (preset, text) in PRESETS {
        if preset == name {
            return ExperimentConfig::from_toml_str(text);
        }
    }
    let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
    Err(ConfigError(format!(
        "unknown preset `{name}`; available: {}",
        names.join(", ")
    )))
}

pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
