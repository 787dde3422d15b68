//! Hardware cost model for N-user downstream quantum access networks, in
//! photodetector-cost units.
//!
//! The head-end terminal contributes one tunable laser in every scheme; the
//! per-user receivers differ: two SPADs for phase-encoding DV, two balanced
//! homodyne detectors for CV (plus a local-oscillator laser per user in the
//! LLO variant), and a single photodetector for direct detection.

use crate::{Error, Result};

/// Downstream access-network scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Phase-encoding discrete-variable QAN.
    Dv,
    /// Transmitted-local-oscillator CV QAN.
    Tlo,
    /// Local-local-oscillator CV QAN.
    Llo,
    /// Direct-detection CV QAN.
    Dd,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Dv, Scheme::Tlo, Scheme::Llo, Scheme::Dd];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Dv => "dv",
            Scheme::Tlo => "tlo",
            Scheme::Llo => "llo",
            Scheme::Dd => "dd",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dv" => Ok(Scheme::Dv),
            "tlo" => Ok(Scheme::Tlo),
            "llo" => Ok(Scheme::Llo),
            "dd" => Ok(Scheme::Dd),
            other => Err(Error::InvalidCost(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Component cost multipliers relative to one photodetector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub pd: f64,
    pub bhd: f64,
    pub spad: f64,
    pub tunable_laser: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self { pd: 1.0, bhd: 4.0, spad: 10.0, tunable_laser: 20.0 }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pd", self.pd),
            ("bhd", self.bhd),
            ("spad", self.spad),
            ("tunable_laser", self.tunable_laser),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidCost(format!("{name} multiplier must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Per-user receiver cost for a scheme.
    pub fn qnu_cost(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Dv => 2.0 * self.spad,
            Scheme::Tlo => 2.0 * self.bhd,
            Scheme::Llo => 2.0 * self.bhd + self.tunable_laser,
            Scheme::Dd => self.pd,
        }
    }
}

/// Total network cost: one head-end laser plus `n_users` receivers.
///
/// With default multipliers: dv = 20 + 20N, tlo = 20 + 8N, llo = 20 + 28N,
/// dd = 20 + N.
pub fn network_cost(scheme: Scheme, n_users: usize, model: &CostModel) -> Result<f64> {
    model.validate()?;
    if n_users == 0 {
        return Err(Error::InvalidCost("n_users must be >= 1".into()));
    }
    Ok(model.tunable_laser + n_users as f64 * model.qnu_cost(scheme))
}
