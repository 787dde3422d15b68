//! Shot-noise normalization and channel parameter estimation.
//!
//! After normalization the per-quadrature measurement model is
//! `y = sqrt(eta*T/2)*x + z` with `Var(z) = 1 + eta*T*eps/2 + v_el`: the
//! KK receiver measures both quadratures simultaneously, so the heterodyne
//! convention applies. The estimators treat `eta` and `v_el` as trusted
//! calibrated constants and attribute everything else to the channel.

use crate::calibration::CalibrationRecord;
use crate::receiver::RecoveredFrame;
use crate::waveform::SymbolFrame;
use crate::{Error, Result};

/// Channel parameters inferred from one or more aligned frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterEstimate {
    /// Modulation variance per quadrature (SNU).
    pub v_a_hat: f64,
    /// Channel transmittance.
    pub t_hat: f64,
    /// Input-referred excess noise (SNU). Small negative values are
    /// reported as-is so statistical fluctuation stays visible.
    pub eps_hat: f64,
    pub n_symbols_used: usize,
}

/// Divide both quadratures by `sqrt(snu_per_quadrature)`.
pub fn normalize_to_snu(frame: &RecoveredFrame, cal: &CalibrationRecord) -> Result<SymbolFrame> {
    cal.validate()?;
    let scale = 1.0 / cal.snu_per_quadrature.sqrt();
    Ok(SymbolFrame {
        symbols: frame.symbols.symbols.iter().map(|&c| c * scale).collect(),
        v_a_nominal: None,
    })
}

fn quadrature_means(frame: &SymbolFrame) -> (f64, f64) {
    let n = frame.len() as f64;
    let (mut mx, mut mp) = (0.0, 0.0);
    for c in &frame.symbols {
        mx += c.re;
        mp += c.im;
    }
    (mx / n, mp / n)
}

/// Estimate `(V_A, T, eps)` from aligned transmit/receive frames.
///
/// `v_a_hat` is the per-quadrature variance of the transmitted symbols;
/// the amplitude coupling `t_amp = cov(x, y)/V_A` (averaged over both
/// quadratures) gives `T = 2*t_amp^2/eta`, and the residual variance beyond
/// shot noise and electronic noise gives
/// `eps = (Var(y) - t_amp^2*V_A - 1 - v_el) * 2/(eta*T)`.
pub fn estimate_parameters(
    tx: &SymbolFrame,
    rx_normalized: &SymbolFrame,
    eta: f64,
    v_el: f64,
) -> Result<ParameterEstimate> {
    let n = tx.len();
    if n < 2 || rx_normalized.len() != n {
        return Err(Error::Estimation(format!(
            "frames must be aligned and of equal length >= 2 (tx {}, rx {})",
            tx.len(),
            rx_normalized.len()
        )));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Estimation(format!("eta must lie in (0, 1], got {eta}")));
    }
    let (tx_mx, tx_mp) = quadrature_means(tx);
    let (rx_mx, rx_mp) = quadrature_means(rx_normalized);

    let nf = n as f64;
    let mut var_tx = 0.0;
    let mut var_rx = 0.0;
    let mut cov = 0.0;
    for (t, r) in tx.symbols.iter().zip(&rx_normalized.symbols) {
        let (tx_x, tx_p) = (t.re - tx_mx, t.im - tx_mp);
        let (rx_x, rx_p) = (r.re - rx_mx, r.im - rx_mp);
        var_tx += tx_x * tx_x + tx_p * tx_p;
        var_rx += rx_x * rx_x + rx_p * rx_p;
        cov += tx_x * rx_x + tx_p * rx_p;
    }
    // Both quadratures pooled: divide by 2n.
    let v_a_hat = var_tx / (2.0 * nf);
    let var_rx = var_rx / (2.0 * nf);
    let cov = cov / (2.0 * nf);
    if v_a_hat <= 0.0 {
        return Err(Error::Estimation("transmitted frame has zero variance".into()));
    }

    let t_amp = cov / v_a_hat;
    let t_hat = 2.0 * t_amp * t_amp / eta;
    if t_hat <= 0.0 {
        return Err(Error::Estimation("estimated transmittance is not positive".into()));
    }
    let eps_hat = (var_rx - t_amp * t_amp * v_a_hat - 1.0 - v_el) * 2.0 / (eta * t_hat);
    Ok(ParameterEstimate { v_a_hat, t_hat, eps_hat, n_symbols_used: n })
}
