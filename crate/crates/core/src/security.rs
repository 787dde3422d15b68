//! Secret-key-rate computation for collective attacks under reverse
//! reconciliation, in both asymptotic and finite-size regimes.
//!
//! Direct detection through the KK receiver is statistically equivalent to
//! heterodyne detection after shot-noise normalization, so the heterodyne
//! formulas apply to it throughout; homodyne variants are provided for
//! comparison sweeps. Closed-form symplectic eigenvalues here are
//! cross-checked against the explicit covariance-matrix construction in
//! [`crate::security::covariance`].

pub mod covariance;

use statrs::function::erf::erf_inv;

use crate::channel::{segment_transmittance, ChannelSegment};
use crate::{Error, Result};

/// Detection model used by the security formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    Homodyne,
    /// Also covers direct detection through the KK receiver.
    Heterodyne,
}

/// Trusted parameters entering the key-rate computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityParams {
    /// Modulation variance per quadrature (SNU); `V = v_a + 1`.
    pub v_a: f64,
    /// Channel transmittance in (0, 1].
    pub t: f64,
    /// Input-referred excess noise (SNU).
    pub eps: f64,
    /// Detector quantum efficiency in (0, 1].
    pub eta: f64,
    /// Electronic noise (SNU).
    pub v_el: f64,
    /// Reverse reconciliation efficiency in [0, 1].
    pub beta: f64,
    /// Signal repetition frequency (Hz).
    pub f_rep: f64,
    pub detection: Detection,
}

impl SecurityParams {
    pub fn v(&self) -> f64 {
        self.v_a + 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidSecurity(m));
        if self.v_a < 0.0 {
            return fail(format!("v_a must be >= 0, got {}", self.v_a));
        }
        if !(self.t > 0.0 && self.t <= 1.0) {
            return fail(format!("t must lie in (0, 1], got {}", self.t));
        }
        if self.eps < 0.0 {
            return fail(format!("eps must be >= 0, got {}", self.eps));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return fail(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if self.v_el < 0.0 {
            return fail(format!("v_el must be >= 0, got {}", self.v_el));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return fail(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(self.f_rep > 0.0) {
            return fail(format!("f_rep must be > 0, got {}", self.f_rep));
        }
        Ok(())
    }
}

/// Finite-size block bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSizeParams {
    /// Effective block length N.
    pub n_total: f64,
    /// Symbols kept for key generation, n < N.
    pub n_key: f64,
    /// Smoothing parameter.
    pub eps_smooth: f64,
    /// Privacy-amplification failure probability.
    pub eps_pa: f64,
    /// Parameter-estimation failure probability.
    pub eps_pe: f64,
}

impl FiniteSizeParams {
    /// Block sizes with the probabilities all at 1e-10; `eps_pe` is a
    /// default, not a published value.
    pub fn standard(n_total: f64, n_key: f64) -> Self {
        Self { n_total, n_key, eps_smooth: 1e-10, eps_pa: 1e-10, eps_pe: 1e-10 }
    }

    pub fn m_pe(&self) -> f64 {
        self.n_total - self.n_key
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidFiniteSize(m));
        if !(self.n_total > 0.0 && self.n_key > 0.0 && self.n_key < self.n_total) {
            return fail(format!(
                "need 0 < n_key < n_total, got n_key = {}, n_total = {}",
                self.n_key, self.n_total
            ));
        }
        for (name, v) in [
            ("eps_smooth", self.eps_smooth),
            ("eps_pa", self.eps_pa),
            ("eps_pe", self.eps_pe),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        Ok(())
    }
}

/// Finite-size intermediates reported alongside the rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteSizeTerms {
    pub delta_n: f64,
    pub t_min: f64,
    pub eps_max: f64,
}

/// Key rate with all intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkrResult {
    /// Raw rate; negative values are reported, not hidden.
    pub skr_bps: f64,
    /// `max(skr_bps, 0)`, the value to plot.
    pub skr_clipped_bps: f64,
    /// Mutual information between the communicating parties (bits/symbol).
    pub i_ab: f64,
    /// Holevo bound on the eavesdropper's information (bits/symbol).
    pub chi_be: f64,
    pub lambdas: [f64; 5],
    pub chi_line: f64,
    pub chi_det: f64,
    pub chi_tot: f64,
    pub finite_size: Option<FiniteSizeTerms>,
}

/// Line, detection, and total noise referred to the channel input:
/// `chi_line = 1/T - 1 + eps`, `chi_hom = [(1-eta) + v_el]/eta`,
/// `chi_het = [1 + (1-eta) + 2*v_el]/eta`, `chi_tot = chi_line + chi_det/T`.
pub fn chi_values(p: &SecurityParams) -> Result<(f64, f64, f64)> {
    p.validate()?;
    let chi_line = 1.0 / p.t - 1.0 + p.eps;
    let chi_det = match p.detection {
        Detection::Homodyne => ((1.0 - p.eta) + p.v_el) / p.eta,
        Detection::Heterodyne => (1.0 + (1.0 - p.eta) + 2.0 * p.v_el) / p.eta,
    };
    let chi_tot = chi_line + chi_det / p.t;
    Ok((chi_line, chi_det, chi_tot))
}

fn mutual_information_from(v: f64, chi_tot: f64, detection: Detection) -> f64 {
    let ratio = (v + chi_tot) / (1.0 + chi_tot);
    match detection {
        Detection::Homodyne => 0.5 * ratio.log2(),
        Detection::Heterodyne => ratio.log2(),
    }
}

/// Alice-Bob mutual information in bits/symbol.
pub fn mutual_information(p: &SecurityParams) -> Result<f64> {
    let (_, _, chi_tot) = chi_values(p)?;
    Ok(mutual_information_from(p.v(), chi_tot, p.detection))
}

/// Von Neumann entropy helper `G(x) = (x+1)log2(x+1) - x*log2(x)`, with
/// `G(0) = 0` by limit.
pub fn g_entropy(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::InvalidSecurity(format!("G(x) needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).log2() - x * x.log2())
}

/// Solve `lambda^2 = (s +- sqrt(s^2 - 4*q))/2` with a tolerance on small
/// negative discriminants from cancellation.
fn symplectic_pair(s: f64, q: f64, context: &str) -> Result<(f64, f64)> {
    let disc = s * s - 4.0 * q;
    let tol = 1e-9 * s.abs().max(1.0).powi(2);
    if disc < -tol {
        return Err(Error::SymplecticDiscriminant(format!(
            "{context}: s = {s}, q = {q}, discriminant = {disc}"
        )));
    }
    let root = disc.max(0.0).sqrt();
    let hi = ((s + root) / 2.0).max(0.0).sqrt();
    let lo = ((s - root) / 2.0).max(0.0).sqrt();
    Ok((hi, lo))
}

/// The channel-state coefficients `A = V^2(1-2T) + 2T + T^2(V+chi_line)^2`
/// and `B = T^2(V*chi_line + 1)^2`.
fn channel_coefficients(p: &SecurityParams, chi_line: f64) -> (f64, f64) {
    let v = p.v();
    let a = v * v * (1.0 - 2.0 * p.t) + 2.0 * p.t + p.t * p.t * (v + chi_line) * (v + chi_line);
    let b = p.t * p.t * (v * chi_line + 1.0) * (v * chi_line + 1.0);
    (a, b)
}

/// Symplectic eigenvalues of the shared state after the channel.
pub fn symplectic_channel(p: &SecurityParams) -> Result<(f64, f64)> {
    let (chi_line, _, _) = chi_values(p)?;
    let (a, b) = channel_coefficients(p, chi_line);
    symplectic_pair(a, b, "channel state")
}

/// Symplectic eigenvalues of the conditional state after Bob's measurement;
/// the fifth eigenvalue is always 1.
pub fn symplectic_conditional(p: &SecurityParams) -> Result<(f64, f64, f64)> {
    let (chi_line, chi_det, chi_tot) = chi_values(p)?;
    let (a, b) = channel_coefficients(p, chi_line);
    let v = p.v();
    let sq_b = b.sqrt();
    let denom = p.t * (v + chi_tot);
    let (c, d) = match p.detection {
        Detection::Homodyne => (
            (v * sq_b + p.t * (v + chi_line) + a * chi_det) / denom,
            sq_b * (v + sq_b * chi_det) / denom,
        ),
        Detection::Heterodyne => (
            (a * chi_det * chi_det
                + b
                + 1.0
                + 2.0 * chi_det * (v * sq_b + p.t * (v + chi_line))
                + 2.0 * p.t * (v * v - 1.0))
                / (denom * denom),
            ((v + sq_b * chi_det) / denom).powi(2),
        ),
    };
    let (l3, l4) = symplectic_pair(c, d, "conditional state")?;
    Ok((l3, l4, 1.0))
}

/// Holevo bound `chi_BE = S(E) - S(E|B)`:
/// the channel-state entropy terms minus the conditional ones,
/// `sum_{i=1,2} G((lambda_i-1)/2) - sum_{i=3..5} G((lambda_i-1)/2)`.
///
/// The subtraction convention is validated by the pure-state limit
/// (`chi_BE = 0` at `T = 1, eps = 0, eta = 1, v_el = 0`).
pub fn holevo_bound(p: &SecurityParams) -> Result<f64> {
    let (l1, l2) = symplectic_channel(p)?;
    let (l3, l4, l5) = symplectic_conditional(p)?;
    let g = |l: f64| g_entropy(((l - 1.0) / 2.0).max(0.0));
    Ok(g(l1)? + g(l2)? - g(l3)? - g(l4)? - g(l5)?)
}

fn skr_from_parts(p: &SecurityParams) -> Result<SkrResult> {
    let (chi_line, chi_det, chi_tot) = chi_values(p)?;
    let (l1, l2) = symplectic_channel(p)?;
    let (l3, l4, l5) = symplectic_conditional(p)?;
    let i_ab = mutual_information_from(p.v(), chi_tot, p.detection);
    let g = |l: f64| g_entropy(((l - 1.0) / 2.0).max(0.0));
    let chi_be = g(l1)? + g(l2)? - g(l3)? - g(l4)? - g(l5)?;
    let skr = p.f_rep * (p.beta * i_ab - chi_be);
    Ok(SkrResult {
        skr_bps: skr,
        skr_clipped_bps: skr.max(0.0),
        i_ab,
        chi_be,
        lambdas: [l1, l2, l3, l4, l5],
        chi_line,
        chi_det,
        chi_tot,
        finite_size: None,
    })
}

/// Asymptotic secret key rate `SKR = f*(beta*I_AB - chi_BE)` in bits/s.
pub fn skr_asymptotic(p: &SecurityParams) -> Result<SkrResult> {
    p.validate()?;
    skr_from_parts(p)
}

/// Two-sided Gaussian quantile: `z` such that `P(|Z| > z) = eps_pe`.
pub fn confidence_z(eps_pe: f64) -> Result<f64> {
    if !(eps_pe > 0.0 && eps_pe < 1.0) {
        return Err(Error::InvalidFiniteSize(format!(
            "eps_pe must lie in (0, 1), got {eps_pe}"
        )));
    }
    Ok(std::f64::consts::SQRT_2 * erf_inv(1.0 - eps_pe))
}

/// Finite-size secret key rate
/// `SKR_fs = f*(n/N)*(beta*I_AB - chi_BE - Delta(n))`, evaluated at the
/// worst-case channel `(T_min, eps_max)` within the parameter-estimation
/// confidence region.
///
/// The estimation noise variance is `sigma^2 = 1 + eta*T*eps + v_el`, the
/// deviations are `DeltaT = z*sqrt(sigma^2/(m*V_A))` and
/// `Delta(sigma^2) = z*sigma^2*sqrt(2)/sqrt(m)` with `m = N - n` and
/// `z` the two-sided quantile at `eps_pe`, giving
/// `T_min = (sqrt(eta*T) - DeltaT)^2/eta` and
/// `eps_max = (sigma^2 + Delta(sigma^2) - 1 - v_el)/(eta*T)`.
pub fn skr_finite_size(p: &SecurityParams, fs: &FiniteSizeParams) -> Result<SkrResult> {
    p.validate()?;
    fs.validate()?;
    let m = fs.m_pe();
    let z = confidence_z(fs.eps_pe)?;
    let sigma2 = 1.0 + p.eta * p.t * p.eps + p.v_el;
    let delta_t = z * (sigma2 / (m * p.v_a)).sqrt();
    let root = (p.eta * p.t).sqrt() - delta_t;
    if root <= 0.0 {
        return Err(Error::InvalidFiniteSize(format!(
            "estimation uncertainty swallows the channel: sqrt(eta*T) = {}, DeltaT = {delta_t}",
            (p.eta * p.t).sqrt()
        )));
    }
    let t_min = root * root / p.eta;
    let delta_sigma2 = z * sigma2 * std::f64::consts::SQRT_2 / m.sqrt();
    let eps_max = (sigma2 + delta_sigma2 - 1.0 - p.v_el) / (p.eta * p.t);
    let delta_n = 7.0 * ((1.0 / fs.eps_smooth).log2() / fs.n_key).sqrt()
        + 2.0 / fs.n_key * (1.0 / fs.eps_pa).log2();

    let worst = SecurityParams { t: t_min, eps: eps_max, ..*p };
    worst.validate()?;
    let parts = skr_from_parts(&worst)?;
    let skr = p.f_rep * (fs.n_key / fs.n_total) * (p.beta * parts.i_ab - parts.chi_be - delta_n);
    Ok(SkrResult {
        skr_bps: skr,
        skr_clipped_bps: skr.max(0.0),
        finite_size: Some(FiniteSizeTerms { delta_n, t_min, eps_max }),
        ..parts
    })
}

/// Access-network link model for analytic sweeps: shared splitter loss plus
/// fiber attenuation over the swept distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QanLinkModel {
    pub alpha_db_per_km: f64,
    pub splitter_loss_db: f64,
}

impl QanLinkModel {
    pub fn transmittance(&self, distance_km: f64) -> f64 {
        let seg = ChannelSegment::FixedLoss {
            loss_db: self.alpha_db_per_km * distance_km + self.splitter_loss_db,
            excess_noise: 0.0,
        };
        segment_transmittance(&seg)
    }
}

/// One point of a per-user SKR curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub distance_km: f64,
    pub user: usize,
    pub t_eff: f64,
    pub eps: f64,
    pub skr_asym_bps: f64,
    pub skr_fs_bps: Option<f64>,
    pub i_ab: f64,
    pub chi_be: f64,
}

/// Per-user SKR curves over a distance grid. Each user's `t` field is
/// replaced by the composed splitter-plus-fiber transmittance at every
/// grid point; the remaining parameters are taken as given.
pub fn qan_sweep(
    link: &QanLinkModel,
    users: &[SecurityParams],
    distances_km: &[f64],
    finite_size: Option<&FiniteSizeParams>,
) -> Result<Vec<SweepRow>> {
    if distances_km.is_empty() {
        return Err(Error::InvalidSecurity("empty distance grid".into()));
    }
    if users.is_empty() {
        return Err(Error::InvalidSecurity("sweep needs at least one user".into()));
    }
    let mut rows = Vec::with_capacity(distances_km.len() * users.len());
    for &d in distances_km {
        if d < 0.0 {
            return Err(Error::InvalidSecurity(format!("negative distance {d} km")));
        }
        let t_eff = link.transmittance(d);
        for (u, base) in users.iter().enumerate() {
            let p = SecurityParams { t: t_eff, ..*base };
            let asym = skr_asymptotic(&p)?;
            let fs = match finite_size {
                Some(f) => Some(skr_finite_size(&p, f)?.skr_bps),
                None => None,
            };
            rows.push(SweepRow {
                distance_km: d,
                user: u,
                t_eff,
                eps: p.eps,
                skr_asym_bps: asym.skr_bps,
                skr_fs_bps: fs,
                i_ab: asym.i_ab,
                chi_be: asym.chi_be,
            });
        }
    }
    Ok(rows)
}

/// Quantum efficiency from detector responsivity:
/// `eta = (h*c/q) * Re / lambda`, with SI-exact constants.
pub fn quantum_efficiency_from_responsivity(re_a_per_w: f64, wavelength_m: f64) -> Result<f64> {
    const H: f64 = 6.626_070_15e-34; // Planck constant, J*s (exact)
    const C: f64 = 299_792_458.0; // speed of light, m/s (exact)
    const Q: f64 = 1.602_176_634e-19; // elementary charge, C (exact)
    if !(re_a_per_w > 0.0) {
        return Err(Error::InvalidSecurity(format!(
            "responsivity must be > 0, got {re_a_per_w}"
        )));
    }
    if !(wavelength_m > 0.0) {
        return Err(Error::InvalidSecurity(format!(
            "wavelength must be > 0, got {wavelength_m}"
        )));
    }
    let eta = H * C / Q * re_a_per_w / wavelength_m;
    if eta > 1.0 + 1e-9 {
        return Err(Error::InvalidSecurity(format!(
            "responsivity {re_a_per_w} A/W at {wavelength_m} m implies unphysical eta = {eta}"
        )));
    }
    Ok(eta)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn base_params() -> SecurityParams {
        SecurityParams {
            v_a: 5.0,
            t: 0.5,
            eps: 0.1,
            eta: 0.72,
            v_el: 0.018,
            beta: 0.96,
            f_rep: 1.0e6,
            detection: Detection::Heterodyne,
        }
    }

    fn pure_point() -> SecurityParams {
        SecurityParams {
            v_a: 5.0,
            t: 1.0,
            eps: 0.0,
            eta: 1.0,
            v_el: 0.0,
            beta: 0.96,
            f_rep: 1.0e6,
            detection: Detection::Heterodyne,
        }
    }

    #[test]
    fn chi_reference_values() {
        let p = SecurityParams { eta: 1.0, v_el: 0.0, ..base_params() };
        let (_, chi_det, _) = chi_values(&p).unwrap();
        assert_eq!(chi_det, 1.0);

        let p = SecurityParams { eta: 0.5, v_el: 0.2, ..base_params() };
        let (_, chi_det, _) = chi_values(&p).unwrap();
        assert!((chi_det - 3.8).abs() < 1e-12);

        let p = SecurityParams { t: 1.0, eps: 0.0, ..base_params() };
        let (chi_line, _, _) = chi_values(&p).unwrap();
        assert_eq!(chi_line, 0.0);
    }

    #[test]
    fn mutual_information_reference_values() {
        let p = SecurityParams { v_a: 0.0, ..pure_point() };
        assert_eq!(mutual_information(&p).unwrap(), 0.0);

        let p = pure_point();
        let i = mutual_information(&p).unwrap();
        assert!((i - (3.5f64).log2()).abs() < 1e-12);
        assert!((i - 1.8074).abs() < 1e-4);

        // At equal chi_tot the heterodyne value is exactly twice homodyne.
        let het = mutual_information_from(6.0, 1.3, Detection::Heterodyne);
        let hom = mutual_information_from(6.0, 1.3, Detection::Homodyne);
        assert!((het - 2.0 * hom).abs() < 1e-15);
    }

    #[test]
    fn entropy_helper_values() {
        assert_eq!(g_entropy(0.0).unwrap(), 0.0);
        assert_eq!(g_entropy(1.0).unwrap(), 2.0);
        let g3 = g_entropy(3.0).unwrap();
        assert!((g3 - (8.0 - 3.0 * 3f64.log2())).abs() < 1e-12);
        assert!((g3 - 3.2451).abs() < 1e-4);
        assert!(g_entropy(-0.1).is_err());
    }

    #[test]
    fn channel_eigenvalues_in_pure_limits() {
        let p = SecurityParams { t: 1.0, eps: 0.0, ..base_params() };
        let (l1, l2) = symplectic_channel(&p).unwrap();
        assert!((l1 - 1.0).abs() < 1e-9, "l1 {l1}");
        assert!((l2 - 1.0).abs() < 1e-9, "l2 {l2}");

        let p = SecurityParams { v_a: 0.0, ..base_params() };
        let (l1, l2) = symplectic_channel(&p).unwrap();
        assert!((l1 - 1.0).abs() < 1e-9);
        assert!((l2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn conditional_eigenvalues_in_pure_limit() {
        let p = pure_point();
        // At this point C_het = 2 and D_het = 1 algebraically.
        let (chi_line, chi_det, chi_tot) = chi_values(&p).unwrap();
        assert_eq!((chi_line, chi_det, chi_tot), (0.0, 1.0, 1.0));
        let (l3, l4, l5) = symplectic_conditional(&p).unwrap();
        assert!((l3 - 1.0).abs() < 1e-9);
        assert!((l4 - 1.0).abs() < 1e-9);
        assert_eq!(l5, 1.0);
    }

    #[test]
    fn holevo_is_zero_for_pure_state_and_grows_with_eps() {
        let chi0 = holevo_bound(&pure_point()).unwrap();
        assert!(chi0.abs() < 1e-9, "chi_BE at pure point: {chi0}");

        let mut last = -1.0;
        for k in 0..6 {
            let p = SecurityParams { eps: 0.05 * k as f64, ..base_params() };
            let chi = holevo_bound(&p).unwrap();
            assert!(chi > last, "chi_BE not increasing at eps = {}", p.eps);
            last = chi;
        }
    }

    #[test]
    fn zero_beta_gives_nonpositive_rate() {
        let p = SecurityParams { beta: 0.0, ..base_params() };
        let r = skr_asymptotic(&p).unwrap();
        assert!(r.skr_bps <= 0.0);
        assert_eq!(r.skr_clipped_bps, 0.0);
    }

    #[test]
    fn finite_size_approaches_half_asymptotic() {
        let p = base_params();
        let asym = skr_asymptotic(&p).unwrap();
        let fs = FiniteSizeParams::standard(1e13, 0.5e13);
        let r = skr_finite_size(&p, &fs).unwrap();
        let limit = 0.5 * asym.skr_bps;
        assert!(
            ((r.skr_bps - limit) / limit).abs() < 0.005,
            "finite-size {} vs half-asymptotic {}",
            r.skr_bps,
            limit
        );
        assert!(r.skr_bps <= limit);
    }

    #[test]
    fn finite_size_never_exceeds_scaled_asymptotic() {
        let p = base_params();
        let asym = skr_asymptotic(&p).unwrap();
        for n_total in [1e8, 1e9, 1e10, 1e12] {
            let fs = FiniteSizeParams::standard(n_total, 0.5 * n_total);
            let r = skr_finite_size(&p, &fs).unwrap();
            assert!(r.skr_bps <= 0.5 * asym.skr_bps + 1e-9);
        }
    }

    #[test]
    fn sweep_rejects_empty_grid() {
        let link = QanLinkModel { alpha_db_per_km: 0.2, splitter_loss_db: 6.0 };
        assert!(qan_sweep(&link, &[base_params()], &[], None).is_err());
    }

    #[test]
    fn identical_users_give_identical_curves() {
        let link = QanLinkModel { alpha_db_per_km: 0.2, splitter_loss_db: 6.0 };
        let users = vec![base_params(); 3];
        let grid: Vec<f64> = (0..20).map(|k| k as f64 * 2.5).collect();
        let rows = qan_sweep(&link, &users, &grid, None).unwrap();
        for chunk in rows.chunks(3) {
            assert_eq!(chunk[0].skr_asym_bps, chunk[1].skr_asym_bps);
            assert_eq!(chunk[1].skr_asym_bps, chunk[2].skr_asym_bps);
        }
    }

    #[test]
    fn sweep_matches_point_computation() {
        let link = QanLinkModel { alpha_db_per_km: 0.2, splitter_loss_db: 6.0 };
        let users = vec![base_params()];
        let rows = qan_sweep(&link, &users, &[12.5], None).unwrap();
        let t_eff = 10f64.powf(-(0.2 * 12.5 + 6.0) / 10.0);
        let p = SecurityParams { t: t_eff, ..base_params() };
        let direct = skr_asymptotic(&p).unwrap();
        assert_eq!(rows[0].skr_asym_bps, direct.skr_bps);
    }

    #[test]
    fn quantum_efficiency_reference_values() {
        let eta = quantum_efficiency_from_responsivity(0.9, 1550e-9).unwrap();
        assert!((eta - 0.72).abs() < 1e-3, "eta {eta}");

        let half = quantum_efficiency_from_responsivity(0.45, 1550e-9).unwrap();
        assert!((half - eta / 2.0).abs() < 1e-12);

        // Unit-efficiency responsivity inverts exactly.
        let re_unit = 1.602_176_634e-19 * 1550e-9 / (6.626_070_15e-34 * 299_792_458.0);
        let one = quantum_efficiency_from_responsivity(re_unit, 1550e-9).unwrap();
        assert!((one - 1.0).abs() < 1e-12);

        assert!(quantum_efficiency_from_responsivity(2.0, 1550e-9).is_err());
    }
}
