//! Explicit covariance-matrix construction for the entanglement-based
//! detector model; the numerically computed symplectic spectrum serves as
//! the independent oracle for the closed-form eigenvalues in the parent
//! module.
//!
//! Source preparation is a two-mode squeezed state of variance `V`; the
//! channel maps the kept mode to variance `T(V + chi_line)`; detector
//! imperfections enter through a beam splitter of transmittance `eta` fed
//! by one arm of an EPR state of variance `v = 1 + v_el/(1-eta)` (homodyne)
//! or `v = 1 + 2*v_el/(1-eta)` (heterodyne). Conditioning on Bob's outcome
//! uses the Moore-Penrose reduction for homodyne and `(gamma_B3 + I)^-1`
//! for heterodyne.

use nalgebra::DMatrix;

use super::{chi_values, Detection, SecurityParams};
use crate::{Error, Result};

/// Matrices and spectra produced by the construction.
#[derive(Debug, Clone)]
pub struct ConditionalCovariance {
    /// Shared state after the channel (4x4).
    pub gamma_ab1: DMatrix<f64>,
    /// Eve-accessible modes before Bob's measurement (6x6; 2x2 in the
    /// eta = 1 limit, where the detector modes decouple).
    pub gamma_afg: DMatrix<f64>,
    /// Cross-covariance between the Eve-accessible modes and Bob's mode.
    pub sigma_afgb3: DMatrix<f64>,
    /// Conditional covariance after Bob's measurement.
    pub gamma_conditional: DMatrix<f64>,
    /// Symplectic spectrum of `gamma_ab1` (the closed-form lambda_1,2).
    pub channel_symplectic: Vec<f64>,
    /// Symplectic spectrum of the conditional matrix (lambda_3,4,5 without
    /// the trailing 1 in the eta = 1 limit path).
    pub conditional_symplectic: Vec<f64>,
}

/// Symplectic eigenvalues of a covariance matrix in (x1, p1, x2, p2, ...)
/// ordering: the moduli of the eigenvalues of `i*Omega*gamma`, one per
/// conjugate pair.
///
/// Computed as the singular values of the antisymmetric matrix
/// `gamma^(1/2) * Omega * gamma^(1/2)` (each appears twice), which shares
/// the spectrum of `i*Omega*gamma` but only needs a symmetric
/// eigendecomposition and an SVD; both stay stable where nonsymmetric QR on
/// `Omega*gamma` stalls for near-singular detector models.
pub fn symplectic_eigenvalues(gamma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = gamma.nrows();
    if dim % 2 != 0 || gamma.ncols() != dim {
        return Err(Error::SymplecticDiscriminant(format!(
            "covariance matrix must be square with even dimension, got {dim}x{}",
            gamma.ncols()
        )));
    }
    let n_modes = dim / 2;
    let mut omega = DMatrix::<f64>::zeros(dim, dim);
    for m in 0..n_modes {
        omega[(2 * m, 2 * m + 1)] = 1.0;
        omega[(2 * m + 1, 2 * m)] = -1.0;
    }
    let eig = nalgebra::SymmetricEigen::new(gamma.clone());
    for &v in eig.eigenvalues.iter() {
        if v < -1e-9 * eig.eigenvalues.amax() {
            return Err(Error::SymplecticDiscriminant(format!(
                "covariance matrix is not positive semidefinite (eigenvalue {v})"
            )));
        }
    }
    let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let antisym = &root * omega * &root;
    let mut sv: Vec<f64> = antisym.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // Singular values of the antisymmetric form come in equal pairs; keep
    // one of each.
    Ok(sv.into_iter().step_by(2).collect())
}

fn two_mode_squeezed_blocks(var: f64, corr: f64, out: &mut DMatrix<f64>, at: (usize, usize)) {
    let (r, c) = at;
    for q in 0..2 {
        out[(r + q, r + q)] = var;
        out[(c + q, c + q)] = var;
    }
    out[(r, c)] = corr;
    out[(c, r)] = corr;
    out[(r + 1, c + 1)] = -corr;
    out[(c + 1, r + 1)] = -corr;
}

fn gamma_ab1(p: &SecurityParams, chi_line: f64) -> DMatrix<f64> {
    let v = p.v();
    let mut g = DMatrix::<f64>::zeros(4, 4);
    two_mode_squeezed_blocks(v, (p.t * (v * v - 1.0)).sqrt(), &mut g, (0, 2));
    g[(2, 2)] = p.t * (v + chi_line);
    g[(3, 3)] = p.t * (v + chi_line);
    g
}

/// Moore-Penrose pseudo-inverse of the rank-one matrix `Pi_x B Pi_x`
/// appearing in the homodyne reduction.
fn pinv_xx(b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(2, 2);
    if b[(0, 0)] != 0.0 {
        out[(0, 0)] = 1.0 / b[(0, 0)];
    }
    out
}

/// Build the detector-model covariance matrices and their symplectic
/// spectra.
///
/// `eta = 1` diverges the EPR variance `v`; that case takes the documented
/// limit path: the detector beam splitter is removed and the conditional
/// reduction is applied directly to the channel state, which requires
/// `v_el = 0` (electronic noise cannot be purified without the beam
/// splitter; use the closed forms there, which remain finite).
pub fn build_conditional_covariance(p: &SecurityParams) -> Result<ConditionalCovariance> {
    p.validate()?;
    let (chi_line, _, _) = chi_values(p)?;
    let g_ab1 = gamma_ab1(p, chi_line);
    let channel_symplectic = symplectic_eigenvalues(&g_ab1)?;

    if p.eta == 1.0 {
        if p.v_el != 0.0 {
            return Err(Error::InvalidSecurity(
                "matrix construction is singular at eta = 1 with v_el > 0; \
                 the closed-form path handles this limit"
                    .into(),
            ));
        }
        let gamma_a = g_ab1.view((0, 0), (2, 2)).into_owned();
        let sigma = g_ab1.view((0, 2), (2, 2)).into_owned();
        let gamma_b = g_ab1.view((2, 2), (2, 2)).into_owned();
        let reduction = match p.detection {
            Detection::Homodyne => pinv_xx(&gamma_b),
            Detection::Heterodyne => (gamma_b + DMatrix::identity(2, 2))
                .try_inverse()
                .ok_or_else(|| {
                    Error::SymplecticDiscriminant("gamma_B + I is singular".into())
                })?,
        };
        let conditional = &gamma_a - &sigma * reduction * sigma.transpose();
        let conditional_symplectic = symplectic_eigenvalues(&conditional)?;
        return Ok(ConditionalCovariance {
            gamma_ab1: g_ab1,
            gamma_afg: gamma_a,
            sigma_afgb3: sigma,
            gamma_conditional: conditional,
            channel_symplectic,
            conditional_symplectic,
        });
    }

    let v_epr = match p.detection {
        Detection::Homodyne => 1.0 + p.v_el / (1.0 - p.eta),
        Detection::Heterodyne => 1.0 + 2.0 * p.v_el / (1.0 - p.eta),
    };

    // Modes ordered (A, B2, F0, G).
    let mut g4 = DMatrix::<f64>::zeros(8, 8);
    g4.view_mut((0, 0), (4, 4)).copy_from(&g_ab1);
    two_mode_squeezed_blocks(v_epr, (v_epr * v_epr - 1.0).sqrt(), &mut g4, (4, 6));

    // Detector beam splitter mixing B2 and F0.
    let mut y1 = DMatrix::<f64>::identity(8, 8);
    let (rt, rr) = (p.eta.sqrt(), (1.0 - p.eta).sqrt());
    for q in 0..2 {
        y1[(2 + q, 2 + q)] = rt;
        y1[(2 + q, 4 + q)] = rr;
        y1[(4 + q, 2 + q)] = -rr;
        y1[(4 + q, 4 + q)] = rt;
    }
    let mixed = &y1 * g4 * y1.transpose();

    // Reorder to (A, F, G, B3).
    let perm: [usize; 8] = [0, 1, 4, 5, 6, 7, 2, 3];
    let mut g_afgb = DMatrix::<f64>::zeros(8, 8);
    for (i, &pi) in perm.iter().enumerate() {
        for (j, &pj) in perm.iter().enumerate() {
            g_afgb[(i, j)] = mixed[(pi, pj)];
        }
    }
    let gamma_afg = g_afgb.view((0, 0), (6, 6)).into_owned();
    let sigma_afgb3 = g_afgb.view((0, 6), (6, 2)).into_owned();
    let gamma_b3 = g_afgb.view((6, 6), (2, 2)).into_owned();

    let reduction = match p.detection {
        Detection::Homodyne => pinv_xx(&gamma_b3),
        Detection::Heterodyne => (gamma_b3 + DMatrix::identity(2, 2))
            .try_inverse()
            .ok_or_else(|| Error::SymplecticDiscriminant("gamma_B3 + I is singular".into()))?,
    };
    let gamma_conditional = &gamma_afg - &sigma_afgb3 * reduction * sigma_afgb3.transpose();
    let conditional_symplectic = symplectic_eigenvalues(&gamma_conditional)?;

    Ok(ConditionalCovariance {
        gamma_ab1: g_ab1,
        gamma_afg,
        sigma_afgb3,
        gamma_conditional,
        channel_symplectic,
        conditional_symplectic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::security::{holevo_bound, symplectic_channel, symplectic_conditional};

    fn params(v_a: f64, t: f64, eps: f64, eta: f64, v_el: f64, det: Detection) -> SecurityParams {
        SecurityParams {
            v_a,
            t,
            eps,
            eta,
            v_el,
            beta: 0.96,
            f_rep: 1.0e6,
            detection: det,
        }
    }

    #[test]
    fn diagonal_blocks_match_the_channel_model() {
        let p = params(5.0, 0.5, 0.1, 0.72, 0.018, Detection::Heterodyne);
        let cov = build_conditional_covariance(&p).unwrap();
        let v = p.v();
        let chi_line = 1.0 / p.t - 1.0 + p.eps;
        for q in 0..2 {
            assert!((cov.gamma_ab1[(q, q)] - v).abs() < 1e-12);
            assert!((cov.gamma_ab1[(2 + q, 2 + q)] - p.t * (v + chi_line)).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_forms_match_matrix_spectra() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let mut max_err: f64 = 0.0;
        for _ in 0..200 {
            let p0 = params(
                rng.gen_range(1.0..20.0),
                rng.gen_range(0.01..1.0),
                rng.gen_range(0.0..0.3),
                rng.gen_range(0.3..0.99),
                rng.gen_range(0.0..0.3),
                Detection::Heterodyne,
            );
            for det in [Detection::Homodyne, Detection::Heterodyne] {
                let p = SecurityParams { detection: det, ..p0 };
                let cov = build_conditional_covariance(&p).unwrap();
                let (l1, l2) = symplectic_channel(&p).unwrap();
                let (l3, l4, l5) = symplectic_conditional(&p).unwrap();
                let mut closed = vec![l3, l4, l5];
                closed.sort_by(|a, b| b.partial_cmp(a).unwrap());
                max_err = max_err
                    .max((cov.channel_symplectic[0] - l1.max(l2)).abs())
                    .max((cov.channel_symplectic[1] - l1.min(l2)).abs());
                for (m, c) in cov.conditional_symplectic.iter().zip(&closed) {
                    max_err = max_err.max((m - c).abs());
                }
            }
        }
        assert!(max_err < 1e-9, "max |closed - matrix| = {max_err}");
    }

    #[test]
    fn eta_one_limit_path_matches_closed_form() {
        for det in [Detection::Homodyne, Detection::Heterodyne] {
            let p = params(7.4496, 0.19724, 0.0237, 1.0, 0.0, det);
            let cov = build_conditional_covariance(&p).unwrap();
            let (l3, l4, _) = symplectic_conditional(&p).unwrap();
            // One mode remains; its eigenvalue must match the nontrivial
            // closed-form lambda, the rest being 1.
            assert_eq!(cov.conditional_symplectic.len(), 1);
            let nontrivial = if (l4 - 1.0).abs() < 1e-9 { l3 } else { l4 };
            assert!(
                (cov.conditional_symplectic[0] - nontrivial).abs() < 1e-9,
                "limit path {} vs closed {}",
                cov.conditional_symplectic[0],
                nontrivial
            );
        }
    }

    #[test]
    fn eta_one_with_electronic_noise_is_rejected() {
        let p = params(5.0, 0.5, 0.1, 1.0, 0.1, Detection::Heterodyne);
        assert!(build_conditional_covariance(&p).is_err());
    }

    #[test]
    fn chi_be_converges_into_the_eta_one_limit() {
        // eta -> 1 with v_el > 0: the matrix path must converge to the
        // closed-form value at eta = 1 even though it cannot be evaluated
        // there directly.
        for det in [Detection::Homodyne, Detection::Heterodyne] {
            let at_limit = holevo_bound(&params(7.4496, 0.19724, 0.0237, 1.0, 0.0178, det)).unwrap();
            let mut last = f64::INFINITY;
            for k in 2..=6 {
                let eta = 1.0 - 10f64.powi(-k);
                let p = params(7.4496, 0.19724, 0.0237, eta, 0.0178, det);
                let cov = build_conditional_covariance(&p).unwrap();
                let g = |l: f64| {
                    crate::security::g_entropy(((l - 1.0) / 2.0).max(0.0)).unwrap()
                };
                let chi: f64 = cov.channel_symplectic.iter().map(|&l| g(l)).sum::<f64>()
                    - cov.conditional_symplectic.iter().map(|&l| g(l)).sum::<f64>();
                let err = (chi - at_limit).abs();
                assert!(err < last * 1.01, "not converging at k = {k}: {err} vs {last}");
                last = err;
            }
            assert!(last < 1e-5, "final gap {last}");
        }
    }
}
