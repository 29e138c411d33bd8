//! Tolerance-governed numerical kernels.
//!
//! Every floating-point policy of the crate lives here: the numerical-rank
//! cutoff (singular values below `rank_tol` times the largest are zero), the
//! one-sided slack `residual_tol` used when testing operator identities and
//! inequalities, and the eigenvalue slack `psd_tol` below which a Hermitian
//! matrix is not accepted as positive definite.

use nalgebra::{ColPivQR, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMat, CVec, Scalar};

/// Absolute asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Numerical tolerances shared by all modules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for numerical rank decisions.
    pub rank_tol: f64,
    /// Slack for operator-identity residuals and inequality checks.
    pub residual_tol: f64,
    /// Eigenvalue slack for positive-(semi)definiteness decisions.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: 1e-10,
            residual_tol: 1e-8,
            psd_tol: 1e-10,
        }
    }
}

impl Tolerances {
    /// Builds a tolerance set, rejecting non-positive values and a rank
    /// cutoff of one or more.
    pub fn new(rank_tol: f64, residual_tol: f64, psd_tol: f64) -> Result<Self> {
        let ok = rank_tol > 0.0 && residual_tol > 0.0 && psd_tol > 0.0 && rank_tol < 1.0;
        if !ok {
            return Err(Error::ConstraintViolation(format!(
                "tolerances must be strictly positive with rank_tol < 1 \
                 (got rank {rank_tol:e}, residual {residual_tol:e}, psd {psd_tol:e})"
            )));
        }
        Ok(Self {
            rank_tol,
            residual_tol,
            psd_tol,
        })
    }

    /// Same tolerances with a different residual slack.
    pub fn with_residual_tol(mut self, residual_tol: f64) -> Self {
        self.residual_tol = residual_tol;
        self
    }
}

/// Largest absolute entry of a matrix.
pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Invariant("matrix has non-finite entries".into()))
    }
}

/// Orthonormalizes spanning vectors by modified Gram-Schmidt in input order.
///
/// Vectors whose residual after projection falls at or below
/// `rank_tol * max_input_norm` are dropped, so the column count of the
/// result is the numerical rank of the input. Inputs that are already
/// orthonormal to 1e-12 are returned unchanged, which keeps serialized
/// bases bit-stable across a write/read cycle.
pub fn orthonormalize(vectors: &[CVec], tol: &Tolerances) -> Result<CMat> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::ConstraintViolation("no spanning vectors given".into()))?;
    let n = first.len();
    if n == 0 {
        return Err(Error::ConstraintViolation("vectors must have dimension >= 1".into()));
    }
    for v in vectors {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
    }

    if already_orthonormal(vectors) {
        return Ok(CMat::from_columns(vectors));
    }

    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale <= 0.0 || !scale.is_finite() {
        return Err(Error::AllVectorsNumericallyZero);
    }

    let mut basis: Vec<CVec> = Vec::new();
    for v in vectors {
        let mut u = v.clone();
        // Two projection sweeps: plain MGS can lose orthogonality for
        // nearly dependent inputs.
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&u);
                u -= b * coeff;
            }
        }
        let norm = u.norm();
        if norm > tol.rank_tol * scale {
            basis.push(u.unscale(norm));
        }
    }
    if basis.is_empty() {
        return Err(Error::AllVectorsNumericallyZero);
    }
    Ok(CMat::from_columns(&basis))
}

fn already_orthonormal(vectors: &[CVec]) -> bool {
    const ORTHO_FAST_PATH_TOL: f64 = 1e-12;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let dot = a.dotc(b);
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - Complex64::new(target, 0.0)).norm() > ORTHO_FAST_PATH_TOL {
                return false;
            }
        }
    }
    true
}

fn hermitian_part(m: &CMat) -> Result<CMat> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::ShapeMismatch(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(m)?;
    let adjoint = m.adjoint();
    let asymmetry = max_abs(&(m - &adjoint));
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }
    Ok((m + adjoint).scale(0.5))
}

/// Smallest and largest eigenvalues of a Hermitian matrix.
///
/// The matrix is symmetrized before decomposition; asymmetry beyond
/// [`HERMITIAN_TOL`] is an error.
pub fn hermitian_extremes(m: &CMat) -> Result<(f64, f64)> {
    let eig = SymmetricEigen::new(hermitian_part(m)?);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &lambda in eig.eigenvalues.iter() {
        lo = lo.min(lambda);
        hi = hi.max(lambda);
    }
    Ok((lo, hi))
}

/// Largest singular value of a rectangular matrix; zero for the zero matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order, computed as eigenvalue square
/// roots of the smaller Gram matrix. The Hermitian eigensolver stays
/// accurate on clustered spectra where a bidiagonal SVD can misconverge;
/// the price is that ratios below sqrt(machine epsilon) read as zero.
pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    let eig = SymmetricEigen::new(gram);
    let mut sv: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank via column-pivoted QR: diagonal entries of R above
/// `rank_tol` times the largest.
pub(crate) fn numerical_rank(m: &CMat, tol: &Tolerances) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let qr = ColPivQR::new(m.clone());
    let r = qr.r();
    let k = m.nrows().min(m.ncols());
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].norm()).collect();
    let top = diag.iter().copied().fold(0.0, f64::max);
    if top <= 0.0 {
        return 0;
    }
    diag.iter().filter(|&&d| d > tol.rank_tol * top).count()
}

/// Minimal-norm least-squares solution of `C x = b` through the normal
/// equations `x = C^* (C C^*)^+ b`, with the pseudoinverse taken by
/// Hermitian eigendecomposition. Returns the solution and its residual.
pub(crate) fn min_norm_least_squares(c: &CMat, b: &CVec) -> (CVec, f64) {
    let gram = c * c.adjoint();
    let eig = SymmetricEigen::new(gram);
    let lam_top = eig.eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    // Eigenvalues at the Gram noise floor are numerical zeros.
    let cutoff = lam_top * 1e-14;
    let mut coeffs = eig.eigenvectors.adjoint() * b;
    for (i, coeff) in coeffs.iter_mut().enumerate() {
        let lam = eig.eigenvalues[i];
        *coeff = if lam > cutoff {
            *coeff / Complex64::new(lam, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let x = c.adjoint() * (&eig.eigenvectors * coeffs);
    let residual = (c * &x - b).norm();
    (x, residual)
}

fn hpd_eigen(m: &CMat, tol: &Tolerances) -> Result<SymmetricEigen<Scalar, nalgebra::Dyn>> {
    let eig = SymmetricEigen::new(hermitian_part(m)?);
    let lambda_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lambda_min <= tol.psd_tol {
        return Err(Error::NotPositiveDefinite { lambda_min });
    }
    Ok(eig)
}

/// Solves `M x = b` for Hermitian positive definite `M` by spectral
/// decomposition.
pub fn solve_hpd(m: &CMat, b: &CVec, tol: &Tolerances) -> Result<CVec> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: b.len(),
        });
    }
    let eig = hpd_eigen(m, tol)?;
    let mut coeffs = eig.eigenvectors.adjoint() * b;
    for (i, c) in coeffs.iter_mut().enumerate() {
        *c /= Complex64::new(eig.eigenvalues[i], 0.0);
    }
    Ok(&eig.eigenvectors * coeffs)
}

/// Inverse of a Hermitian positive definite matrix via its spectral
/// decomposition.
pub(crate) fn hpd_inverse(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    let eig = hpd_eigen(m, tol)?;
    let n = m.nrows();
    let mut inv_diag = CMat::zeros(n, n);
    for i in 0..n {
        inv_diag[(i, i)] = Complex64::new(1.0 / eig.eigenvalues[i], 0.0);
    }
    Ok(&eig.eigenvectors * inv_diag * eig.eigenvectors.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cvec(data: &[f64]) -> CVec {
        CVec::from_iterator(data.len(), data.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    fn cmat(rows: usize, cols: usize, data: &[f64]) -> CMat {
        CMat::from_row_slice(
            rows,
            cols,
            &data.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn orthonormalize_keeps_e1() {
        let tol = Tolerances::default();
        let b = orthonormalize(&[cvec(&[1.0, 0.0])], &tol).unwrap();
        assert_eq!(b.ncols(), 1);
        assert_eq!(b[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(b[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn orthonormalize_collapses_duplicate_direction() {
        let tol = Tolerances::default();
        let b = orthonormalize(&[cvec(&[1.0, 1.0]), cvec(&[2.0, 2.0])], &tol).unwrap();
        assert_eq!(b.ncols(), 1);
        let expected = 1.0 / 2.0_f64.sqrt();
        assert_abs_diff_eq!(b[(0, 0)].re, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(1, 0)].re, expected, epsilon = 1e-14);
    }

    #[test]
    fn orthonormalize_is_order_dependent_gram_schmidt() {
        // {(1,0),(1,1)} must produce e1 then e2, and the result must both be
        // orthonormal and span the inputs (least-squares residual check).
        let tol = Tolerances::default();
        let inputs = [cvec(&[1.0, 0.0]), cvec(&[1.0, 1.0])];
        let b = orthonormalize(&inputs, &tol).unwrap();
        assert_eq!(b.ncols(), 2);
        assert_abs_diff_eq!(b[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[(1, 1)].re, 1.0, epsilon = 1e-12);

        let gram = b.adjoint() * &b;
        assert!(spectral_norm(&(&gram - CMat::identity(2, 2))) <= 1e-10);
        for v in &inputs {
            let coeffs = b.adjoint() * v;
            let residual = (&b * coeffs - v).norm();
            assert!(residual < 1e-10);
        }
    }

    #[test]
    fn orthonormalize_rejects_zero_input() {
        let tol = Tolerances::default();
        let err = orthonormalize(&[cvec(&[0.0, 0.0])], &tol).unwrap_err();
        assert!(matches!(err, Error::AllVectorsNumericallyZero));
    }

    #[test]
    fn orthonormalize_rejects_mixed_dimensions() {
        let tol = Tolerances::default();
        let err = orthonormalize(&[cvec(&[1.0, 0.0]), cvec(&[1.0])], &tol).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 1 }));
    }

    // Oracle: eigenvalues of a real symmetric 2x2 from the characteristic
    // polynomial, lambda = (tr +- sqrt(tr^2 - 4 det)) / 2.
    fn eig2_oracle(a: f64, b: f64, d: f64) -> (f64, f64) {
        let tr = a + d;
        let det = a * d - b * b;
        let disc = (tr * tr - 4.0 * det).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0)
    }

    #[test]
    fn hermitian_extremes_identity() {
        let m = CMat::identity(3, 3);
        let (lo, hi) = hermitian_extremes(&m).unwrap();
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_extremes_matches_2x2_oracle() {
        let m = cmat(2, 2, &[1.5, 0.5, 0.5, 0.5]);
        let (lo, hi) = hermitian_extremes(&m).unwrap();
        let (olo, ohi) = eig2_oracle(1.5, 0.5, 0.5);
        // trace 2, det 0.5 => 1 -+ sqrt(2)/2
        assert_abs_diff_eq!(olo, 1.0 - 2.0_f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lo, olo, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, ohi, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_extremes_diagonal() {
        let m = cmat(2, 2, &[0.0, 0.0, 0.0, 2.0]);
        let (lo, hi) = hermitian_extremes(&m).unwrap();
        assert_abs_diff_eq!(lo, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_extremes_rejects_asymmetry() {
        let m = cmat(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            hermitian_extremes(&m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn spectral_norm_cases() {
        assert_eq!(spectral_norm(&CMat::zeros(2, 3)), 0.0);
        assert_abs_diff_eq!(spectral_norm(&CMat::identity(4, 4)), 1.0, epsilon = 1e-12);
        let m = cmat(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        assert_abs_diff_eq!(spectral_norm(&m), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn solve_hpd_identity_and_scaling() {
        let tol = Tolerances::default();
        let b = cvec(&[3.0, -1.0]);
        let x = solve_hpd(&CMat::identity(2, 2), &b, &tol).unwrap();
        assert!((&x - &b).norm() < 1e-12);
        let x = solve_hpd(&(CMat::identity(2, 2).scale(2.0)), &b, &tol).unwrap();
        assert!((&x - b.unscale(2.0)).norm() < 1e-12);
    }

    #[test]
    fn solve_hpd_matches_adjugate_inverse() {
        // inverse of [[1.5,.5],[.5,.5]] is [[1,-1],[-1,3]] (det = 0.5), so
        // the solution for rhs (1,0) is (1,-1).
        let tol = Tolerances::default();
        let m = cmat(2, 2, &[1.5, 0.5, 0.5, 0.5]);
        let x = solve_hpd(&m, &cvec(&[1.0, 0.0]), &tol).unwrap();
        assert_abs_diff_eq!(x[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1].re, -1.0, epsilon = 1e-12);
        assert!((&m * &x - cvec(&[1.0, 0.0])).norm() <= tol.residual_tol);
    }

    #[test]
    fn solve_hpd_rejects_indefinite() {
        let tol = Tolerances::default();
        let m = cmat(2, 2, &[0.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            solve_hpd(&m, &cvec(&[1.0, 1.0]), &tol),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn hpd_inverse_roundtrip() {
        let tol = Tolerances::default();
        let m = cmat(2, 2, &[1.5, 0.5, 0.5, 0.5]);
        let inv = hpd_inverse(&m, &tol).unwrap();
        assert!(spectral_norm(&(&m * &inv - CMat::identity(2, 2))) < 1e-12);
        assert_abs_diff_eq!(inv[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inv[(1, 1)].re, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::new(1e-10, 1e-8, 1e-10).is_ok());
        assert!(Tolerances::new(0.0, 1e-8, 1e-10).is_err());
        assert!(Tolerances::new(1.5, 1e-8, 1e-10).is_err());
        assert!(Tolerances::new(1e-10, -1.0, 1e-10).is_err());
    }
}
