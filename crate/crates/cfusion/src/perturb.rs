//! Perturbation stability and the synthesis pseudoinverse.
//!
//! A frame `(F, v)` absorbs a perturbed Bessel family `(G, w)` when
//! `|(T_F - T_G Q) c| <= lam |T_F c| + eps |c|` for all fiber fields `c`
//! and `lam + eps sqrt(B_F / A_F) < 1`. The check here samples the
//! inequality on seeded random probes and certifies the conclusion through
//! the operator defect `|I - T_G Q T_F^dag|`, which the proof chain bounds
//! by the same budget.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::CFusionFrame;
use crate::numerics::{self, Tolerances};
use crate::qdual::{self, QOperator};
use crate::CMat;

/// Absolute slack allowed when probing the displayed inequality.
pub const PROBE_SLACK: f64 = 1e-10;

/// Constants of the perturbation hypothesis. The second constant is
/// named `eps` rather than the conventional mu, which denotes measure
/// masses everywhere else in this crate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PerturbationParams {
    pub lam: f64,
    pub eps: f64,
}

impl PerturbationParams {
    pub fn new(lam: f64, eps: f64) -> Result<Self> {
        if lam < 0.0 || eps < 0.0 || !lam.is_finite() || !eps.is_finite() {
            return Err(Error::ConstraintViolation(format!(
                "perturbation constants must be nonnegative, got lam {lam:e}, eps {eps:e}"
            )));
        }
        Ok(Self { lam, eps })
    }
}

/// Why a perturbation check did not conclude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationFailure {
    /// `lam + eps sqrt(B/A) >= 1`.
    HypothesisViolated,
    /// Some probe violated the displayed inequality.
    ProbeViolations,
    /// `|I - T_G Q T_F^dag|` exceeded the hypothesis budget.
    DefectExceedsBudget,
}

/// Outcome of a perturbation check.
#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    /// `1 - (lam + eps sqrt(B_F/A_F))`.
    pub hypothesis_margin: f64,
    /// Probes violating the inequality beyond [`PROBE_SLACK`].
    pub probe_violations: usize,
    pub probes: usize,
    /// `|I - T_G Q T_F^dag|`.
    pub defect_norm: f64,
    /// `((1 - defect) / (sqrt(B_F/A_F) |Q|))^2`, the proved lower frame
    /// bound for `(G, w)`.
    pub guaranteed_lower: f64,
    /// `lambda_min(S_G)` actually observed.
    pub actual_lower: f64,
    pub concluded: bool,
    pub reason: Option<PerturbationFailure>,
    pub seed: u64,
}

/// Right inverse of the synthesis operator, `T^dag = T^* S^{-1}`, as a
/// `K x n` matrix.
pub fn pseudoinverse_matrix(f: &CFusionFrame, tol: &Tolerances) -> Result<CMat> {
    let s_inv = f.frame_operator_inverse(tol)?;
    Ok(f.analysis_matrix() * s_inv)
}

/// Checks the perturbation hypothesis on `trials` seeded random unit
/// fields and certifies the conclusion through the operator defect.
pub fn perturbation_check(
    f: &CFusionFrame,
    g: &CFusionFrame,
    q: &QOperator,
    params: &PerturbationParams,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<PerturbationReport> {
    if !f.compatible_with(g) {
        return Err(Error::ShapeMismatch(
            "F and G must share the same measure space and ambient dimension".into(),
        ));
    }
    q.check_compatible(f, g)?;

    let bounds_f = f.frame_bounds(tol);
    if !bounds_f.is_frame() {
        return Err(Error::NotAFrame {
            lower: bounds_f.lower,
        });
    }
    let condition = (bounds_f.upper / bounds_f.lower).sqrt();
    let budget = params.lam + params.eps * condition;
    let hypothesis_margin = 1.0 - budget;

    let t_f = f.synthesis_matrix();
    let t_g_q = g.synthesis_matrix() * q.matrix();
    let difference = &t_f - &t_g_q;

    let n = f.ambient_dim();
    let pseudo = pseudoinverse_matrix(f, tol)?;
    let defect_norm =
        numerics::spectral_norm(&(CMat::identity(n, n) - &t_g_q * &pseudo));
    let guaranteed_lower = {
        let numerator = (1.0 - defect_norm).max(0.0);
        (numerator / (condition * q.norm())).powi(2)
    };
    let actual_lower = g.frame_bounds(tol).lower;

    if hypothesis_margin <= 0.0 {
        return Ok(PerturbationReport {
            hypothesis_margin,
            probe_violations: 0,
            probes: 0,
            defect_norm,
            guaranteed_lower,
            actual_lower,
            concluded: false,
            reason: Some(PerturbationFailure::HypothesisViolated),
            seed,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = f.total_fiber_dim();
    let mut probe_violations = 0;
    for _ in 0..trials {
        let c = qdual::random_unit_vector(k, &mut rng);
        let lhs = (&difference * &c).norm();
        let rhs = params.lam * (&t_f * &c).norm() + params.eps;
        if lhs > rhs + PROBE_SLACK {
            probe_violations += 1;
        }
    }

    // The proof chain needs the defect to stay within the hypothesis
    // budget; inequality checks get the usual one-sided slack.
    let defect_ok = defect_norm <= budget + tol.residual_tol;
    let concluded = probe_violations == 0 && defect_ok;
    let reason = if concluded {
        None
    } else if probe_violations > 0 {
        Some(PerturbationFailure::ProbeViolations)
    } else {
        Some(PerturbationFailure::DefectExceedsBudget)
    };

    Ok(PerturbationReport {
        hypothesis_margin,
        probe_violations,
        probes: trials,
        defect_norm,
        guaranteed_lower,
        actual_lower,
        concluded,
        reason,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{MeasureSpace, Subspace, WeightMap};
    use crate::CVec;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn cvec(data: &[f64]) -> CVec {
        CVec::from_iterator(data.len(), data.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn shear_family() -> CFusionFrame {
        let fibers = vec![
            Subspace::from_spanning(&[cvec(&[1.0, 0.0])], &tol()).unwrap(),
            Subspace::from_spanning(&[cvec(&[1.0, 1.0])], &tol()).unwrap(),
        ];
        CFusionFrame::from_fusion_frame(fibers, &[1.0, 1.0]).unwrap()
    }

    fn disk_family(m1: f64, m2: f64) -> CFusionFrame {
        CFusionFrame::new(
            MeasureSpace::new([("B1", m1), ("B2", m2)]).unwrap(),
            vec![
                Subspace::from_spanning(&[cvec(&[1.0, 0.0])], &tol()).unwrap(),
                Subspace::from_spanning(&[cvec(&[0.0, 1.0])], &tol()).unwrap(),
            ],
            WeightMap::new(vec![1.0 / m1.sqrt(), 1.0 / m2.sqrt()]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn pseudoinverse_of_parseval_is_adjoint() {
        let f = disk_family(1.5, 2.0);
        let pseudo = pseudoinverse_matrix(&f, &tol()).unwrap();
        let analysis = f.analysis_matrix();
        assert!(numerics::spectral_norm(&(&pseudo - &analysis)) <= 1e-10);
        assert!(numerics::spectral_norm(&pseudo) <= 1.0 + 1e-10);
    }

    #[test]
    fn pseudoinverse_single_atom() {
        let f = CFusionFrame::new(
            MeasureSpace::new([("x", 4.0)]).unwrap(),
            vec![Subspace::full(2)],
            WeightMap::uniform(1, 1.0).unwrap(),
        )
        .unwrap();
        // T = 2 I, S = 4 I, so T^dag = T^*/4 = I/2 and T T^dag = I.
        let pseudo = pseudoinverse_matrix(&f, &tol()).unwrap();
        assert!(
            numerics::spectral_norm(&(&pseudo - CMat::identity(2, 2).unscale(2.0))) <= 1e-12
        );
        let product = f.synthesis_matrix() * &pseudo;
        assert!(numerics::spectral_norm(&(product - CMat::identity(2, 2))) <= 1e-9);
    }

    #[test]
    fn pseudoinverse_identities_on_shear_family() {
        let f = shear_family();
        let pseudo = pseudoinverse_matrix(&f, &tol()).unwrap();
        let product = f.synthesis_matrix() * &pseudo;
        assert!(numerics::spectral_norm(&(product - CMat::identity(2, 2))) <= 1e-10);
        let bounds = f.frame_bounds(&tol());
        let cap = (bounds.upper / bounds.lower).sqrt();
        assert!(numerics::spectral_norm(&pseudo) <= cap + 1e-8);
        assert_abs_diff_eq!(cap, 1.0 + 2.0_f64.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn pseudoinverse_norm_is_inverse_root_of_lower_bound() {
        // T+^* T+ = S^{-1}, so |T+| = 1/sqrt(A) exactly; the cap
        // sqrt(B/A) is attained only through B >= 1.
        let f = shear_family();
        let pseudo = pseudoinverse_matrix(&f, &tol()).unwrap();
        let bounds = f.frame_bounds(&tol());
        assert_abs_diff_eq!(
            numerics::spectral_norm(&pseudo),
            1.0 / bounds.lower.sqrt(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn pseudoinverse_requires_frame() {
        let e1 = Subspace::from_spanning(&[cvec(&[1.0, 0.0])], &tol()).unwrap();
        let f = CFusionFrame::from_fusion_frame(vec![e1.clone(), e1], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            pseudoinverse_matrix(&f, &tol()),
            Err(Error::NotAFrame { .. })
        ));
    }

    #[test]
    fn zero_perturbation_concludes() {
        let f = shear_family();
        let dims = f.fiber_dims();
        let blocks: Vec<CMat> = dims.iter().map(|&k| CMat::identity(k, k)).collect();
        let q = QOperator::from_blocks(&blocks).unwrap();
        let params = PerturbationParams::new(0.0, 0.0).unwrap();
        let report = perturbation_check(&f, &f, &q, &params, 200, 3, &tol()).unwrap();
        assert!(report.concluded);
        assert_eq!(report.probe_violations, 0);
        assert!(report.defect_norm <= 1e-10);
        assert!(report.actual_lower >= report.guaranteed_lower - 1e-8);
    }

    #[test]
    fn scaled_weight_perturbation_concludes() {
        // Scale the first weight of the Parseval disk family by 0.9 and use
        // identity-shaped Q: |T_F - T_G Q| = 0.1 exactly.
        let f = disk_family(1.5, 2.0);
        let mut weights = f.weights().values().to_vec();
        weights[0] *= 0.9;
        let g = CFusionFrame::new(
            f.space().clone(),
            f.fibers().to_vec(),
            WeightMap::new(weights).unwrap(),
        )
        .unwrap();
        let blocks: Vec<CMat> = f.fiber_dims().iter().map(|&k| CMat::identity(k, k)).collect();
        let q = QOperator::from_blocks(&blocks).unwrap();

        let diff = f.synthesis_matrix() - g.synthesis_matrix() * q.matrix();
        assert_abs_diff_eq!(numerics::spectral_norm(&diff), 0.1, epsilon = 1e-12);

        let params = PerturbationParams::new(0.0, 0.1).unwrap();
        let report = perturbation_check(&f, &g, &q, &params, 500, 11, &tol()).unwrap();
        assert_abs_diff_eq!(report.hypothesis_margin, 0.9, epsilon = 1e-10);
        assert!(report.concluded);
        assert_eq!(report.probe_violations, 0);
        assert!(g.frame_bounds(&tol()).is_frame());
        assert!(report.actual_lower >= report.guaranteed_lower - 1e-8);
    }

    #[test]
    fn violated_hypothesis_reports_reason() {
        let f = shear_family();
        let blocks: Vec<CMat> = f.fiber_dims().iter().map(|&k| CMat::identity(k, k)).collect();
        let q = QOperator::from_blocks(&blocks).unwrap();
        let params = PerturbationParams::new(0.7, 0.5).unwrap();
        let report = perturbation_check(&f, &f, &q, &params, 100, 3, &tol()).unwrap();
        assert!(!report.concluded);
        assert_eq!(report.reason, Some(PerturbationFailure::HypothesisViolated));
        assert_eq!(report.probes, 0);
    }

    #[test]
    fn params_validate() {
        assert!(PerturbationParams::new(0.0, 0.0).is_ok());
        assert!(PerturbationParams::new(-0.1, 0.0).is_err());
        assert!(PerturbationParams::new(0.0, f64::NAN).is_err());
    }
}
