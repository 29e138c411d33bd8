//! Q-duality: verification, the canonical construction, the linear solve
//! for Q, uniqueness, the dimension bounds and the norm floor.
//!
//! A Q-dual of `(F, v)` is a second family `(G, w)` over the same measure
//! space together with a bounded fiber-space operator `Q` satisfying
//! `T_G Q T_F^* = I`. In scaled fiber coordinates all three factors are
//! dense matrices, so duality is a residual check and the search for `Q`
//! is a linear least-squares problem in its entries.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::CFusionFrame;
use crate::numerics::{self, Tolerances};
use crate::space;
use crate::{CMat, CVec};

/// Slack for the probe form of the duality identity (condition 5).
pub const PROBE_TOL: f64 = 1e-8;

/// Number of random `(h, k)` pairs probed by condition 5.
pub const PROBE_PAIRS: usize = 50;

/// Slack for the norm-floor inequality.
pub const NORM_FLOOR_TOL: f64 = 1e-10;

/// Slack for the dimension inequalities.
pub const DIMENSION_TOL: f64 = 1e-8;

/// A bounded operator between two fiber coordinate spaces, stored densely
/// together with the per-atom block layout of both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    matrix: CMat,
    domain_dims: Vec<usize>,
    codomain_dims: Vec<usize>,
}

impl QOperator {
    /// Wraps a dense `K_G x K_F` matrix mapping the fiber coordinates of
    /// `domain` into those of `codomain`.
    pub fn dense(matrix: CMat, domain: &CFusionFrame, codomain: &CFusionFrame) -> Result<Self> {
        let (k_g, k_f) = (codomain.total_fiber_dim(), domain.total_fiber_dim());
        if matrix.shape() != (k_g, k_f) {
            return Err(Error::ShapeMismatch(format!(
                "Q must be {k_g}x{k_f}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            matrix,
            domain_dims: domain.fiber_dims(),
            codomain_dims: codomain.fiber_dims(),
        })
    }

    /// Assembles a block-diagonal operator from per-atom blocks.
    pub fn from_blocks(blocks: &[CMat]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::ShapeMismatch("no blocks given".into()));
        }
        let domain_dims: Vec<usize> = blocks.iter().map(|b| b.ncols()).collect();
        let codomain_dims: Vec<usize> = blocks.iter().map(|b| b.nrows()).collect();
        if domain_dims.contains(&0) || codomain_dims.contains(&0) {
            return Err(Error::ShapeMismatch("blocks must be nonempty".into()));
        }
        let mut matrix = CMat::zeros(codomain_dims.iter().sum(), domain_dims.iter().sum());
        let (mut row, mut col) = (0, 0);
        for block in blocks {
            matrix
                .view_mut((row, col), block.shape())
                .copy_from(block);
            row += block.nrows();
            col += block.ncols();
        }
        Ok(Self {
            matrix,
            domain_dims,
            codomain_dims,
        })
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn domain_dims(&self) -> &[usize] {
        &self.domain_dims
    }

    pub fn codomain_dims(&self) -> &[usize] {
        &self.codomain_dims
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        numerics::spectral_norm(&self.matrix)
    }

    /// True when every entry outside the diagonal blocks is exactly zero.
    pub fn is_block_diagonal(&self) -> bool {
        if self.domain_dims.len() != self.codomain_dims.len() {
            return false;
        }
        let zero = Complex64::new(0.0, 0.0);
        let (mut row, mut col) = (0, 0);
        let mut inside = vec![vec![false; self.matrix.ncols()]; self.matrix.nrows()];
        for (r, c) in self.codomain_dims.iter().zip(&self.domain_dims) {
            for marks in inside.iter_mut().skip(row).take(*r) {
                for mark in marks.iter_mut().skip(col).take(*c) {
                    *mark = true;
                }
            }
            row += r;
            col += c;
        }
        inside
            .iter()
            .enumerate()
            .all(|(i, marks)| {
                marks
                    .iter()
                    .enumerate()
                    .all(|(j, &ok)| ok || self.matrix[(i, j)] == zero)
            })
    }

    /// Explicit layout constructor; the block structure must tile the
    /// matrix exactly.
    pub fn from_parts(
        matrix: CMat,
        domain_dims: Vec<usize>,
        codomain_dims: Vec<usize>,
    ) -> Result<Self> {
        let k_f: usize = domain_dims.iter().sum();
        let k_g: usize = codomain_dims.iter().sum();
        if matrix.shape() != (k_g, k_f) || domain_dims.contains(&0) {
            return Err(Error::ShapeMismatch(format!(
                "layout ({k_g}, {k_f}) does not tile a {}x{} matrix",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            matrix,
            domain_dims,
            codomain_dims,
        })
    }

    pub(crate) fn check_compatible(
        &self,
        domain: &CFusionFrame,
        codomain: &CFusionFrame,
    ) -> Result<()> {
        let expected = (codomain.total_fiber_dim(), domain.total_fiber_dim());
        if self.matrix.shape() != expected {
            return Err(Error::ShapeMismatch(format!(
                "Q must be {}x{} for these frames, got {}x{}",
                expected.0,
                expected.1,
                self.matrix.nrows(),
                self.matrix.ncols()
            )));
        }
        Ok(())
    }
}

/// Outcome of the five equivalent duality conditions.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    /// (1) `T_G Q T_F^* = I`.
    pub direct: bool,
    pub direct_residual: f64,
    /// (2) `T_F Q^* T_G^* = I`.
    pub adjoint: bool,
    pub adjoint_residual: f64,
    /// (3) `T_F^*` injective, `T_G Q` surjective, `T_F^* T_G Q` idempotent.
    pub factor: bool,
    /// (4) mirror of (3) with the adjoint operator.
    pub factor_adjoint: bool,
    /// (5) `<h,k> = <Q T_F^* h, T_G^* k>` on random probe pairs.
    pub probe: bool,
    pub probe_max_error: f64,
    pub probe_pairs: usize,
    pub seed: u64,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.direct && self.adjoint && self.factor && self.factor_adjoint && self.probe
    }
}

/// Result of checking a candidate Q-dual.
#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    /// Spectral residual of `T_G Q T_F^* - I`.
    pub residual: f64,
    pub is_dual: bool,
    pub q_norm: f64,
    /// `1 / (dim H * sqrt(B_F B_G))`, the proved lower bound on `|Q|`.
    pub norm_floor: f64,
    pub conditions: ConditionReport,
}

fn injective(m: &CMat, tol: &Tolerances) -> bool {
    // As a map out of its column space: full column rank.
    numerics::numerical_rank(m, tol) == m.ncols()
}

fn surjective(m: &CMat, tol: &Tolerances) -> bool {
    numerics::numerical_rank(m, tol) == m.nrows()
}

fn idempotent(p: &CMat, tol: &Tolerances) -> (bool, f64) {
    let norm = numerics::spectral_norm(p);
    let defect = numerics::spectral_norm(&(p * p - p));
    let scale = norm.powi(2).max(1.0);
    (defect <= tol.residual_tol * scale, defect)
}

/// Draws a random unit vector with a fixed generator.
pub(crate) fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> CVec {
    loop {
        let v = CVec::from_iterator(
            n,
            (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        let norm = v.norm();
        if norm > 1e-3 {
            return v.unscale(norm);
        }
    }
}

/// Evaluates the duality residual and all five equivalent conditions for a
/// candidate `(F, G, Q)` triple. The probe pairs of condition (5) are drawn
/// from `seed` so the report is reproducible.
pub fn verify_duality(
    f: &CFusionFrame,
    g: &CFusionFrame,
    q: &QOperator,
    tol: &Tolerances,
    seed: u64,
) -> Result<DualityReport> {
    if !f.compatible_with(g) {
        return Err(Error::ShapeMismatch(
            "F and G must share the same measure space and ambient dimension".into(),
        ));
    }
    q.check_compatible(f, g)?;

    let n = f.ambient_dim();
    let identity = CMat::identity(n, n);
    let t_f = f.synthesis_matrix();
    let t_g = g.synthesis_matrix();
    let analysis_f = t_f.adjoint();
    let analysis_g = t_g.adjoint();

    // (1) and (2): the products are adjoints of one another, computed
    // independently here so both residuals are measured.
    let direct_product = &t_g * q.matrix() * &analysis_f;
    let direct_residual = numerics::spectral_norm(&(&direct_product - &identity));
    let adjoint_product = &t_f * q.matrix().adjoint() * &analysis_g;
    let adjoint_residual = numerics::spectral_norm(&(&adjoint_product - &identity));

    // (3): T_F^* injective, T_G Q surjective, T_F^* T_G Q idempotent.
    let tg_q = &t_g * q.matrix();
    let p_factor = &analysis_f * &tg_q;
    let (idem3, _) = idempotent(&p_factor, tol);
    let factor = injective(&analysis_f, tol) && surjective(&tg_q, tol) && idem3;

    // (4): mirror with the adjoint operator.
    let tf_qadj = &t_f * q.matrix().adjoint();
    let p_mirror = &analysis_g * &tf_qadj;
    let (idem4, _) = idempotent(&p_mirror, tol);
    let factor_adjoint = injective(&analysis_g, tol) && surjective(&tf_qadj, tol) && idem4;

    // (5): <h,k> = <Q T_F^* h, T_G^* k> on random unit pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe_max_error: f64 = 0.0;
    for _ in 0..PROBE_PAIRS {
        let h = random_unit_vector(n, &mut rng);
        let k = random_unit_vector(n, &mut rng);
        let lhs = h.dotc(&k).conj(); // <h, k> = k^* h
        let left = q.matrix() * &analysis_f * &h;
        let right = &analysis_g * &k;
        let rhs = left.dotc(&right).conj();
        probe_max_error = probe_max_error.max((lhs - rhs).norm());
    }
    let probe = probe_max_error <= PROBE_TOL;

    let bounds_f = f.frame_bounds(tol);
    let bounds_g = g.frame_bounds(tol);
    let q_norm = q.norm();
    let norm_floor = 1.0 / (n as f64 * (bounds_f.upper * bounds_g.upper).sqrt());

    let conditions = ConditionReport {
        direct: direct_residual <= tol.residual_tol,
        direct_residual,
        adjoint: adjoint_residual <= tol.residual_tol,
        adjoint_residual,
        factor,
        factor_adjoint,
        probe,
        probe_max_error,
        probe_pairs: PROBE_PAIRS,
        seed,
    };

    Ok(DualityReport {
        residual: direct_residual,
        is_dual: direct_residual <= tol.residual_tol,
        q_norm,
        norm_floor,
        conditions,
    })
}

/// Builds the canonical Q-dual of a frame: fibers `S^{-1}[F(x)]`, the same
/// weights, and the block-diagonal operator with blocks
/// `B_i^G* S^{-1} B_i^F` (measure and weight factors cancel against the
/// synthesis blocks).
pub fn canonical_qdual(f: &CFusionFrame, tol: &Tolerances) -> Result<(CFusionFrame, QOperator)> {
    let s_inv = f.frame_operator_inverse(tol)?;
    let mut g_fibers = Vec::with_capacity(f.fibers().len());
    let mut blocks = Vec::with_capacity(f.fibers().len());
    for fiber in f.fibers() {
        let image = space::image_subspace(&s_inv, fiber, tol)?;
        blocks.push(image.basis().adjoint() * &s_inv * fiber.basis());
        g_fibers.push(image);
    }
    let g = CFusionFrame::new(f.space().clone(), g_fibers, f.weights().clone())?;
    let q = QOperator::from_blocks(&blocks)?;
    Ok((g, q))
}

/// Minimal-norm solution of the duality identity viewed as a linear system
/// in the entries of Q.
#[derive(Clone, Debug)]
pub struct QSolution {
    /// Minimal-Frobenius-norm dual when the system is consistent.
    pub particular: Option<QOperator>,
    /// Dimension of the homogeneous solution space.
    pub nullspace_dim: usize,
    /// Whether the solution is unique (trivial nullspace).
    pub unique: bool,
    /// Least-squares residual of the constraint system.
    pub residual: f64,
}

/// Poses `T_G Q T_F^* = I` as `n^2` linear constraints on the `K_G * K_F`
/// entries of Q and solves by SVD. Inconsistency is reported, not an error.
pub fn solve_q(f: &CFusionFrame, g: &CFusionFrame, tol: &Tolerances) -> Result<QSolution> {
    if !f.compatible_with(g) {
        return Err(Error::ShapeMismatch(
            "F and G must share the same measure space and ambient dimension".into(),
        ));
    }
    let n = f.ambient_dim();
    let t_g = g.synthesis_matrix();
    let analysis_f = f.analysis_matrix();
    let unknowns = g.total_fiber_dim() * f.total_fiber_dim();

    // vec(T_G Q T_F^*) = (T_F^* ^T kron T_G) vec(Q), column-major.
    let coefficients = analysis_f.transpose().kronecker(&t_g);
    let rhs = CVec::from_iterator(
        n * n,
        CMat::identity(n, n).iter().copied().collect::<Vec<_>>(),
    );

    let rank = numerics::numerical_rank(&coefficients, tol);
    let nullspace_dim = unknowns - rank;

    let (solution, residual) = numerics::min_norm_least_squares(&coefficients, &rhs);
    let consistent = residual <= tol.residual_tol * rhs.norm();

    let particular = if consistent {
        let matrix = CMat::from_iterator(
            g.total_fiber_dim(),
            f.total_fiber_dim(),
            solution.iter().copied(),
        );
        Some(QOperator::dense(matrix, f, g)?)
    } else {
        None
    };

    Ok(QSolution {
        particular,
        nullspace_dim,
        unique: nullspace_dim == 0,
        residual,
    })
}

/// Surjectivity hypothesis under which the duality operator is unique:
/// both analysis operators map onto their fiber spaces.
pub fn uniqueness_hypothesis(f: &CFusionFrame, g: &CFusionFrame, tol: &Tolerances) -> Result<bool> {
    if f.ambient_dim() != g.ambient_dim() {
        return Err(Error::ShapeMismatch(
            "F and G must share the ambient dimension".into(),
        ));
    }
    Ok(analysis_surjective(f, tol) && analysis_surjective(g, tol))
}

fn analysis_surjective(frame: &CFusionFrame, tol: &Tolerances) -> bool {
    let k = frame.total_fiber_dim();
    if k > frame.ambient_dim() {
        return false;
    }
    surjective(&frame.analysis_matrix(), tol)
}

/// The two dimension inequalities tying optimal bounds to weighted fiber
/// dimensions:
/// `A n <= integral v^2 dim F dmu <= B n` and
/// `A <= integral v^2 dmu <= B n`.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionCheck {
    pub lower_scaled: f64,
    pub weighted_dim_integral: f64,
    pub upper_scaled: f64,
    pub holds_first: bool,
    pub weight_integral: f64,
    pub holds_second: bool,
}

pub fn dimension_check(f: &CFusionFrame, tol: &Tolerances) -> DimensionCheck {
    let bounds = f.frame_bounds(tol);
    let n = f.ambient_dim() as f64;
    let weighted_dim_integral: f64 = f
        .fibers()
        .iter()
        .enumerate()
        .map(|(i, fiber)| f.space().mass(i) * f.weights().get(i).powi(2) * fiber.dim() as f64)
        .sum();
    let weight_integral: f64 = (0..f.space().len())
        .map(|i| f.space().mass(i) * f.weights().get(i).powi(2))
        .sum();
    let lower_scaled = bounds.lower * n;
    let upper_scaled = bounds.upper * n;
    let holds_first = lower_scaled <= weighted_dim_integral + DIMENSION_TOL
        && weighted_dim_integral <= upper_scaled + DIMENSION_TOL;
    let holds_second =
        bounds.lower <= weight_integral + DIMENSION_TOL && weight_integral <= upper_scaled + DIMENSION_TOL;
    DimensionCheck {
        lower_scaled,
        weighted_dim_integral,
        upper_scaled,
        holds_first,
        weight_integral,
        holds_second,
    }
}

/// Norm-floor check for a verified dual: `|Q| >= 1 / (n sqrt(B_F B_G))`.
#[derive(Clone, Debug, Serialize)]
pub struct NormFloorCheck {
    pub q_norm: f64,
    pub floor: f64,
    pub holds: bool,
}

pub fn q_norm_floor(
    f: &CFusionFrame,
    g: &CFusionFrame,
    q: &QOperator,
    tol: &Tolerances,
) -> Result<NormFloorCheck> {
    if !f.compatible_with(g) {
        return Err(Error::ShapeMismatch(
            "F and G must share the same measure space and ambient dimension".into(),
        ));
    }
    q.check_compatible(f, g)?;
    let identity = CMat::identity(f.ambient_dim(), f.ambient_dim());
    let product = g.synthesis_matrix() * q.matrix() * f.analysis_matrix();
    let residual = numerics::spectral_norm(&(product - identity));
    if residual > tol.residual_tol {
        return Err(Error::NotADual { residual });
    }
    let q_norm = q.norm();
    let floor = 1.0
        / (f.ambient_dim() as f64
            * (f.frame_bounds(tol).upper * g.frame_bounds(tol).upper).sqrt());
    Ok(NormFloorCheck {
        q_norm,
        floor,
        holds: q_norm >= floor - NORM_FLOOR_TOL,
    })
}
