//! The c-fusion frame core: weighted subspace families, fiber coordinates,
//! synthesis/analysis/frame operators, optimal bounds and reconstruction.
//!
//! A field `f` with `f(x) in F(x)` is represented by stacked fiber
//! coordinates `c_i = sqrt(mass_i) * B_i^* f(x_i)`, so the Euclidean norm of
//! the coordinate vector equals the L2 norm of the field and matrix spectral
//! norms equal operator norms. In these coordinates the synthesis operator
//! is the `n x K` block matrix with block `i` equal to
//! `sqrt(mass_i) * v_i * B_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, Tolerances};
use crate::space::{MeasureSpace, Subspace, WeightMap};
use crate::{CMat, CVec};

/// Absolute slack used to flag tight and Parseval bounds.
pub const PARSEVAL_TOL: f64 = 1e-8;

/// Classification of a weighted subspace family by its optimal bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameClass {
    /// Positive lower bound: a genuine c-fusion frame.
    Frame,
    /// Upper bound only; the lower bound is numerically zero. Finite
    /// families with all-zero action also land here.
    BesselOnly,
    /// Unbounded above. Cannot occur for finite atomic families; kept so
    /// reports carry the full taxonomy.
    NotBessel,
    /// Reserved degenerate marker; never produced, see `BesselOnly`.
    Degenerate,
}

/// Optimal frame bounds: the spectral extremes of the frame operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub class: FrameClass,
}

impl FrameBounds {
    pub fn is_frame(&self) -> bool {
        self.class == FrameClass::Frame
    }

    /// Equal bounds up to [`PARSEVAL_TOL`] (relative to the upper bound).
    pub fn is_tight(&self) -> bool {
        (self.upper - self.lower).abs() <= PARSEVAL_TOL * self.upper.max(1.0)
    }

    /// Both bounds equal to one up to [`PARSEVAL_TOL`].
    pub fn is_parseval(&self) -> bool {
        (self.lower - 1.0).abs() <= PARSEVAL_TOL && (self.upper - 1.0).abs() <= PARSEVAL_TOL
    }
}

/// A continuous fusion frame over a finite measure space: one subspace and
/// one positive weight per atom.
#[derive(Clone, Debug, PartialEq)]
pub struct CFusionFrame {
    space: MeasureSpace,
    fibers: Vec<Subspace>,
    weights: WeightMap,
}

impl CFusionFrame {
    pub fn new(space: MeasureSpace, fibers: Vec<Subspace>, weights: WeightMap) -> Result<Self> {
        if fibers.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                found: fibers.len(),
            });
        }
        if weights.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                found: weights.len(),
            });
        }
        let n = fibers[0].ambient_dim();
        for fiber in &fibers {
            if fiber.ambient_dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: fiber.ambient_dim(),
                });
            }
        }
        Ok(Self {
            space,
            fibers,
            weights,
        })
    }

    /// Embeds a discrete frame `{h_i}` as one-dimensional fibers
    /// `span{h_i}` with weights `|h_i|` over the counting measure, so the
    /// frame operator equals the discrete `sum h_i h_i^*`.
    pub fn from_discrete_frame(vectors: &[CVec], tol: &Tolerances) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::ConstraintViolation("no frame vectors given".into()));
        }
        let mut fibers = Vec::with_capacity(vectors.len());
        let mut weights = Vec::with_capacity(vectors.len());
        for (index, h) in vectors.iter().enumerate() {
            let norm = h.norm();
            if norm <= 0.0 || norm.is_nan() {
                return Err(Error::ZeroVector { index });
            }
            fibers.push(Subspace::from_spanning(std::slice::from_ref(h), tol)?);
            weights.push(norm);
        }
        Self::new(
            MeasureSpace::counting(vectors.len())?,
            fibers,
            WeightMap::new(weights)?,
        )
    }

    /// Embeds a discrete fusion frame (counting measure, mass one per
    /// index).
    pub fn from_fusion_frame(subspaces: Vec<Subspace>, weights: &[f64]) -> Result<Self> {
        if subspaces.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: subspaces.len(),
                found: weights.len(),
            });
        }
        Self::new(
            MeasureSpace::counting(subspaces.len())?,
            subspaces,
            WeightMap::new(weights.to_vec())?,
        )
    }

    pub fn space(&self) -> &MeasureSpace {
        &self.space
    }

    pub fn fibers(&self) -> &[Subspace] {
        &self.fibers
    }

    pub fn weights(&self) -> &WeightMap {
        &self.weights
    }

    pub fn ambient_dim(&self) -> usize {
        self.fibers[0].ambient_dim()
    }

    /// Fiber dimensions `k_i` in atom order.
    pub fn fiber_dims(&self) -> Vec<usize> {
        self.fibers.iter().map(|f| f.dim()).collect()
    }

    /// Total fiber dimension `K = sum k_i`.
    pub fn total_fiber_dim(&self) -> usize {
        self.fibers.iter().map(|f| f.dim()).sum()
    }

    /// Synthesis operator as an `n x K` matrix; block `i` is
    /// `sqrt(mass_i) * v_i * B_i`.
    pub fn synthesis_matrix(&self) -> CMat {
        let n = self.ambient_dim();
        let mut t = CMat::zeros(n, self.total_fiber_dim());
        let mut col = 0;
        for (i, fiber) in self.fibers.iter().enumerate() {
            let factor = self.space.mass(i).sqrt() * self.weights.get(i);
            let block = fiber.basis().scale(factor);
            t.view_mut((0, col), (n, fiber.dim())).copy_from(&block);
            col += fiber.dim();
        }
        t
    }

    /// Analysis operator `T^*` as a `K x n` matrix.
    pub fn analysis_matrix(&self) -> CMat {
        self.synthesis_matrix().adjoint()
    }

    /// Frame operator `S = sum mass_i v_i^2 pi_i`, Hermitian PSD.
    pub fn frame_operator(&self) -> CMat {
        let n = self.ambient_dim();
        let mut s = CMat::zeros(n, n);
        for (i, fiber) in self.fibers.iter().enumerate() {
            let coeff = self.space.mass(i) * self.weights.get(i) * self.weights.get(i);
            s += fiber.projection().scale(coeff);
        }
        s
    }

    /// Optimal bounds `(A, B)` = spectral extremes of the frame operator.
    pub fn frame_bounds(&self, tol: &Tolerances) -> FrameBounds {
        let s = self.frame_operator();
        let (lower, upper) = numerics::hermitian_extremes(&s)
            .expect("frame operator is Hermitian by construction");
        let class = if lower > tol.psd_tol {
            FrameClass::Frame
        } else {
            FrameClass::BesselOnly
        };
        FrameBounds { lower, upper, class }
    }

    /// Inverse frame operator, available exactly when the family is a
    /// frame.
    pub(crate) fn frame_operator_inverse(&self, tol: &Tolerances) -> Result<CMat> {
        let bounds = self.frame_bounds(tol);
        if !bounds.is_frame() {
            return Err(Error::NotAFrame { lower: bounds.lower });
        }
        numerics::hpd_inverse(&self.frame_operator(), tol)
    }

    /// Reconstructs `h` through the resolution of the identity,
    /// `sum mass_i v_i^2 S^{-1} pi_i h`.
    pub fn reconstruct(&self, h: &CVec, tol: &Tolerances) -> Result<CVec> {
        if h.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: h.len(),
            });
        }
        let s_inv = self.frame_operator_inverse(tol)?;
        let mut out = CVec::zeros(self.ambient_dim());
        for (i, fiber) in self.fibers.iter().enumerate() {
            let coeff = self.space.mass(i) * self.weights.get(i) * self.weights.get(i);
            let projected = fiber.projection() * h;
            out += (&s_inv * projected).scale(coeff);
        }
        Ok(out)
    }

    /// Packs a per-atom field `f(x_i) in F(x_i)` into scaled fiber
    /// coordinates. Rejects fields that leave their fibers.
    pub fn coords_from_field(&self, field: &[CVec], tol: &Tolerances) -> Result<CVec> {
        if field.len() != self.space.len() {
            return Err(Error::DimensionMismatch {
                expected: self.space.len(),
                found: field.len(),
            });
        }
        let mut coords = CVec::zeros(self.total_fiber_dim());
        let mut offset = 0;
        for (i, fiber) in self.fibers.iter().enumerate() {
            let f = &field[i];
            if f.len() != self.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim(),
                    found: f.len(),
                });
            }
            if !fiber.contains(f, tol.residual_tol) {
                return Err(Error::FiberViolation {
                    atom: self.space.atoms()[i].id.clone(),
                    residual: (f - fiber.projection() * f).norm(),
                });
            }
            let block = (fiber.basis().adjoint() * f).scale(self.space.mass(i).sqrt());
            coords.rows_mut(offset, fiber.dim()).copy_from(&block);
            offset += fiber.dim();
        }
        Ok(coords)
    }

    /// Unpacks scaled fiber coordinates into the per-atom field.
    pub fn field_from_coords(&self, coords: &CVec) -> Result<Vec<CVec>> {
        if coords.len() != self.total_fiber_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.total_fiber_dim(),
                found: coords.len(),
            });
        }
        let mut field = Vec::with_capacity(self.space.len());
        let mut offset = 0;
        for (i, fiber) in self.fibers.iter().enumerate() {
            let block = coords.rows(offset, fiber.dim()).into_owned();
            field.push((fiber.basis() * block).unscale(self.space.mass(i).sqrt()));
            offset += fiber.dim();
        }
        Ok(field)
    }

    /// Weighted projection energy `sum mass_i v_i^2 |pi_i h|^2`, the
    /// quadratic form the frame bounds sandwich.
    pub fn projection_energy(&self, h: &CVec) -> f64 {
        self.fibers
            .iter()
            .enumerate()
            .map(|(i, fiber)| {
                let p = fiber.basis().adjoint() * h;
                self.space.mass(i) * self.weights.get(i).powi(2) * p.norm_squared()
            })
            .sum()
    }

    /// True when the two frames share the same measure space and ambient
    /// dimension, the setting required for duality.
    pub fn compatible_with(&self, other: &CFusionFrame) -> bool {
        self.space == other.space && self.ambient_dim() == other.ambient_dim()
    }
}
