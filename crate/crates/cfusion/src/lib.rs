//! Continuous fusion frames over finite atomic measure spaces.
//!
//! A continuous fusion frame assigns to every atom of a measure space a
//! closed subspace of a finite-dimensional Hilbert space together with a
//! positive weight. This crate builds the associated synthesis, analysis and
//! frame operators as dense matrices in measure-scaled fiber coordinates,
//! computes optimal frame bounds as spectral extremes, constructs and
//! verifies Q-duals, checks perturbation criteria, and glues per-fiber
//! frames into global continuous frames.
//!
//! Everything is exact desk-scale numerics: finite measure spaces, complex
//! `f64` scalars, and tolerance-governed comparisons. The narrative guide in
//! `book/` walks through the theory; its code snippets compile as doc-tests
//! via the [`guide`] module.

pub mod error;
pub mod numerics;
pub mod space;
pub mod frame;
pub mod qdual;
pub mod perturb;
pub mod localglue;
pub mod scenario;
pub mod random;

pub mod guide;

pub use error::{Error, Result};
pub use frame::{CFusionFrame, FrameBounds, FrameClass};
pub use localglue::{ContinuousFrame, EquivalenceProbe, LocalDualPairReport, LocalFrameFamily};
pub use numerics::{hermitian_extremes, orthonormalize, solve_hpd, spectral_norm, Tolerances};
pub use perturb::{PerturbationParams, PerturbationReport};
pub use qdual::{DimensionCheck, DualityReport, NormFloorCheck, QOperator, QSolution};
pub use space::{image_subspace, MeasureSpace, Subspace, WeightMap};

/// Scalar of the ambient Hilbert space. Real data embeds with zero
/// imaginary part.
pub type Scalar = num_complex::Complex64;

/// Dense matrix over [`Scalar`].
pub type CMat = nalgebra::DMatrix<Scalar>;

/// Dense column vector over [`Scalar`].
pub type CVec = nalgebra::DVector<Scalar>;
