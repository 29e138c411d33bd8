//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, numerics and scenario I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// Every spanning vector fell below the numerical-rank cutoff.
    #[error("all spanning vectors are numerically zero")]
    AllVectorsNumericallyZero,

    /// A matrix expected to be Hermitian was not, beyond tolerance.
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    /// A Hermitian solve was requested on an indefinite or singular matrix.
    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min:.3e})")]
    NotPositiveDefinite { lambda_min: f64 },

    /// An operator required to be invertible is numerically singular.
    #[error("operator is numerically singular")]
    SingularOperator,

    /// A vector required to be nonzero is zero.
    #[error("vector at index {index} is zero")]
    ZeroVector { index: usize },

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Operator/frame shapes are incompatible.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The family has no positive lower frame bound.
    #[error("family is not a frame (lower bound {lower:.3e})")]
    NotAFrame { lower: f64 },

    /// The candidate Q does not satisfy the duality identity.
    #[error("operator is not a dual (residual {residual:.3e})")]
    NotADual { residual: f64 },

    /// A local frame vector leaves its fiber subspace.
    #[error("vector at atom {atom} leaves its fiber (residual {residual:.3e})")]
    FiberViolation { atom: String, residual: f64 },

    /// A per-atom vector family fails to be a frame for its fiber.
    #[error("local family at atom {atom} is not a frame for its fiber (lower bound {lower:.3e})")]
    LocalFamilyNotFrame { atom: String, lower: f64 },

    /// An explicit constructor constraint was violated.
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),

    /// The scenario text is not syntactically valid.
    #[error("parse error: {0}")]
    Parse(String),

    /// The scenario is valid JSON but does not match the schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// The scenario parses but violates a domain invariant.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// Underlying file I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
