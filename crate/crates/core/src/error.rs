//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// A lattice axis has fewer than three cells.
    #[error("axis {axis} has {size} cells; at least 3 are required")]
    SizeTooSmall { axis: usize, size: usize },

    /// Only one- and two-dimensional lattices are supported.
    #[error("unsupported spatial dimension {0}; expected 1 or 2")]
    UnsupportedDimension(usize),

    /// A metric component or a spacing is not strictly positive (or not finite).
    #[error("non-positive {what} value {value} at index {index}")]
    NonPositive { what: &'static str, index: usize, value: f64 },

    /// Vector or table length does not match what the lattice requires.
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },

    /// Form degree is not valid for the requested operation.
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    /// Two objects were expected to live on the same lattice.
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    /// A mass parameter must be strictly positive.
    #[error("mass squared must be positive, got {0}")]
    NonPositiveMass(f64),

    /// A spectral function produced a non-finite value.
    #[error("spectral function is not finite at {0}")]
    SpectralDomain(f64),

    /// The symmetric eigensolver did not reproduce the operator.
    #[error("eigendecomposition residual {0:e} exceeds tolerance")]
    EigenResidual(f64),

    /// Interpolation parameter outside [0, 1].
    #[error("interpolation parameter {value} outside [0,1] at slice {slice}")]
    ChiOutOfRange { slice: usize, value: f64 },

    /// Time-grid parameters are inconsistent.
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// Time step violates the explicit stability bound.
    #[error("time step {dt} violates the stability bound {bound}")]
    StabilityBound { dt: f64, bound: f64 },

    /// A section that must vanish near the temporal boundary does not.
    #[error("margin violation: {0}")]
    MarginViolation(&'static str),

    /// A causal time block could not be factorized.
    #[error("singular time block {0}")]
    SingularBlock(usize),

    /// Cauchy data violate the constraints beyond tolerance.
    #[error("inadmissible Cauchy data: residuals ({r1:e}, {r2:e}) at scale {scale:e}")]
    Inadmissible { r1: f64, r2: f64, scale: f64 },

    /// Malformed user input (window, offsets, names).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, LabError>;
