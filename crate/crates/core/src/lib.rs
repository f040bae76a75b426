//! Numerical laboratory for the quantized real Proca field on discrete
//! Hodge complexes.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: periodic spatial lattices, diagonal metrics, incidence
//!   matrices, weights, codifferentials and Laplacians.
//! * [`spectral`]: weighted symmetric eigendecompositions and functions of
//!   `Δ + m²`.
//! * [`spacetime`]: the staggered time-by-space cell complex with a
//!   Lorentzian pairing, the operators `N`, `P`, `Q`, the fiber map `κ` and
//!   adjoints between grids.
//! * [`cauchy`]: constrained Cauchy data, exact ultrastatic evolution, the
//!   symplectic form and the two energy functionals.
//! * [`green`]: retarded and advanced inverses by causal block
//!   substitution and the causal propagator.
//! * [`moller`]: Møller maps between grids with interpolated metrics.
//! * [`states`]: quasifree states, covariances, Wick expansion, pullback
//!   and a positive-frequency diagnostic.

pub mod cauchy;
pub mod error;
pub mod green;
pub mod mesh;
pub mod moller;
pub mod rng;
pub mod sparse;
pub mod spacetime;
pub mod spectral;
pub mod states;

pub use error::{LabError, Result};
