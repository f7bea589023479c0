//! Numerical laboratory for coupled nonlinear Schrödinger systems
//!
//! The library covers the full pipeline: a symbolic layer for polynomial
//! potentials and their Wirtinger-derived nonlinearities, a periodic
//! pseudospectral grid, a Petviashvili ground-state solver, a split-step
//! time integrator with blow-up detection, and the conserved-quantity /
//! virial diagnostics that feed the global-existence-vs-blow-up classifier.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod groundstate;
pub mod nonlinearity;
pub mod spectral;

pub use error::CoreError;
pub use nonlinearity::{Monomial, Nonlinearity, Potential, SystemSpec};
pub use spectral::{FieldState, GridSpec};

pub type Complex = num_complex::Complex64;
