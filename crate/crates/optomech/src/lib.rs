//! Numerical engine for a two-level atom in a cavity with a vibrating mirror.
//!
//! The crate builds truncated Fock-space operators, assembles the model
//! Hamiltonians, locates avoided crossings, evaluates perturbative effective
//! couplings and integrates the dressed-basis master equation.

pub mod error;
pub mod fockspace;
pub mod lindblad;
pub mod models;
pub mod perturb;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::Real;

/// Operator on a truncated space with `f64` entries.
pub type Operator = fockspace::OperatorMatrix<f64>;
/// Model parameters with `f64` entries.
pub type Params = models::ModelParams<f64>;
