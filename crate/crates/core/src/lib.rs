//! Dirichlet spectra of `-y'' + q(x) y` on [0, 1].
//!
//! * [`potential`] describes `q`, its cosine coefficients
//!   `c_m = ∫ q cos(mπx)` and the endpoint hypotheses of the inverse theorem.
//! * [`solver`] computes eigenvalues by sine-basis Galerkin and, as an
//!   independent oracle, by Prüfer shooting.
//! * [`asymptotics`] evaluates the second-order eigenvalue expansion term
//!   by term.
//! * [`harness`] runs the verification experiments and renders reports.

pub mod asymptotics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod potential;
pub mod quadrature;
pub mod solver;

pub use error::{Result, SpectralError};
pub use potential::{CosineCoeffs, PotentialSpec};
