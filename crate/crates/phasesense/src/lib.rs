//! Sensitivity analysis for two-path interferometric phase estimation with
//! a coherent beam plus squeezed vacuum under photon loss.
//!
//! Two independent computational paths are provided and cross-checked:
//!
//! * [`analytic`] — closed-form Fisher information and the photon-budget
//!   parametrization built on the Gaussian description of the lossy state;
//! * [`fock`] — a brute-force oracle on the truncated Fock space that
//!   diagonalizes the state and solves the symmetric logarithmic derivative
//!   equation directly.
//!
//! [`estimator`] constructs the explicit optimal estimator and simulates
//! the photon-counting measurement that attains it, and [`sweep`] drives
//! parameter sweeps for the command-line front end.

extern crate blas_src;

pub mod analytic;
pub mod error;
pub mod estimator;
pub mod fock;
pub mod guide;
pub mod sweep;

pub use error::{Error, Result};
