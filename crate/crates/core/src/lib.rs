//! Numerical laboratory for finite-time blow-up of semilinear wave
//! equations with combined nonlinearities `F(u, u_t)`.
//!
//! * [`model`]: closed-form exponents, admissible region, lifespan catalog.
//! * [`special`]: the test functions `φ₁`, `ψ₁`.
//! * [`odecmp`]: the comparison ODE `F'' = k (1+t)^{-α} F^β` integrated to blow-up.
//! * [`solver`]: radial finite-volume solver with lifespan extraction.
//! * [`functionals`]: integral functionals, inequality monitors and the
//!   exterior characteristic-grid oracle.
//! * [`harness`]: sweeps, power-law fits, CSV and JSON reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod functionals;
pub mod harness;
pub mod model;
pub mod odecmp;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
