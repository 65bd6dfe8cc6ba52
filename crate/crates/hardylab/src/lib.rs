//! A numerical laboratory for the quadratic-exponential decay machinery of
//! Schrödinger and heat evolutions: spectral flows on a periodic grid,
//! Gaussian-weighted norms with tail diagnostics, logarithmic-convexity
//! traces, the Appell space-time transformation, Carleman-type inequalities
//! on smooth bumps, and an explicit construction showing where the formal
//! convexity argument breaks.
//!
//! Everything is one-dimensional, deterministic, and built to be checked:
//! each quantitative claim ships with an independent closed-form or
//! quadrature oracle in the test suite.

// Validations use `!(v > 0.0)` on purpose: the negation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod analytic;
pub mod appell;
pub mod carleman;
pub mod cli;
pub mod convexity;
pub mod counterexample;
pub mod error;
pub mod grid;
pub mod hardy;
pub mod propagator;
pub mod quad;
pub mod weight;

pub use error::{Error, Result};
