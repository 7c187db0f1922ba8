//! Limiting spectral distributions of symmetric polynomials in sample
//! autocovariance matrices of high-dimensional MA(q) processes.
//!
//! The crate has three layers:
//!
//! * an exact free-probability calculus ([`ncpart`], [`freelimit`], [`laws`])
//!   that computes LSD moments of autocovariance polynomials, closed-form
//!   laws (Marchenko-Pastur, free Bessel, compound free Poisson) and
//!   Stieltjes-equation residual checks;
//! * a Monte Carlo side ([`simkit`]) that simulates MA(q)/IVAR processes,
//!   forms sample autocovariance matrices, extracts spectra and trace
//!   statistics, and exports ECDF/trace CSV data;
//! * statistical procedures ([`inference`]): MA/AR order determination from
//!   ECDF coincidence and trace-based white-noise tests.

pub mod error;
pub mod laws;
pub mod simkit;
pub mod freelimit;
pub mod inference;
pub mod linalg;
pub mod ncpart;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Rat, Scalar};
