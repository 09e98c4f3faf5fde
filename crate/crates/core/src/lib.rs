//! High-dimensional linear discriminant analysis with ridge regularization.
//!
//! The crate covers the full loop needed to study how the dimension-to-sample
//! ratio degrades two-class Gaussian classification:
//!
//! * [`types`] — problem specifications (means + covariance), spectral models,
//!   datasets, and fitted linear classifiers;
//! * [`classifiers`] — Bayes, LDA, ridge-regularized LDA (RLDA), their
//!   intercept-corrected variants, naive Bayes, and exact conditional error
//!   rates of any linear rule under a known Gaussian model;
//! * [`theory`] — spectral-limit predictions of those error rates, built on a
//!   Marčenko–Pastur fixed-point solver;
//! * [`lambda`] — data-driven selection of the ridge parameter, plus a
//!   cross-validation benchmark;
//! * [`simulate`] — scenario generators and a seeded, replicated simulation
//!   harness comparing empirical errors against theory;
//! * [`verify`] — fast self-checks pairing independent oracles with the
//!   analytic formulas.
//!
//! All numerical work is `f64`; linear systems are solved by Cholesky
//! factorization, never explicit inversion.

pub mod classifiers;
pub mod error;
pub mod lambda;
pub mod linalg;
pub mod simulate;
pub mod stats;
pub mod theory;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
