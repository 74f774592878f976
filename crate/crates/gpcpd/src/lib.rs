//! Change-point detection in the covariance structure of time series
//! modeled by Gaussian processes.
//!
//! The crate provides the likelihood-ratio tests for covariance changes
//! (general kernel change, structural break, variance switch, scaled
//! covariance) with both theoretical and Monte-Carlo-calibrated thresholds,
//! the mean-change GLRT, Bayesian online change point detection with a GP
//! predictive model, and the confirmatory variant that feeds test verdicts
//! back into the run-length recursion as hazard overrides.
//!
//! Module map:
//! * [`linalg`] — dense symmetric factorizations, solves, eigenvalues
//! * [`kernels`] — RBF kernel and per-family alternative covariances
//! * [`gp`] — marginal likelihood, posterior predictive, hyperparameter fit
//! * [`glrt`] — the hypothesis tests and their thresholds
//! * [`bocpd`] / [`cbocpd`] — online detection
//! * [`synth`] — seeded piecewise-GP scenario generation
//! * [`eval`] — NLL/MSE scoring and paired comparisons
//! * [`io`] / [`report`] — file formats and CLI report schemas

pub mod bocpd;
pub mod cbocpd;
pub mod cli;
pub mod error;
pub mod eval;
pub mod glrt;
pub mod gp;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod report;
mod rng;
pub mod synth;

pub use error::{Error, Result};
