//! Scale-mixture modeling of surface EMG signals.
//!
//! A surface EMG sample is modeled as zero-mean Gaussian whose variance is
//! itself a random variable following an inverse-gamma distribution IG(α, β).
//! Marginally the signal then follows a zero-mean scaled Student-t law, which
//! lets the variance-distribution parameters be estimated by an EM algorithm
//! on the t parameterization (ν = 2α, s = β/α). The crate provides:
//!
//! - [`numerics`]: special functions and reproducible random sampling
//! - [`distributions`]: densities and CDFs for the Gaussian, Laplacian,
//!   inverse-gamma, and scale-mixture (Student-t) laws
//! - [`estimator`]: the EM fit of the variance distribution
//! - [`baselines`]: Gaussian and Laplacian maximum-likelihood baselines
//! - [`gof`]: Anderson-Darling statistics and model comparison
//! - [`simulation`]: synthetic-signal generation and accuracy-grid experiments
//! - [`kde`]: Gaussian-kernel density estimation for result visualization
//! - [`signal`] and [`ingest`]: signal containers, CSV input, and windowing

pub mod baselines;
pub mod distributions;
mod error;
pub mod estimator;
pub mod gof;
pub mod ingest;
pub mod kde;
pub mod numerics;
pub mod signal;
pub mod simulation;

pub use error::{Error, Result};
