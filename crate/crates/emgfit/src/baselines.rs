//! Maximum-likelihood fits for the comparison models: zero-mean Gaussian and
//! zero-mean Laplacian.

use crate::distributions::{GaussianParams, LaplacianParams};
use crate::signal::SignalWindow;
use crate::{Error, Result};

/// Zero-mean Gaussian MLE: σ̂² = (1/N) Σ x_n².
pub fn gaussian_mle(window: &SignalWindow) -> Result<GaussianParams> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if window.all_zero() {
        return Err(Error::DegenerateWindow);
    }
    let variance =
        window.samples.iter().map(|x| x * x).sum::<f64>() / window.len() as f64;
    GaussianParams::new(variance)
}

/// Zero-mean Laplacian MLE: b̂ = (1/N) Σ |x_n|.
pub fn laplacian_mle(window: &SignalWindow) -> Result<LaplacianParams> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if window.all_zero() {
        return Err(Error::DegenerateWindow);
    }
    let b = window.samples.iter().map(|x| x.abs()).sum::<f64>() / window.len() as f64;
    LaplacianParams::new(b)
}
