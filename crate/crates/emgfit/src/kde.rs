//! Parzen kernel density estimation with a Gaussian kernel.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const FRAC_1_SQRT_2PI: f64 = 0.3989422804014326779;
// fallback when the data have zero spread and no explicit bandwidth was given
const DEGENERATE_BANDWIDTH: f64 = 1e-3;

/// Bandwidth selection for [`kde_evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Silverman's rule of thumb, 1.06 σ̂ n^(-1/5).
    Auto,
    Fixed(f64),
}

/// Evaluation grid and bandwidth for one KDE run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KdeSpec {
    pub bandwidth: Bandwidth,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_points: usize,
}

/// Density curve with the bandwidth that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KdeResult {
    pub bandwidth: f64,
    /// True when zero-spread data forced the fixed fallback bandwidth.
    pub degenerate_fallback: bool,
    pub points: Vec<(f64, f64)>,
}

/// Evaluates (1/(n h)) Σ_i K((g − x_i)/h) with a standard normal kernel on
/// the requested grid.
pub fn kde_evaluate(data: &[f64], spec: &KdeSpec) -> Result<KdeResult> {
    if data.is_empty() {
        return Err(Error::domain("kde_evaluate", "data must be non-empty".to_string()));
    }
    if spec.grid_points < 2 {
        return Err(Error::domain("kde_evaluate", "grid needs at least 2 points".to_string()));
    }
    if !(spec.grid_min < spec.grid_max) {
        return Err(Error::domain(
            "kde_evaluate",
            format!("grid_min {} must be below grid_max {}", spec.grid_min, spec.grid_max),
        ));
    }
    let n = data.len() as f64;
    let mut degenerate = false;
    let h = match spec.bandwidth {
        Bandwidth::Fixed(h) => {
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::domain(
                    "kde_evaluate",
                    format!("bandwidth must be positive and finite, got {h}"),
                ));
            }
            h
        }
        Bandwidth::Auto => {
            let mean = data.iter().sum::<f64>() / n;
            let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            if var == 0.0 {
                degenerate = true;
                eprintln!(
                    "warning: zero-variance data, falling back to bandwidth {DEGENERATE_BANDWIDTH}"
                );
                DEGENERATE_BANDWIDTH
            } else {
                1.06 * var.sqrt() * n.powf(-0.2)
            }
        }
    };

    let step = (spec.grid_max - spec.grid_min) / (spec.grid_points - 1) as f64;
    let points = (0..spec.grid_points)
        .map(|i| {
            let g = spec.grid_min + i as f64 * step;
            let density = data
                .iter()
                .map(|&x| {
                    let u = (g - x) / h;
                    FRAC_1_SQRT_2PI * (-0.5 * u * u).exp()
                })
                .sum::<f64>()
                / (n * h);
            (g, density)
        })
        .collect();
    Ok(KdeResult { bandwidth: h, degenerate_fallback: degenerate, points })
}
