//! Anderson-Darling goodness-of-fit statistic and model comparison.
//!
//! A² = −n − Σ_{i=1..n} (2i−1)/n [ln F(x_i) + ln(1 − F(x_{n+1−i}))] over the
//! ascending order statistics; smaller values indicate a better fit.
//! [`compare_models`] scores one window against the fitted scale-mixture,
//! Gaussian, and Laplacian models the way the model-comparison tables do.

use serde::{Deserialize, Serialize};

use crate::baselines::{gaussian_mle, laplacian_mle};
use crate::distributions::{
    gaussian_cdf, laplacian_cdf, t_cdf, GaussianParams, LaplacianParams, VarianceDistParams,
};
use crate::estimator::{em_fit, EmConfig};
use crate::signal::SignalWindow;
use crate::{Error, Result};

const CDF_CLAMP: f64 = 1e-15;

/// Parameters of one fitted candidate model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FittedModel {
    ScaleMixture(VarianceDistParams),
    Gaussian(GaussianParams),
    Laplacian(LaplacianParams),
}

impl FittedModel {
    pub fn name(&self) -> &'static str {
        match self {
            FittedModel::ScaleMixture(_) => "scale_mixture",
            FittedModel::Gaussian(_) => "gaussian",
            FittedModel::Laplacian(_) => "laplacian",
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            FittedModel::ScaleMixture(p) => t_cdf(x, p.to_t()),
            FittedModel::Gaussian(p) => gaussian_cdf(x, p),
            FittedModel::Laplacian(p) => laplacian_cdf(x, p),
        }
    }
}

/// One row of a model-comparison report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofEntry {
    #[serde(flatten)]
    pub model: FittedModel,
    pub a_squared: f64,
}

/// Per-model AD statistics for one window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofReport {
    pub label: String,
    pub sample_count: usize,
    pub entries: Vec<GofEntry>,
}

impl GofReport {
    pub fn entry(&self, name: &str) -> Option<&GofEntry> {
        self.entries.iter().find(|e| e.model.name() == name)
    }
}

/// Anderson-Darling statistic of the window against an arbitrary model CDF.
///
/// Samples are sorted internally; CDF values are clamped to
/// [1e-15, 1 − 1e-15] before the logarithms so extreme order statistics
/// cannot produce −∞.
pub fn ad_statistic<F: Fn(f64) -> f64>(window: &SignalWindow, cdf: F) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut sorted = window.samples.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let f: Vec<f64> = sorted
        .iter()
        .map(|&x| {
            let v = cdf(x);
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidCdf { value: v, sample: x });
            }
            Ok(v.clamp(CDF_CLAMP, 1.0 - CDF_CLAMP))
        })
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let weight = (2.0 * (i + 1) as f64 - 1.0) / nf;
        sum += weight * (f[i].ln() + (1.0 - f[n - 1 - i]).ln());
    }
    Ok(-nf - sum)
}

/// Fits all three candidate models to the window and scores each with the AD
/// statistic. A model whose fit fails is omitted from the report rather than
/// aborting the comparison.
pub fn compare_models(window: &SignalWindow, config: &EmConfig) -> GofReport {
    let mut entries = Vec::with_capacity(3);

    if let Ok(fit) = em_fit(window, config) {
        let model = FittedModel::ScaleMixture(fit.params);
        if let Ok(a2) = ad_statistic(window, |x| model.cdf(x)) {
            entries.push(GofEntry { model, a_squared: a2 });
        }
    }
    if let Ok(p) = gaussian_mle(window) {
        let model = FittedModel::Gaussian(p);
        if let Ok(a2) = ad_statistic(window, |x| model.cdf(x)) {
            entries.push(GofEntry { model, a_squared: a2 });
        }
    }
    if let Ok(p) = laplacian_mle(window) {
        let model = FittedModel::Laplacian(p);
        if let Ok(a2) = ad_statistic(window, |x| model.cdf(x)) {
            entries.push(GofEntry { model, a_squared: a2 });
        }
    }

    GofReport { label: window.label.clone(), sample_count: window.len(), entries }
}
