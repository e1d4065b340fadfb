//! Densities, log-densities, CDFs, and parameter transforms for the model
//! family: zero-mean Gaussian, zero-mean Laplacian, inverse-gamma, and the
//! scale-mixture marginal in its Student-t form.
//!
//! All densities are computed in log space and exponentiated only at the API
//! boundary, so large shape parameters do not overflow the gamma-function
//! ratios.

use serde::{Deserialize, Serialize};

use crate::numerics::{log_gamma_raw, reg_incomplete_beta};
use crate::{Error, Result};

const LN_2PI: f64 = 1.8378770664093454836;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Shape α and scale β of the inverse-gamma variance distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceDistParams {
    pub alpha: f64,
    pub beta: f64,
}

impl VarianceDistParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || !beta.is_finite() || beta <= 0.0 {
            return Err(Error::domain(
                "VarianceDistParams",
                format!("alpha and beta must be positive and finite, got alpha={alpha}, beta={beta}"),
            ));
        }
        Ok(Self { alpha, beta })
    }

    /// Reparameterize to the Student-t form: ν = 2α, s = β/α.
    pub fn to_t(self) -> TDistParams {
        TDistParams { nu: 2.0 * self.alpha, s: self.beta / self.alpha }
    }
}

/// Degrees of freedom ν and scale s of the reparameterized Student-t marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TDistParams {
    pub nu: f64,
    pub s: f64,
}

impl TDistParams {
    pub fn new(nu: f64, s: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= 0.0 || !s.is_finite() || s <= 0.0 {
            return Err(Error::domain(
                "TDistParams",
                format!("nu and s must be positive and finite, got nu={nu}, s={s}"),
            ));
        }
        Ok(Self { nu, s })
    }

    /// Back-transform to variance-distribution parameters: α = ν/2, β = νs/2.
    pub fn to_variance(self) -> VarianceDistParams {
        VarianceDistParams { alpha: self.nu / 2.0, beta: self.nu * self.s / 2.0 }
    }
}

/// Fixed variance of the zero-mean Gaussian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub variance: f64,
}

impl GaussianParams {
    pub fn new(variance: f64) -> Result<Self> {
        if !variance.is_finite() || variance <= 0.0 {
            return Err(Error::domain(
                "GaussianParams",
                format!("variance must be positive and finite, got {variance}"),
            ));
        }
        Ok(Self { variance })
    }
}

/// Diversity b of the zero-mean Laplacian baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacianParams {
    pub b: f64,
}

impl LaplacianParams {
    pub fn new(b: f64) -> Result<Self> {
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::domain(
                "LaplacianParams",
                format!("diversity must be positive and finite, got {b}"),
            ));
        }
        Ok(Self { b })
    }
}

/// Zero-mean Gaussian density (2πσ²)^{-1/2} exp(-x²/2σ²).
pub fn gaussian_pdf(x: f64, p: GaussianParams) -> f64 {
    (-0.5 * (LN_2PI + p.variance.ln()) - x * x / (2.0 * p.variance)).exp()
}

/// Zero-mean Gaussian CDF Φ(x/σ) via the error function.
pub fn gaussian_cdf(x: f64, p: GaussianParams) -> f64 {
    0.5 * (1.0 + libm::erf(x / (SQRT_2 * p.variance.sqrt())))
}

/// Inverse-gamma density β^α/Γ(α) v^{-α-1} exp(-β/v) for v > 0.
pub fn inverse_gamma_pdf(v: f64, p: VarianceDistParams) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::domain(
            "inverse_gamma_pdf",
            format!("support is v > 0, got {v}"),
        ));
    }
    let log = p.alpha * p.beta.ln() - log_gamma_raw(p.alpha) - (p.alpha + 1.0) * v.ln() - p.beta / v;
    Ok(log.exp())
}

/// Log of the scale-mixture marginal: the Gaussian with inverse-gamma variance
/// integrated out, β^α Γ(α+½) / [√(2π) Γ(α) (β + x²/2)^{α+½}].
pub fn marginal_log_pdf(x: f64, p: VarianceDistParams) -> f64 {
    p.alpha * p.beta.ln() + log_gamma_raw(p.alpha + 0.5)
        - 0.5 * LN_2PI
        - log_gamma_raw(p.alpha)
        - (p.alpha + 0.5) * (p.beta + x * x / 2.0).ln()
}

/// Scale-mixture marginal density; symmetric in x.
pub fn marginal_pdf(x: f64, p: VarianceDistParams) -> f64 {
    marginal_log_pdf(x, p).exp()
}

/// Log-density of the zero-mean scaled Student-t,
/// Γ((ν+1)/2) s^{-1/2} / [√(πν) Γ(ν/2) (1 + x²/νs)^{(ν+1)/2}].
pub fn t_log_pdf(x: f64, p: TDistParams) -> f64 {
    t_log_pdf_split(p).0 - 0.5 * (p.nu + 1.0) * (1.0 + x * x / (p.nu * p.s)).ln()
}

/// Precomputed pieces of the t log-density: the x-independent constant and
/// (ν, s) for the per-sample term. Used by the estimator's hot loops.
pub(crate) fn t_log_pdf_split(p: TDistParams) -> (f64, f64, f64) {
    let constant = log_gamma_raw((p.nu + 1.0) / 2.0)
        - log_gamma_raw(p.nu / 2.0)
        - 0.5 * (std::f64::consts::PI * p.nu * p.s).ln();
    (constant, p.nu, p.s)
}

/// CDF of the zero-mean scaled t via the regularized incomplete beta function
/// on the standardized variate x/√s.
pub fn t_cdf(x: f64, p: TDistParams) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let t = x / p.s.sqrt();
    let u = p.nu / (p.nu + t * t);
    // preconditions of reg_incomplete_beta hold by construction
    let half_tail = 0.5 * reg_incomplete_beta(p.nu / 2.0, 0.5, u).expect("valid beta arguments");
    if x < 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

/// Zero-mean Laplacian density exp(-|x|/b)/(2b).
pub fn laplacian_pdf(x: f64, p: LaplacianParams) -> f64 {
    (-x.abs() / p.b).exp() / (2.0 * p.b)
}

/// Zero-mean Laplacian CDF.
pub fn laplacian_cdf(x: f64, p: LaplacianParams) -> f64 {
    if x < 0.0 {
        0.5 * (x / p.b).exp()
    } else {
        1.0 - 0.5 * (-x / p.b).exp()
    }
}
