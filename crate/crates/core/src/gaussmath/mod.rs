//! Special functions, Gaussian densities, quadrature, and root finding.
//!
//! Quadrature amplitudes throughout the crate are dimensionless, in units
//! where a coherent state has quadrature variance 1/4.

pub mod erf;
pub mod quad;
pub mod roots;

pub use erf::{erf, erfc, erfcx, ln_erfc};
pub use quad::{integrate, integrate_semi_infinite, ToleranceConfig};
pub use roots::find_root_bisect;

use crate::error::{Error, Result};

/// Normalized Gaussian probability density.
pub fn gauss_pdf(x: f64, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::InvalidParameter {
            name: "variance",
            value: variance,
            constraint: "variance > 0",
        });
    }
    let d = x - mean;
    Ok((-d * d / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt())
}

/// Numerically stable logistic function `1 / (1 + exp(-t))`.
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 / (1 + exp(-t)))` without overflow for any `t`.
pub(crate) fn ln_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}
