//! Scalar special functions shared by the distribution and test modules.

use special::{Error as ErfFns, Gamma as GammaFns};

use crate::error::{Error, Result};

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    GammaFns::ln_gamma(x).0
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    GammaFns::inc_gamma(x, a)
}

/// Chi-squared CDF with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    gamma_p(df / 2.0, x / 2.0)
}

/// Chi-squared upper tail probability.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    (1.0 - chi2_cdf(x, df)).clamp(0.0, 1.0)
}

/// Standard normal CDF.
#[allow(dead_code)] // exercised by the quantile round-trip tests
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * ErfFns::compl_error(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail probability.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * ErfFns::compl_error(x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile, defined on (0, 1).
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if u.is_nan() || u <= 0.0 || u >= 1.0 {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < u < 1, got {u}"
        )));
    }
    Ok(std::f64::consts::SQRT_2 * ErfFns::inv_error(2.0 * u - 1.0))
}
