//! O(1) valuation formulas.
//!
//! With `m = 1 + E[g]`, `v = 1 + k` and `Var[g]` the growth variance:
//!
//! ```text
//! E[P]   = d0 * m / (k - E[g])
//! Var[P] = E[P] * Var[g] * d0 * v / ((m * (k - E[g]) - Var[g]) * (k - E[g]))
//! ```
//!
//! `Var[P]` is the limit of the double series summed by
//! [`crate::series::truncated_price_moments`]; it is finite only for `k`
//! strictly above [`convergence_threshold`].
//!
//! That series extends `cov(d_j, d_p) = m^(p-j) Var(d_j)`, which holds for
//! `p >= j`, to every `(j, p)` pair. The variance of the discounted dividend
//! sum itself uses the symmetric covariance and is exposed separately as
//! [`discounted_sum_variance`]; it is what a path simulation estimates.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::growth::{GrowthDistribution, StockSpec};

/// Closed-form price moments of one stock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormValuation {
    pub expected_price: f64,
    pub price_variance: f64,
    pub price_std: f64,
    /// Smallest `k` (exclusive) for which `price_variance` is finite.
    pub convergence_threshold: f64,
    pub mean_growth: f64,
    pub variance_growth: f64,
}

/// Deterministic Gordon growth price `d0 (1 + g) / (k - g)`.
pub fn gordon_price(d0: f64, g: f64, k: f64) -> Result<f64> {
    if !(k > g) {
        return Err(ModelError::DiscountNotAboveGrowth { k, growth: g });
    }
    Ok(d0 * (1.0 + g) / (k - g))
}

/// `E[P] = d0 (1 + E[g]) / (k - E[g])`; depends on the growth law only
/// through its mean.
pub fn expected_price(spec: &StockSpec) -> Result<f64> {
    let mean = spec.growth().mean();
    let k = spec.k();
    if !(k > mean) {
        return Err(ModelError::DiscountNotAboveMeanGrowth {
            k,
            mean_growth: mean,
        });
    }
    Ok(spec.d0() * (1.0 + mean) / (k - mean))
}

/// `(E[g] + E[g^2]) / (1 + E[g])`, evaluated as `E[g] + Var[g] / (1 + E[g])`
/// so that it equals `E[g]` exactly when the growth rate is deterministic.
pub fn convergence_threshold(g: &GrowthDistribution) -> f64 {
    let mean = g.mean();
    mean + g.variance() / (1.0 + mean)
}

fn check_variance_region(spec: &StockSpec) -> Result<()> {
    let threshold = convergence_threshold(spec.growth());
    if !(spec.k() > threshold) {
        return Err(ModelError::VarianceSeriesDiverges {
            k: spec.k(),
            mean_growth: spec.growth().mean(),
            threshold,
        });
    }
    Ok(())
}

/// Expected price, price variance and the convergence threshold.
///
/// Fails with [`ModelError::VarianceSeriesDiverges`] for any `k` at or below
/// the threshold, including the region where only the mean is finite.
pub fn price_variance(spec: &StockSpec) -> Result<ClosedFormValuation> {
    check_variance_region(spec)?;
    let expected = expected_price(spec)?;
    let g = spec.growth();
    let mean = g.mean();
    let var_g = g.variance();
    let k = spec.k();
    let spread = k - mean;
    let denominator = ((1.0 + mean) * spread - var_g) * spread;
    let variance = expected * var_g * spec.d0() * (1.0 + k) / denominator;
    Ok(ClosedFormValuation {
        expected_price: expected,
        price_variance: variance,
        price_std: variance.sqrt(),
        convergence_threshold: convergence_threshold(g),
        mean_growth: mean,
        variance_growth: var_g,
    })
}

/// The same variance before the denominator is regrouped:
///
/// ```text
/// d0^2 Var[g] (1 + E[g]) (1 + k) / ((k - E[g] + k E[g] - E[g^2]) (k - E[g])^2)
/// ```
pub fn price_variance_expanded(spec: &StockSpec) -> Result<f64> {
    check_variance_region(spec)?;
    let g = spec.growth();
    let mean = g.mean();
    let second = g.second_moment();
    let k = spec.k();
    let d0 = spec.d0();
    let spread = k - mean;
    let first_factor = k - mean + k * mean - second;
    Ok(d0 * d0 * g.variance() * (1.0 + mean) * (1.0 + k) / (first_factor * spread * spread))
}

/// Smallest `k` (exclusive) for which the discounted dividend sum has a
/// finite variance: `sqrt(E[(1 + g)^2]) - 1`.
///
/// Never exceeds [`convergence_threshold`], with equality only for a
/// deterministic growth rate.
pub fn discounted_sum_threshold(g: &GrowthDistribution) -> f64 {
    if g.is_degenerate() {
        return g.mean();
    }
    g.second_moment_factor().sqrt() - 1.0
}

/// Variance of `sum_{j>=1} d_j / (1 + k)^j` with the symmetric covariance
/// `cov(d_j, d_p) = m^|p-j| Var(d_min(j,p))`:
///
/// ```text
/// d0^2 (1 + k)^2 Var[g] / (((1 + k)^2 - E[(1 + g)^2]) (k - E[g])^2)
/// ```
pub fn discounted_sum_variance(spec: &StockSpec) -> Result<f64> {
    let g = spec.growth();
    let threshold = discounted_sum_threshold(g);
    let k = spec.k();
    if !(k > threshold) {
        return Err(ModelError::VarianceSeriesDiverges {
            k,
            mean_growth: g.mean(),
            threshold,
        });
    }
    let v = 1.0 + k;
    let spread = k - g.mean();
    let d0 = spec.d0();
    Ok(d0 * d0 * v * v * g.variance() / ((v * v - g.second_moment_factor()) * spread * spread))
}
