//! Finite-horizon partial sums of the price-moment series.
//!
//! With `m = 1 + E[g]`, `v = 1 + k`, `rho1 = m / v` and
//! `rho2 = E[(1 + g)^2] / (m v)`:
//!
//! ```text
//! E[P]   = sum_{j>=1} E[d_j] / v^j                              (ratio rho1)
//! Var[P] = sum_{j>=1} sum_{p>=1} m^(p-j) Var(d_j) / v^(j+p)
//!        = d0^2 (sum_j (rho2^j - rho1^j)) (sum_p rho1^p)        (ratios rho2, rho1)
//! ```
//!
//! Both series are geometric, so the remainders after `H` terms are known
//! exactly and serve as the reported tail bounds.

use serde::{Deserialize, Serialize};

use crate::closed_form::{expected_price, price_variance};
use crate::error::{ModelError, Result};
use crate::growth::StockSpec;

/// Partial sums after `horizon` periods and what is left in the tails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub horizon: u32,
    pub partial_expected_price: f64,
    pub partial_price_variance: f64,
    /// Remainder of the expected-price series; infinite when it diverges.
    pub tail_bound_expected: f64,
    /// Remainder of the variance series; infinite when it diverges.
    pub tail_bound_variance: f64,
    /// Both tail bounds are within `tolerance` of their partial sums.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
struct Ratios {
    rho1: f64,
    rho2: f64,
    /// `ln(1 + Var[g] / m^2)`, i.e. `ln(rho2 / rho1)`.
    log_excess: f64,
}

impl Ratios {
    fn of(spec: &StockSpec) -> Self {
        let g = spec.growth();
        let m = g.mean_factor();
        let rho1 = m / (1.0 + spec.k());
        let excess = g.variance() / (m * m);
        Ratios {
            rho1,
            rho2: rho1 * (1.0 + excess),
            log_excess: excess.ln_1p(),
        }
    }

    /// `Var(d_j) / (d0^2 (m v)^j) = rho2^j - rho1^j`, without forming
    /// either power when it would overflow.
    fn variance_row(&self, j: u32) -> f64 {
        let j = f64::from(j);
        let log_rho1 = self.rho1.ln();
        let growth = j * self.log_excess;
        if growth < 700.0 {
            (j * log_rho1).exp() * growth.exp_m1()
        } else {
            (j * (log_rho1 + self.log_excess)).exp() - (j * log_rho1).exp()
        }
    }

    /// `sum_{j > h} rho^j`, infinite once `rho >= 1`.
    fn geometric_tail(rho: f64, h: u32) -> f64 {
        if rho >= 1.0 {
            f64::INFINITY
        } else {
            rho.powf(f64::from(h) + 1.0) / (1.0 - rho)
        }
    }

    /// Exact remainder of the variance series given the partial row sum
    /// `rows` (without the `d0^2` factor).
    fn variance_tail(&self, d0: f64, h: u32, rows: f64) -> f64 {
        if self.rho2 >= 1.0 {
            return f64::INFINITY;
        }
        let row_tail = (Self::geometric_tail(self.rho2, h) - Self::geometric_tail(self.rho1, h)).max(0.0);
        let column_total = self.rho1 / (1.0 - self.rho1);
        let column_tail = Self::geometric_tail(self.rho1, h);
        d0 * d0 * (row_tail * column_total + rows * column_tail)
    }

    fn rows_closed(&self, h: u32) -> f64 {
        let total = self.rho2 / (1.0 - self.rho2) - self.rho1 / (1.0 - self.rho1);
        let tail = Self::geometric_tail(self.rho2, h) - Self::geometric_tail(self.rho1, h);
        (total - tail).max(0.0)
    }
}

/// Sums the expected-price series and the variance double series over
/// periods `1..=horizon`.
///
/// The variance is summed row by row from `Var(d_j)`; the geometric closed
/// forms are used only for the tail bounds. `tolerance` is relative to the
/// partial sums and decides `converged`. Works for any `k > -1`; below the
/// convergence threshold the tails are infinite and `converged` is false.
pub fn truncated_price_moments(
    spec: &StockSpec,
    horizon: u32,
    tolerance: f64,
) -> Result<TruncationReport> {
    if horizon == 0 {
        return Err(ModelError::NonPositiveHorizon);
    }
    let d0 = spec.d0();
    let ratios = Ratios::of(spec);

    // E[d_j] / v^j, advanced one period at a time
    let mut discounted_dividend = d0;
    let mut partial_expected = 0.0;
    let mut rows = 0.0;
    let mut columns = 0.0;
    let mut column_factor = 1.0;
    for j in 1..=horizon {
        discounted_dividend *= ratios.rho1;
        partial_expected += discounted_dividend;
        rows += ratios.variance_row(j);
        column_factor *= ratios.rho1;
        columns += column_factor;
    }
    let partial_variance = d0 * d0 * rows * columns;

    let tail_expected = d0 * Ratios::geometric_tail(ratios.rho1, horizon);
    let tail_variance = ratios.variance_tail(d0, horizon, rows);
    let converged = tail_expected <= tolerance * partial_expected
        && tail_variance <= tolerance * partial_variance;

    Ok(TruncationReport {
        horizon,
        partial_expected_price: partial_expected,
        partial_price_variance: partial_variance,
        tail_bound_expected: tail_expected,
        tail_bound_variance: tail_variance,
        converged,
    })
}

/// Smallest horizon whose tail bounds fall below `relative_tail` times the
/// closed-form expected price and price variance.
pub fn recommend_horizon(spec: &StockSpec, relative_tail: f64) -> Result<u32> {
    if !(relative_tail > 0.0 && relative_tail < 1.0) {
        return Err(ModelError::InvalidTailFraction {
            value: relative_tail,
        });
    }
    let valuation = price_variance(spec)?;
    let expected = expected_price(spec)?;
    let ratios = Ratios::of(spec);
    let d0 = spec.d0();
    let good = |h: u32| {
        d0 * Ratios::geometric_tail(ratios.rho1, h) <= relative_tail * expected
            && ratios.variance_tail(d0, h, ratios.rows_closed(h))
                <= relative_tail * valuation.price_variance
    };

    let mut hi: u32 = 1;
    while !good(hi) {
        hi = hi.saturating_mul(2);
        if hi == u32::MAX {
            break;
        }
    }
    let mut lo = hi / 2;
    // invariant: good(hi), and lo == 0 or !good(lo)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if good(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.max(1))
}
