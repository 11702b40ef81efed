//! The per-period dividend growth rate and the stock it drives.
//!
//! A [`GrowthDistribution`] is a finite discrete law over growth rates
//! `g > -1`. Dividends evolve as `d_{j+1} = d_j * (1 + g)` with an
//! independent draw each period, so every moment the rest of the crate
//! needs reduces to `E[g]` and `E[g^2]`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Probabilities must sum to one within this tolerance before they are
/// renormalized. Inputs are human-entered decimals, so only representation
/// error is forgiven.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// One growth outcome and its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub rate: f64,
    pub probability: f64,
}

impl Outcome {
    pub fn new(rate: f64, probability: f64) -> Self {
        Outcome { rate, probability }
    }
}

/// A validated discrete growth-rate distribution.
///
/// Outcomes keep their first-seen order; repeated rates are merged into a
/// single outcome carrying the summed probability.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthDistribution {
    outcomes: Vec<Outcome>,
}

impl GrowthDistribution {
    /// Validates `(rate, probability)` pairs.
    ///
    /// Every rate must exceed -1 and every probability must be positive.
    /// The probabilities are rescaled to sum to exactly one only when they
    /// already do so within [`PROBABILITY_SUM_TOLERANCE`].
    pub fn validate<I>(outcomes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let raw: Vec<(f64, f64)> = outcomes.into_iter().collect();
        if raw.is_empty() {
            return Err(ModelError::EmptyDistribution);
        }
        for (index, &(rate, probability)) in raw.iter().enumerate() {
            // written so that NaN fails both checks
            if !(rate > -1.0) || !rate.is_finite() {
                return Err(ModelError::AnyRateNotAboveMinusOne { index, rate });
            }
            if !(probability > 0.0) || !probability.is_finite() {
                return Err(ModelError::NonPositiveProbability { index, probability });
            }
        }
        let sum: f64 = raw.iter().map(|&(_, q)| q).sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(ModelError::ProbabilitiesDoNotSumToOne { sum });
        }

        let mut merged: Vec<Outcome> = Vec::with_capacity(raw.len());
        for (rate, probability) in raw {
            match merged.iter_mut().find(|o| o.rate == rate) {
                Some(existing) => existing.probability += probability,
                None => merged.push(Outcome::new(rate, probability)),
            }
        }
        for outcome in &mut merged {
            outcome.probability /= sum;
        }
        Ok(GrowthDistribution { outcomes: merged })
    }

    /// A distribution with all mass on one rate.
    pub fn degenerate(rate: f64) -> Result<Self> {
        Self::validate([(rate, 1.0)])
    }

    /// Two outcomes: `g1` with probability `q1`, `g2` with `1 - q1`.
    pub fn two_outcome(g1: f64, q1: f64, g2: f64) -> Result<Self> {
        Self::validate([(g1, q1), (g2, 1.0 - q1)])
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// True when all probability mass sits on a single rate.
    pub fn is_degenerate(&self) -> bool {
        self.outcomes.len() == 1
    }

    /// `E[g]`.
    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|o| o.rate * o.probability).sum()
    }

    /// `E[g^2]`.
    pub fn second_moment(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.rate * o.rate * o.probability)
            .sum()
    }

    /// `Var[g] = E[g^2] - E[g]^2`, summed in central form so that it is
    /// never negative and is exactly zero for a degenerate law.
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.outcomes
            .iter()
            .map(|o| {
                let dev = o.rate - mean;
                dev * dev * o.probability
            })
            .sum()
    }

    /// `1 + E[g]`, the expected one-period growth factor.
    pub fn mean_factor(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| (1.0 + o.rate) * o.probability)
            .sum()
    }

    /// `E[(1 + g)^2] = 1 + 2 E[g] + E[g^2]`.
    pub fn second_moment_factor(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| {
                let f = 1.0 + o.rate;
                f * f * o.probability
            })
            .sum()
    }

    pub fn min_rate(&self) -> f64 {
        self.outcomes.iter().map(|o| o.rate).fold(f64::INFINITY, f64::min)
    }

    pub fn max_rate(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.rate)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Current dividend, per-period discount rate and growth law of one stock.
#[derive(Debug, Clone, PartialEq)]
pub struct StockSpec {
    d0: f64,
    k: f64,
    growth: GrowthDistribution,
}

impl StockSpec {
    pub fn new(d0: f64, k: f64, growth: GrowthDistribution) -> Result<Self> {
        if !(d0 > 0.0) || !d0.is_finite() {
            return Err(ModelError::NonPositiveDividend { d0 });
        }
        if !(k > -1.0) || !k.is_finite() {
            return Err(ModelError::DiscountNotAboveMinusOne { k });
        }
        Ok(StockSpec { d0, k, growth })
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn growth(&self) -> &GrowthDistribution {
        &self.growth
    }

    /// `k > E[g]`: the expected price is finite.
    pub fn expectation_valid(&self) -> bool {
        self.k > self.growth.mean()
    }

    /// `k` exceeds the variance convergence threshold.
    pub fn variance_valid(&self) -> bool {
        self.k > crate::closed_form::convergence_threshold(&self.growth)
    }
}
