use thiserror::Error;

/// Everything that can go wrong when building or evaluating a model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("growth distribution has no outcomes")]
    EmptyDistribution,

    #[error("growth outcome {index}: rate {rate} is not above -1")]
    AnyRateNotAboveMinusOne { index: usize, rate: f64 },

    #[error("growth outcome {index}: probability {probability} is not positive")]
    NonPositiveProbability { index: usize, probability: f64 },

    #[error("growth probabilities sum to {sum}, not 1")]
    ProbabilitiesDoNotSumToOne { sum: f64 },

    #[error("current dividend {d0} is not positive")]
    NonPositiveDividend { d0: f64 },

    #[error("discount rate {k} is not above -1")]
    DiscountNotAboveMinusOne { k: f64 },

    #[error("discount rate {k} does not exceed growth rate {growth}")]
    DiscountNotAboveGrowth { k: f64, growth: f64 },

    #[error("discount rate {k} does not exceed mean growth {mean_growth}; expected price is undefined")]
    DiscountNotAboveMeanGrowth { k: f64, mean_growth: f64 },

    #[error("{}", divergence_message(*.k, *.mean_growth, *.threshold))]
    VarianceSeriesDiverges {
        k: f64,
        mean_growth: f64,
        threshold: f64,
    },

    #[error("operation needs a two-outcome growth distribution, got {outcomes} outcomes")]
    NotTwoOutcome { outcomes: usize },

    #[error("up-move count {up_moves} is outside 0..={period}")]
    IndexOutOfRange { period: u32, up_moves: u32 },

    #[error("period indices out of order: j = {j} > p = {p}")]
    BadIndexOrder { j: u32, p: u32 },

    #[error("horizon {p} exceeds the enumeration cap {cap}")]
    HorizonTooLargeForEnumeration { p: u32, cap: u32 },

    #[error("horizon must be at least 1")]
    NonPositiveHorizon,

    #[error("need at least 2 paths, got {n_paths}")]
    TooFewPaths { n_paths: u64 },

    #[error("variance confidence interval needs at least 30 paths, got {n_paths}")]
    DegenerateVarianceCI { n_paths: u64 },

    #[error("relative tail {value} must lie strictly between 0 and 1")]
    InvalidTailFraction { value: f64 },
}

fn divergence_message(k: f64, mean_growth: f64, threshold: f64) -> String {
    if k <= mean_growth {
        format!(
            "variance series diverges: discount rate {k} does not exceed mean growth {mean_growth}, \
             so the expected price is undefined as well"
        )
    } else {
        format!(
            "variance series diverges: discount rate {k} exceeds mean growth {mean_growth} \
             but not the variance threshold {threshold}; the expected price is finite"
        )
    }
}

impl ModelError {
    /// True for errors caused by the model parameters being outside the
    /// region where the requested moment exists.
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            ModelError::DiscountNotAboveGrowth { .. }
                | ModelError::DiscountNotAboveMeanGrowth { .. }
                | ModelError::VarianceSeriesDiverges { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
