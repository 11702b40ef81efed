//! Price moments under the dividend discount model with i.i.d. discrete
//! dividend growth.
//!
//! - [`growth`]: the growth-rate law and the stock inputs.
//! - [`closed_form`]: expected price, price variance, convergence thresholds.
//! - [`dividend`]: moments and exact joint law of the dividend process.
//! - [`series`]: truncated partial sums with exact geometric tail bounds.
//! - [`simulation`]: reproducible parallel Monte Carlo of the discounted
//!   dividend sum.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod dividend;
pub mod error;
pub mod growth;
pub mod series;
pub mod simulation;

pub use closed_form::{
    convergence_threshold, discounted_sum_threshold, discounted_sum_variance, expected_price,
    gordon_price, price_variance, price_variance_expanded, ClosedFormValuation,
};
pub use dividend::{
    conditional_moment_sum, conditional_probability, dividend_covariance, dividend_cross_moment,
    dividend_value, dividend_variance, enumerate_joint_table, expected_dividend, joint_probability,
    marginal_probability, JointDividendTable, DEFAULT_ENUMERATION_CAP,
};
pub use error::{ModelError, Result};
pub use growth::{GrowthDistribution, Outcome, StockSpec};
pub use series::{recommend_horizon, truncated_price_moments, TruncationReport};
pub use simulation::{
    sample_discounted_sums, simulate_price_moments, Interval, SimulationConfig, SimulationReport,
};
