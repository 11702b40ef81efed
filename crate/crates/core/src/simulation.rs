//! Seeded Monte Carlo estimate of the price moments.
//!
//! Each path draws i.i.d. growth rates for `horizon` periods and sums the
//! discounted dividends. Path `i` reads from ChaCha8 stream `i` of the run
//! seed, so its value does not depend on which worker computes it. Paths
//! are split into `workers` contiguous blocks whose moment accumulators are
//! merged pairwise in a fixed tree, making the report bit-identical for a
//! given `(seed, n_paths, horizon, workers)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::growth::StockSpec;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Fewest paths for which the variance interval is reported.
pub const MIN_PATHS_FOR_VARIANCE_CI: u64 = 30;

pub const DEFAULT_WORKERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_paths: u64,
    pub horizon: u32,
    pub seed: u64,
    pub workers: usize,
}

impl SimulationConfig {
    pub fn new(n_paths: u64, horizon: u32, seed: u64) -> Self {
        SimulationConfig {
            n_paths,
            horizon,
            seed,
            workers: DEFAULT_WORKERS,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    fn around(center: f64, half_width: f64) -> Self {
        Interval {
            lower: center - half_width,
            upper: center + half_width,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n_paths: u64,
    pub horizon: u32,
    pub seed: u64,
    pub workers: usize,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub ci95_mean: Interval,
    /// `None` below [`MIN_PATHS_FOR_VARIANCE_CI`] paths.
    pub ci95_variance: Option<Interval>,
    /// Expected value of the discounted dividends beyond `horizon`.
    pub truncation_tail_bound: f64,
}

impl SimulationReport {
    pub fn variance_interval(&self) -> Result<Interval> {
        self.ci95_variance.ok_or(ModelError::DegenerateVarianceCI {
            n_paths: self.n_paths,
        })
    }
}

/// Streaming central moments up to order four, mergeable across blocks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let delta2 = delta * delta;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + delta2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + delta2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        MomentAccumulator {
            n: self.n + other.n,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2 / (self.n - 1) as f64
    }

    /// Plug-in fourth central moment.
    pub fn fourth_central_moment(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.m4 / self.n as f64
    }
}

/// Merges adjacent pairs level by level; an odd tail element moves up
/// unchanged.
fn tree_reduce(mut level: Vec<MomentAccumulator>) -> MomentAccumulator {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.merge(b),
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Draws discounted dividend sums path by path.
struct PathSampler {
    d0: f64,
    seed: u64,
    factors: Vec<f64>,
    cumulative: Vec<f64>,
    discounts: Vec<f64>,
}

impl PathSampler {
    fn new(spec: &StockSpec, horizon: u32, seed: u64) -> Self {
        let outcomes = spec.growth().outcomes();
        let factors = outcomes.iter().map(|o| 1.0 + o.rate).collect();
        let mut running = 0.0;
        let cumulative = outcomes
            .iter()
            .map(|o| {
                running += o.probability;
                running
            })
            .collect();
        let v = 1.0 + spec.k();
        let discounts = (1..=horizon).map(|j| v.powi(-(j as i32))).collect();
        PathSampler {
            d0: spec.d0(),
            seed,
            factors,
            cumulative,
            discounts,
        }
    }

    fn draw_factor(&self, u: f64) -> f64 {
        let last = self.factors.len() - 1;
        let index = self.cumulative[..last]
            .iter()
            .position(|&c| u < c)
            .unwrap_or(last);
        self.factors[index]
    }

    fn path(&self, index: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut dividend = self.d0;
        let mut total = 0.0;
        for &discount in &self.discounts {
            dividend *= self.draw_factor(rng.random::<f64>());
            total += dividend * discount;
        }
        total
    }
}

fn expected_tail(spec: &StockSpec, horizon: u32) -> f64 {
    let rho = spec.growth().mean_factor() / (1.0 + spec.k());
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    spec.d0() * rho.powf(f64::from(horizon) + 1.0) / (1.0 - rho)
}

fn check_config(n_paths: u64, horizon: u32) -> Result<()> {
    if n_paths < 2 {
        return Err(ModelError::TooFewPaths { n_paths });
    }
    if horizon == 0 {
        return Err(ModelError::NonPositiveHorizon);
    }
    Ok(())
}

/// The discounted dividend sum of paths `0..n_paths`, in path order.
pub fn sample_discounted_sums(spec: &StockSpec, n_paths: u64, horizon: u32, seed: u64) -> Result<Vec<f64>> {
    check_config(n_paths, horizon)?;
    let sampler = PathSampler::new(spec, horizon, seed);
    #[cfg(feature = "parallel")]
    let paths = (0..n_paths).into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let paths = 0..n_paths;
    Ok(paths.map(|i| sampler.path(i)).collect())
}

/// Sample mean and variance of the discounted dividend sum truncated at
/// `config.horizon`, with 95% intervals.
///
/// The mean interval is the normal approximation. The variance interval
/// uses the large-sample law of the sample variance,
/// `Var(s^2) ~ (mu4 - s^4 (n - 3)/(n - 1)) / n`, with the fourth central
/// moment estimated from the same paths.
pub fn simulate_price_moments(spec: &StockSpec, config: &SimulationConfig) -> Result<SimulationReport> {
    check_config(config.n_paths, config.horizon)?;
    let sampler = PathSampler::new(spec, config.horizon, config.seed);
    let workers = config.workers.max(1).min(config.n_paths as usize) as u64;
    let base = config.n_paths / workers;
    let extra = config.n_paths % workers;
    let blocks: Vec<(u64, u64)> = (0..workers)
        .map(|w| {
            let start = w * base + w.min(extra);
            let len = base + u64::from(w < extra);
            (start, start + len)
        })
        .collect();
    #[cfg(feature = "parallel")]
    let blocks = blocks.into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let blocks = blocks.into_iter();
    let partials: Vec<MomentAccumulator> = blocks
        .map(|(start, end)| {
            let mut acc = MomentAccumulator::default();
            for i in start..end {
                acc.push(sampler.path(i));
            }
            acc
        })
        .collect();
    let acc = tree_reduce(partials);

    let n = acc.count() as f64;
    let mean = acc.mean();
    let variance = acc.sample_variance();
    let ci95_mean = Interval::around(mean, Z95 * (variance / n).sqrt());
    let ci95_variance = (config.n_paths >= MIN_PATHS_FOR_VARIANCE_CI).then(|| {
        let mu4 = acc.fourth_central_moment();
        let var_of_var = ((mu4 - variance * variance * (n - 3.0) / (n - 1.0)) / n).max(0.0);
        Interval::around(variance, Z95 * var_of_var.sqrt())
    });

    Ok(SimulationReport {
        n_paths: config.n_paths,
        horizon: config.horizon,
        seed: config.seed,
        workers: workers as usize,
        sample_mean: mean,
        sample_variance: variance,
        ci95_mean,
        ci95_variance,
        truncation_tail_bound: expected_tail(spec, config.horizon),
    })
}
