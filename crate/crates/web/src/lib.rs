//! WebAssembly bindings for the browser demo.
//!
//! Every export takes a stock as JSON,
//! `{"d0": 2.0, "k": 0.05, "growth": [{"rate": -0.02, "probability": 0.5}, ...]}`,
//! and returns a JSON string, or throws the error message. The `*_json`
//! functions hold the logic and are usable (and tested) natively.

use serde::{Deserialize, Serialize};
use stochastic_ddm::{
    convergence_threshold, discounted_sum_threshold, discounted_sum_variance, expected_price,
    price_variance, recommend_horizon, sample_discounted_sums, GrowthDistribution, Outcome,
    StockSpec,
};
use wasm_bindgen::prelude::*;

/// Largest path count the demo will simulate in one call.
pub const MAX_PATHS: u64 = 200_000;
/// Largest number of points on a variance curve.
pub const MAX_POINTS: u32 = 2_000;
const HISTOGRAM_TAIL: f64 = 1e-6;

#[derive(Debug, Clone, Deserialize)]
pub struct StockInput {
    pub d0: f64,
    pub k: f64,
    pub growth: Vec<Outcome>,
}

impl StockInput {
    fn growth(&self) -> Result<GrowthDistribution, String> {
        GrowthDistribution::validate(self.growth.iter().map(|o| (o.rate, o.probability)))
            .map_err(|e| e.to_string())
    }

    fn spec(&self) -> Result<StockSpec, String> {
        StockSpec::new(self.d0, self.k, self.growth()?).map_err(|e| e.to_string())
    }
}

fn parse(stock_json: &str) -> Result<StockInput, String> {
    serde_json::from_str(stock_json).map_err(|e| format!("invalid stock: {e}"))
}

fn emit<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Valuation {
    pub mean_growth: f64,
    pub variance_growth: f64,
    pub expected_price: Option<f64>,
    pub price_variance: Option<f64>,
    pub price_std: Option<f64>,
    pub convergence_threshold: f64,
    pub discounted_sum_variance: Option<f64>,
    pub discounted_sum_threshold: f64,
    /// Why `price_variance` is missing, if it is.
    pub message: Option<String>,
}

pub fn valuation_json(stock_json: &str) -> Result<String, String> {
    let spec = parse(stock_json)?.spec()?;
    let g = spec.growth();
    let closed = price_variance(&spec);
    let message = closed.as_ref().err().map(ToString::to_string);
    let closed = closed.ok();
    emit(&Valuation {
        mean_growth: g.mean(),
        variance_growth: g.variance(),
        expected_price: expected_price(&spec).ok(),
        price_variance: closed.as_ref().map(|v| v.price_variance),
        price_std: closed.as_ref().map(|v| v.price_std),
        convergence_threshold: convergence_threshold(g),
        discounted_sum_variance: discounted_sum_variance(&spec).ok(),
        discounted_sum_threshold: discounted_sum_threshold(g),
        message,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub k: Vec<f64>,
    /// `None` where the closed form diverges.
    pub price_variance: Vec<Option<f64>>,
    pub discounted_sum_variance: Vec<Option<f64>>,
    pub convergence_threshold: f64,
    pub discounted_sum_threshold: f64,
}

/// Both variance formulas at `points` evenly spaced discount rates in
/// `[k_min, k_max]`. The stock's own `k` is ignored.
pub fn variance_curve_json(stock_json: &str, k_min: f64, k_max: f64, points: u32) -> Result<String, String> {
    let input = parse(stock_json)?;
    let g = input.growth()?;
    if !(k_min.is_finite() && k_max.is_finite() && k_min < k_max && k_min > -1.0) {
        return Err(format!("need -1 < k_min < k_max, got [{k_min}, {k_max}]"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be between 2 and {MAX_POINTS}"));
    }
    let step = (k_max - k_min) / f64::from(points - 1);
    let k: Vec<f64> = (0..points).map(|i| k_min + step * f64::from(i)).collect();
    let specs: Vec<Option<StockSpec>> = k
        .iter()
        .map(|&k| StockSpec::new(input.d0, k, g.clone()).ok())
        .collect();
    emit(&VarianceCurve {
        price_variance: specs
            .iter()
            .map(|s| s.as_ref().and_then(|s| price_variance(s).ok()).map(|v| v.price_variance))
            .collect(),
        discounted_sum_variance: specs
            .iter()
            .map(|s| s.as_ref().and_then(|s| discounted_sum_variance(s).ok()))
            .collect(),
        convergence_threshold: convergence_threshold(&g),
        discounted_sum_threshold: discounted_sum_threshold(&g),
        k,
    })
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Histogram {
    pub paths: u64,
    pub horizon: u32,
    pub seed: u64,
    pub sample_mean: f64,
    pub sample_variance: f64,
    /// `bins + 1` edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Simulated discounted dividend sums binned into `bins` equal-width bins
/// spanning the sample range.
pub fn simulate_histogram_json(stock_json: &str, paths: u32, seed: u32, bins: u32) -> Result<String, String> {
    let spec = parse(stock_json)?.spec()?;
    let paths = u64::from(paths);
    if !(2..=MAX_PATHS).contains(&paths) {
        return Err(format!("paths must be between 2 and {MAX_PATHS}"));
    }
    if !(1..=500).contains(&bins) {
        return Err("bins must be between 1 and 500".into());
    }
    let horizon = recommend_horizon(&spec, HISTOGRAM_TAIL).map_err(|e| e.to_string())?;
    let seed = u64::from(seed);
    let sums = sample_discounted_sums(&spec, paths, horizon, seed).map_err(|e| e.to_string())?;

    let n = sums.len() as f64;
    let mean = sums.iter().sum::<f64>() / n;
    let variance = sums.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / f64::from(bins) } else { 1.0 };
    let mut counts = vec![0u64; bins as usize];
    for x in &sums {
        let b = (((x - lo) / width) as usize).min(bins as usize - 1);
        counts[b] += 1;
    }
    emit(&Histogram {
        paths,
        horizon,
        seed,
        sample_mean: mean,
        sample_variance: variance,
        edges: (0..=bins).map(|i| lo + width * f64::from(i)).collect(),
        counts,
    })
}

fn to_js(result: Result<String, String>) -> Result<String, JsError> {
    result.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn valuation(stock_json: &str) -> Result<String, JsError> {
    to_js(valuation_json(stock_json))
}

#[wasm_bindgen(js_name = varianceCurve)]
pub fn variance_curve(stock_json: &str, k_min: f64, k_max: f64, points: u32) -> Result<String, JsError> {
    to_js(variance_curve_json(stock_json, k_min, k_max, points))
}

#[wasm_bindgen(js_name = simulateHistogram)]
pub fn simulate_histogram(stock_json: &str, paths: u32, seed: u32, bins: u32) -> Result<String, JsError> {
    to_js(simulate_histogram_json(stock_json, paths, seed, bins))
}
