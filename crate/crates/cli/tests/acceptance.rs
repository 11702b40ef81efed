//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are fixed here and not configurable.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochastic_ddm::{
    conditional_moment_sum, convergence_threshold, discounted_sum_variance, dividend_covariance,
    dividend_cross_moment, dividend_variance, enumerate_joint_table, expected_dividend,
    expected_price, gordon_price, price_variance, recommend_horizon, simulate_price_moments,
    truncated_price_moments, GrowthDistribution, ModelError, SimulationConfig, StockSpec,
};

const EXPECTED_PRICE_REL: f64 = 1e-12;
const VARIANCE_ABS: f64 = 1e-3;
const RATIO_RANGE: (f64, f64) = (10.9, 11.1);
const HORIZON_TAIL: f64 = 1e-8;
const SERIES_REL: f64 = 1e-6;
const MC_PATHS: u64 = 1_000_000;
const MC_SEED: u64 = 20_240_601;
const MC_VARIANCE_REL: f64 = 0.05;
const ENUMERATION_REL: f64 = 1e-10;
const ENUMERATION_MAX_P: u32 = 12;
const IDENTITY_REL: f64 = 1e-12;
const IDENTITY_CASES: usize = 1000;
const IDENTITY_MAX_P: u32 = 50;
const GATE_CASES: usize = 100;
const GATE_HORIZON: u32 = 400;
const DEGENERATE_CASES: usize = 50;
const DEGENERATE_REL: f64 = 1e-12;
const NONSTATIONARY_ABS: f64 = 1e-12;

const STOCK_1_VARIANCE: f64 = 60.408;
const STOCK_2_VARIANCE: f64 = 664.865;
const EXAMPLE_PRICE: f64 = 50.5;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn stock(outcomes: &[(f64, f64)], k: f64) -> StockSpec {
    let g = GrowthDistribution::validate(outcomes.iter().copied()).expect("valid growth");
    StockSpec::new(2.0, k, g).expect("valid spec")
}

fn stock_1() -> StockSpec {
    stock(&[(-0.02, 0.5), (0.04, 0.5)], 0.05)
}

fn stock_2() -> StockSpec {
    stock(&[(-0.08, 0.5), (0.10, 0.5)], 0.05)
}

fn three_outcome() -> StockSpec {
    stock(&[(-0.05, 0.3), (0.01, 0.4), (0.06, 0.3)], 0.08)
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn run(&mut self, id: u32, name: &str, check: impl FnOnce() -> Result<String, String>) {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL {id:>2} {name}: {detail} [{secs:.2}s]");
            }
        }
    }
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Result<String, String> {
    let mut detail = Vec::new();
    let mut ok = true;
    for spec in [stock_1(), stock_2()] {
        let e = expected_price(&spec).map_err(|e| e.to_string())?;
        ok &= rel(e, EXAMPLE_PRICE) <= EXPECTED_PRICE_REL;
        detail.push(format!("{e:?}"));
    }
    ensure(ok, format!("E[P] = {} (want {EXAMPLE_PRICE} to {EXPECTED_PRICE_REL:e} rel)", detail.join(", ")))
}

fn criterion_2() -> Result<String, String> {
    let v1 = price_variance(&stock_1()).map_err(|e| e.to_string())?.price_variance;
    let v2 = price_variance(&stock_2()).map_err(|e| e.to_string())?.price_variance;
    let ratio = v2 / v1;
    let ok = (v1 - STOCK_1_VARIANCE).abs() <= VARIANCE_ABS
        && (v2 - STOCK_2_VARIANCE).abs() <= VARIANCE_ABS
        && (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio);
    ensure(
        ok,
        format!("Var = {v1:.6}, {v2:.6} (want {STOCK_1_VARIANCE}, {STOCK_2_VARIANCE} +/- {VARIANCE_ABS}); ratio {ratio:.4} in [{}, {}]", RATIO_RANGE.0, RATIO_RANGE.1),
    )
}

fn criterion_3() -> Result<String, String> {
    let mut ok = true;
    let mut detail = Vec::new();
    for spec in [stock_1(), stock_2()] {
        let exact = price_variance(&spec).map_err(|e| e.to_string())?.price_variance;
        let h = recommend_horizon(&spec, HORIZON_TAIL).map_err(|e| e.to_string())?;
        let t = truncated_price_moments(&spec, h, SERIES_REL).map_err(|e| e.to_string())?;
        let err = rel(t.partial_price_variance, exact);
        ok &= err <= SERIES_REL;
        detail.push(format!("H={h} partial {:.6} rel err {err:.2e}", t.partial_price_variance));
    }
    ensure(ok, format!("{} (want <= {SERIES_REL:e})", detail.join("; ")))
}

/// Monte Carlo check shared by criteria 4 and 10. Also prints how the
/// variance interval relates to the variance of the discounted sum.
fn monte_carlo(spec: &StockSpec, label: &str) -> Result<(bool, String), String> {
    let exact = price_variance(spec).map_err(|e| e.to_string())?;
    let sum_variance = discounted_sum_variance(spec).map_err(|e| e.to_string())?;
    let h = recommend_horizon(spec, HORIZON_TAIL).map_err(|e| e.to_string())?;
    let report = simulate_price_moments(spec, &SimulationConfig::new(MC_PATHS, h, MC_SEED))
        .map_err(|e| e.to_string())?;
    let ci = report.variance_interval().map_err(|e| e.to_string())?;
    let mean_ok = report.ci95_mean.contains(exact.expected_price);
    let var_ci_ok = ci.contains(exact.price_variance);
    let var_rel = rel(report.sample_variance, exact.price_variance);
    println!(
        "     {label}: discounted-sum variance {sum_variance:.6}, inside variance CI: {}, rel err {:.4}",
        ci.contains(sum_variance),
        rel(report.sample_variance, sum_variance)
    );
    Ok((
        mean_ok && var_ci_ok && var_rel <= MC_VARIANCE_REL,
        format!(
            "{MC_PATHS} paths H={h}: mean {:.4} CI [{:.4}, {:.4}] contains {:.4}: {mean_ok}; var {:.4} CI [{:.4}, {:.4}] contains {:.4}: {var_ci_ok}; rel err {var_rel:.4} (want <= {MC_VARIANCE_REL})",
            report.sample_mean,
            report.ci95_mean.lower,
            report.ci95_mean.upper,
            exact.expected_price,
            report.sample_variance,
            ci.lower,
            ci.upper,
            exact.price_variance,
        ),
    ))
}

fn criterion_4() -> Result<String, String> {
    let (ok, detail) = monte_carlo(&stock_1(), "stock 1")?;
    ensure(ok, detail)
}

fn criterion_5() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for spec in [stock_1(), stock_2()] {
        let (d0, g) = (spec.d0(), spec.growth());
        for p in 0..=ENUMERATION_MAX_P {
            for j in 0..=p {
                let t = enumerate_joint_table(d0, g, j, p, ENUMERATION_MAX_P).map_err(|e| e.to_string())?;
                ok &= (t.total_probability() - 1.0).abs() <= ENUMERATION_REL;
                ok &= t.respects_support_band();
                let scale = t.mean_j() * t.mean_p();
                let pairs = [
                    (t.mean_j(), expected_dividend(d0, g, j)),
                    (t.mean_p(), expected_dividend(d0, g, p)),
                    (t.variance_j(), dividend_variance(d0, g, j)),
                    (t.cross_moment(), dividend_cross_moment(d0, g, j, p).map_err(|e| e.to_string())?),
                    (t.covariance(), dividend_covariance(d0, g, j, p).map_err(|e| e.to_string())?),
                ];
                for (table, closed) in pairs {
                    // at j = 0 the variance and covariance are exactly zero
                    let err = if closed == 0.0 { table.abs() / scale } else { rel(table, closed) };
                    worst = worst.max(err);
                    ok &= err <= ENUMERATION_REL;
                }
            }
        }
    }
    ensure(ok, format!("all 0 <= j <= p <= {ENUMERATION_MAX_P}, worst rel err {worst:.2e} (want <= {ENUMERATION_REL:e}); tables normalized and banded"))
}

fn criterion_6() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..IDENTITY_CASES {
        let up = rng.random_range(0.0..0.5);
        let down = rng.random_range(-0.5..0.0);
        let q = rng.random_range(0.05..0.95);
        let g = GrowthDistribution::two_outcome(up, q, down).map_err(|e| e.to_string())?;
        let p = rng.random_range(0..=IDENTITY_MAX_P);
        let j = rng.random_range(0..=p);
        let s = rng.random_range(0..=j);
        let sums = conditional_moment_sum(&g, j, s, p).map_err(|e| e.to_string())?;
        worst = worst.max(rel(sums.direct, sums.closed));
    }
    ensure(worst <= IDENTITY_REL, format!("{IDENTITY_CASES} cases, worst rel err {worst:.2e} (want <= {IDENTITY_REL:e})"))
}

fn random_spread_growth(rng: &mut ChaCha8Rng) -> Result<GrowthDistribution, ModelError> {
    let n = rng.random_range(2..=5);
    let raw: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.random_range(-0.3..0.3), rng.random_range(0.05..1.0)))
        .collect();
    let total: f64 = raw.iter().map(|(_, w)| w).sum();
    GrowthDistribution::validate(raw.into_iter().map(|(g, w)| (g, w / total)))
}

fn criterion_7() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < GATE_CASES {
        let g = random_spread_growth(&mut rng).map_err(|e| e.to_string())?;
        if g.variance() <= 1e-6 {
            continue;
        }
        checked += 1;
        let mean = g.mean();
        let threshold = convergence_threshold(&g);
        if threshold <= mean {
            return Err(format!("threshold {threshold} not above mean {mean}"));
        }
        let k = mean + rng.random_range(0.01..0.99) * (threshold - mean);
        let spec = StockSpec::new(2.0, k, g).map_err(|e| e.to_string())?;
        if !matches!(price_variance(&spec), Err(ModelError::VarianceSeriesDiverges { .. })) {
            return Err(format!("k = {k} in (mean, threshold) did not raise VarianceSeriesDiverges"));
        }
        let half = truncated_price_moments(&spec, GATE_HORIZON / 2, SERIES_REL).map_err(|e| e.to_string())?;
        let at_h = truncated_price_moments(&spec, GATE_HORIZON, SERIES_REL).map_err(|e| e.to_string())?;
        let at_2h = truncated_price_moments(&spec, 2 * GATE_HORIZON, SERIES_REL).map_err(|e| e.to_string())?;
        let later = at_2h.partial_price_variance - at_h.partial_price_variance;
        let earlier = at_h.partial_price_variance - half.partial_price_variance;
        if at_h.converged || at_h.tail_bound_variance.is_finite() || later < earlier {
            return Err(format!(
                "k = {k}: series looks convergent (tail {}, increments {earlier:e} then {later:e})",
                at_h.tail_bound_variance
            ));
        }
    }
    Ok(format!(
        "{GATE_CASES} distributions: threshold > mean, VarianceSeriesDiverges raised, partial variance at {} exceeds that at {GATE_HORIZON} with no finite tail bound",
        2 * GATE_HORIZON
    ))
}

fn criterion_8() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..DEGENERATE_CASES {
        let rate = rng.random_range(-0.5..0.3);
        let k = rate + rng.random_range(0.001..0.5);
        let d0 = rng.random_range(0.1..10.0);
        let g = GrowthDistribution::degenerate(rate).map_err(|e| e.to_string())?;
        let spec = StockSpec::new(d0, k, g).map_err(|e| e.to_string())?;
        let v = price_variance(&spec).map_err(|e| e.to_string())?;
        let gordon = gordon_price(d0, rate, k).map_err(|e| e.to_string())?;
        ok &= v.price_variance == 0.0;
        worst = worst.max(rel(v.expected_price, gordon));
    }
    ensure(
        ok && worst <= DEGENERATE_REL,
        format!("{DEGENERATE_CASES} specs, variance 0: {ok}, worst rel err vs Gordon {worst:.2e} (want <= {DEGENERATE_REL:e})"),
    )
}

fn criterion_9() -> Result<String, String> {
    let spec = stock_1();
    let (d0, g) = (spec.d0(), spec.growth());
    let a = dividend_covariance(d0, g, 1, 2).map_err(|e| e.to_string())?;
    let b = dividend_covariance(d0, g, 2, 3).map_err(|e| e.to_string())?;
    ensure(
        (a - b).abs() > NONSTATIONARY_ABS,
        format!("cov(d1,d2) = {a:.10}, cov(d2,d3) = {b:.10}, difference {:.3e} (want > {NONSTATIONARY_ABS:e})", (a - b).abs()),
    )
}

fn criterion_10() -> Result<String, String> {
    let spec = three_outcome();
    let exact = price_variance(&spec).map_err(|e| e.to_string())?.price_variance;
    let h = recommend_horizon(&spec, HORIZON_TAIL).map_err(|e| e.to_string())?;
    let t = truncated_price_moments(&spec, h, SERIES_REL).map_err(|e| e.to_string())?;
    let series_err = rel(t.partial_price_variance, exact);
    let (mc_ok, mc_detail) = monte_carlo(&spec, "three outcomes")?;
    ensure(
        series_err <= SERIES_REL && mc_ok,
        format!("series rel err {series_err:.2e} (want <= {SERIES_REL:e}); {mc_detail}"),
    )
}

fn criterion_11() -> Result<String, String> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/two_stocks.toml");
    let fixture = fixture.to_str().ok_or("fixture path is not UTF-8")?;
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_ddm"))
            .args(args)
            .output()
            .map_err(|e| e.to_string())
    };
    let validate = ["validate", "--format", "machine", "--seed", "42", fixture];
    let first = run(&validate)?;
    let second = run(&validate)?;
    let identical = !first.stdout.is_empty() && first.stdout == second.stdout;
    let value = run(&["value", "--format", "machine", fixture])?;
    let golden = include_str!("golden/two_stocks_value.json");
    let golden_ok = value.status.success() && value.stdout == golden.as_bytes();
    ensure(
        identical && golden_ok,
        format!(
            "validate reruns byte-identical: {identical} ({} bytes); value matches golden: {golden_ok}",
            first.stdout.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };
    suite.run(1, "example expected price", criterion_1);
    suite.run(2, "example price variance", criterion_2);
    suite.run(3, "series oracle", criterion_3);
    suite.run(4, "Monte Carlo oracle", criterion_4);
    suite.run(5, "enumeration equivalence", criterion_5);
    suite.run(6, "conditional moment identity", criterion_6);
    suite.run(7, "convergence gate", criterion_7);
    suite.run(8, "degenerate reduction", criterion_8);
    suite.run(9, "non-stationary covariance", criterion_9);
    suite.run(10, "three-outcome generalization", criterion_10);
    suite.run(11, "CLI determinism and golden output", criterion_11);
    println!("{} of 11 criteria failed", suite.failures);
    if suite.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
