use rayon::prelude::*;
use stochastic_ddm::{
    discounted_sum_threshold, discounted_sum_variance, dividend_covariance, dividend_cross_moment,
    dividend_variance, enumerate_joint_table, expected_dividend, price_variance,
    recommend_horizon, simulate_price_moments, truncated_price_moments, ModelError,
    SimulationConfig, StockSpec, DEFAULT_ENUMERATION_CAP,
};

use crate::report::{
    MomentRow, MomentsReport, OracleChecks, StockReport, ValuationReport, Verdict,
    MODEL_DESCRIPTION,
};
use crate::spec_file::SpecFile;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    Success = 0,
    ParseOrIo = 1,
    ModelValidity = 2,
    OracleDisagreement = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Parse/IO errors win over model errors, which win over oracle
    /// disagreements.
    fn worst(self, other: ExitStatus) -> ExitStatus {
        let rank = |s: ExitStatus| match s {
            ExitStatus::Success => 0,
            ExitStatus::OracleDisagreement => 1,
            ExitStatus::ModelValidity => 2,
            ExitStatus::ParseOrIo => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

pub const DEFAULT_PATHS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Relative tail used to pick a horizon when none is given.
pub const DEFAULT_RELATIVE_TAIL: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    pub horizon: Option<u32>,
    pub paths: Option<u64>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub workers: Option<usize>,
}

impl ValidateOptions {
    /// Command-line values take precedence over the file's `[options]`.
    fn resolve(&self, file: &SpecFile) -> ResolvedOptions {
        ResolvedOptions {
            horizon: self.horizon.or(file.options.horizon),
            paths: self.paths.or(file.options.paths).unwrap_or(DEFAULT_PATHS),
            seed: self.seed.or(file.options.seed).unwrap_or(DEFAULT_SEED),
            tolerance: self
                .tolerance
                .or(file.options.tolerance)
                .unwrap_or(DEFAULT_TOLERANCE),
            workers: self.workers.unwrap_or(stochastic_ddm::simulation::DEFAULT_WORKERS),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ResolvedOptions {
    horizon: Option<u32>,
    paths: u64,
    seed: u64,
    tolerance: f64,
    workers: usize,
}

fn closed_form_entry(file: &SpecFile, index: usize) -> (StockReport, Option<StockSpec>) {
    let entry = &file.stocks[index];
    let mut report = StockReport {
        label: entry.label.clone(),
        d0: entry.d0,
        k: entry.k,
        valid: false,
        expectation_valid: false,
        variance_valid: false,
        mean_growth: None,
        variance_growth: None,
        expected_price: None,
        price_variance: None,
        price_std: None,
        convergence_threshold: None,
        discounted_sum_variance: None,
        discounted_sum_threshold: None,
        truncation: None,
        simulation: None,
        checks: None,
        diagnostics: Vec::new(),
    };
    let spec = match file.stock_spec(index) {
        Ok(spec) => spec,
        Err(diag) => {
            report.diagnostics.push(diag);
            return (report, None);
        }
    };
    let g = spec.growth();
    report.mean_growth = Some(g.mean());
    report.variance_growth = Some(g.variance());
    report.convergence_threshold = Some(stochastic_ddm::convergence_threshold(g));
    report.discounted_sum_threshold = Some(discounted_sum_threshold(g));
    report.expectation_valid = spec.expectation_valid();
    report.variance_valid = spec.variance_valid();
    report.discounted_sum_variance = discounted_sum_variance(&spec).ok();
    match price_variance(&spec) {
        Ok(v) => {
            report.valid = true;
            report.expected_price = Some(v.expected_price);
            report.price_variance = Some(v.price_variance);
            report.price_std = Some(v.price_std);
        }
        Err(err) => {
            report.expected_price = stochastic_ddm::expected_price(&spec).ok();
            report.diagnostics.push(file.diagnose(index, &err));
        }
    }
    (report, Some(spec))
}

fn status_of(reports: &[StockReport]) -> ExitStatus {
    reports.iter().fold(ExitStatus::Success, |acc, r| {
        let own = if !r.valid {
            ExitStatus::ModelValidity
        } else if r.checks.as_ref().is_some_and(|c| c.overall != Verdict::Agree) {
            ExitStatus::OracleDisagreement
        } else {
            ExitStatus::Success
        };
        acc.worst(own)
    })
}

/// Closed-form valuation of every entry.
pub fn cmd_value(file: &SpecFile) -> (ValuationReport, ExitStatus) {
    let stocks: Vec<StockReport> = (0..file.stocks.len())
        .into_par_iter()
        .map(|i| closed_form_entry(file, i).0)
        .collect();
    let status = status_of(&stocks);
    (
        ValuationReport {
            model: MODEL_DESCRIPTION.to_string(),
            generated_at_unix: None,
            seed: None,
            stocks,
        },
        status,
    )
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Agree
    } else {
        Verdict::Disagree
    }
}

fn within(estimate: f64, exact: f64, tolerance: f64) -> bool {
    (estimate - exact).abs() <= tolerance * exact.abs()
}

fn validate_entry(file: &SpecFile, index: usize, opts: ResolvedOptions) -> StockReport {
    let (mut report, spec) = closed_form_entry(file, index);
    let Some(spec) = spec.filter(|_| report.valid) else {
        return report;
    };
    let (Some(expected), Some(variance)) = (report.expected_price, report.price_variance) else {
        return report;
    };
    let horizon = match opts.horizon {
        Some(h) => h,
        None => match recommend_horizon(&spec, DEFAULT_RELATIVE_TAIL) {
            Ok(h) => h,
            Err(err) => {
                report.diagnostics.push(file.diagnose(index, &err));
                return report;
            }
        },
    };

    let series = match truncated_price_moments(&spec, horizon, opts.tolerance) {
        Ok(t) => t,
        Err(err) => {
            report.diagnostics.push(file.diagnose(index, &err));
            return report;
        }
    };
    let series_ok = within(series.partial_expected_price, expected, opts.tolerance)
        && if variance == 0.0 {
            series.partial_price_variance == 0.0
        } else {
            within(series.partial_price_variance, variance, opts.tolerance)
        };
    report.truncation = Some(series);

    let config = SimulationConfig::new(opts.paths, horizon, opts.seed).with_workers(opts.workers);
    let sim = match simulate_price_moments(&spec, &config) {
        Ok(sim) => sim,
        Err(err) => {
            report.diagnostics.push(file.diagnose(index, &err));
            report.checks = Some(OracleChecks {
                tolerance: opts.tolerance,
                series: verdict(series_ok),
                simulation_mean: Verdict::Inconclusive,
                simulation_variance: Verdict::Inconclusive,
                simulation_discounted_sum_variance: Verdict::Inconclusive,
                overall: Verdict::Inconclusive,
            });
            return report;
        }
    };
    let mean_ok = sim.ci95_mean.contains(expected);
    let (variance_check, sum_check) = match sim.variance_interval() {
        Ok(ci) => (
            verdict(ci.contains(variance)),
            report
                .discounted_sum_variance
                .map_or(Verdict::Inconclusive, |v| verdict(ci.contains(v))),
        ),
        Err(err) => {
            report.diagnostics.push(file.diagnose(index, &err));
            (Verdict::Inconclusive, Verdict::Inconclusive)
        }
    };
    let overall = if series_ok && mean_ok && variance_check == Verdict::Agree {
        Verdict::Agree
    } else if variance_check == Verdict::Inconclusive && series_ok && mean_ok {
        Verdict::Inconclusive
    } else {
        Verdict::Disagree
    };
    report.simulation = Some(sim);
    report.checks = Some(OracleChecks {
        tolerance: opts.tolerance,
        series: verdict(series_ok),
        simulation_mean: verdict(mean_ok),
        simulation_variance: variance_check,
        simulation_discounted_sum_variance: sum_check,
        overall,
    });
    report
}

/// Closed forms cross-checked against the truncated series and a seeded
/// simulation.
pub fn cmd_validate(file: &SpecFile, options: &ValidateOptions) -> (ValuationReport, ExitStatus) {
    let opts = options.resolve(file);
    let stocks: Vec<StockReport> = (0..file.stocks.len())
        .into_par_iter()
        .map(|i| validate_entry(file, i, opts))
        .collect();
    let status = status_of(&stocks);
    (
        ValuationReport {
            model: MODEL_DESCRIPTION.to_string(),
            generated_at_unix: None,
            seed: Some(opts.seed),
            stocks,
        },
        status,
    )
}

#[derive(Debug, Clone)]
pub struct MomentsOptions {
    pub j: u32,
    pub p: Option<u32>,
    pub enum_cap: u32,
    /// Restrict to the entry with this label.
    pub entry: Option<String>,
}

impl Default for MomentsOptions {
    fn default() -> Self {
        MomentsOptions {
            j: 1,
            p: None,
            enum_cap: DEFAULT_ENUMERATION_CAP,
            entry: None,
        }
    }
}

/// Dividend moments at periods `j <= p`, with the exact joint table for
/// two-outcome entries within the enumeration cap.
pub fn cmd_moments(file: &SpecFile, options: &MomentsOptions) -> (MomentsReport, ExitStatus) {
    let j = options.j;
    let p = options.p.unwrap_or(j);
    let mut status = ExitStatus::Success;
    let mut rows = Vec::new();
    for (index, entry) in file.stocks.iter().enumerate() {
        if options.entry.as_ref().is_some_and(|label| *label != entry.label) {
            continue;
        }
        let spec = match file.stock_spec(index) {
            Ok(spec) => spec,
            Err(diag) => {
                rows.push(MomentRow {
                    label: entry.label.clone(),
                    j,
                    p,
                    expected_dividend_j: f64::NAN,
                    expected_dividend_p: f64::NAN,
                    variance_j: f64::NAN,
                    cross_moment: None,
                    covariance: None,
                    joint_table: None,
                    diagnostics: vec![diag],
                });
                status = status.worst(ExitStatus::ModelValidity);
                continue;
            }
        };
        let (d0, g) = (spec.d0(), spec.growth());
        let mut row = MomentRow {
            label: entry.label.clone(),
            j,
            p,
            expected_dividend_j: expected_dividend(d0, g, j),
            expected_dividend_p: expected_dividend(d0, g, p),
            variance_j: dividend_variance(d0, g, j),
            cross_moment: None,
            covariance: None,
            joint_table: None,
            diagnostics: Vec::new(),
        };
        let mut fail = |row: &mut MomentRow, err: ModelError| {
            row.diagnostics.push(file.diagnose(index, &err));
            status = status.worst(ExitStatus::ModelValidity);
        };
        match dividend_cross_moment(d0, g, j, p).and_then(|cm| Ok((cm, dividend_covariance(d0, g, j, p)?))) {
            Ok((cm, cov)) => {
                row.cross_moment = Some(cm);
                row.covariance = Some(cov);
                match enumerate_joint_table(d0, g, j, p, options.enum_cap) {
                    Ok(table) => row.joint_table = Some(table),
                    Err(err) => fail(&mut row, err),
                }
            }
            Err(err) => fail(&mut row, err),
        }
        rows.push(row);
    }
    (MomentsReport { rows }, status)
}
