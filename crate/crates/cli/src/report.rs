//! Report types and their human and machine renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use stochastic_ddm::{JointDividendTable, SimulationReport, TruncationReport};

use crate::spec_file::EntryDiagnostic;

pub const MODEL_DESCRIPTION: &str =
    "dividend discount model, i.i.d. discrete growth: d_{j+1} = d_j (1 + g), P = sum_{j>=1} d_j / (1 + k)^j";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Agree,
    Disagree,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleChecks {
    pub tolerance: f64,
    /// Truncated series within `tolerance` (relative) of both closed forms.
    pub series: Verdict,
    /// Monte Carlo mean interval contains the expected price.
    pub simulation_mean: Verdict,
    /// Monte Carlo variance interval contains `price_variance`.
    pub simulation_variance: Verdict,
    /// Monte Carlo variance interval contains `discounted_sum_variance`.
    /// Informational; does not enter `overall`.
    pub simulation_discounted_sum_variance: Verdict,
    pub overall: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockReport {
    pub label: String,
    pub d0: f64,
    pub k: f64,
    pub valid: bool,
    pub expectation_valid: bool,
    pub variance_valid: bool,
    pub mean_growth: Option<f64>,
    pub variance_growth: Option<f64>,
    pub expected_price: Option<f64>,
    pub price_variance: Option<f64>,
    pub price_std: Option<f64>,
    pub convergence_threshold: Option<f64>,
    pub discounted_sum_variance: Option<f64>,
    pub discounted_sum_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<OracleChecks>,
    pub diagnostics: Vec<EntryDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValuationReport {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub stocks: Vec<StockReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub label: String,
    pub j: u32,
    pub p: u32,
    pub expected_dividend_j: f64,
    pub expected_dividend_p: f64,
    pub variance_j: f64,
    pub cross_moment: Option<f64>,
    pub covariance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_table: Option<JointDividendTable>,
    pub diagnostics: Vec<EntryDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub rows: Vec<MomentRow>,
}

pub fn to_machine<T: Serialize>(report: &T) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("reports always serialize");
    out.push('\n');
    out
}

fn num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.3}"),
        Some(v) => format!("{v}"),
        None => "-".to_string(),
    }
}

/// Growth rates and thresholds are too small for three decimals.
fn rate(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{v:.6}"))
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Agree => "agree",
        Verdict::Disagree => "DISAGREE",
        Verdict::Inconclusive => "inconclusive",
    }
}

impl ValuationReport {
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        for s in &self.stocks {
            let _ = writeln!(out, "{} (d0 = {}, k = {})", s.label, s.d0, s.k);
            if !s.valid && s.mean_growth.is_none() {
                for d in &s.diagnostics {
                    let _ = writeln!(out, "  error: {d}");
                }
                continue;
            }
            let _ = writeln!(out, "  E[g]                     {}", rate(s.mean_growth));
            let _ = writeln!(out, "  Var[g]                   {}", rate(s.variance_growth));
            let _ = writeln!(out, "  expected price           {}", num(s.expected_price));
            let _ = writeln!(out, "  price variance           {}", num(s.price_variance));
            let _ = writeln!(out, "  price std                {}", num(s.price_std));
            let _ = writeln!(out, "  convergence threshold    {}", rate(s.convergence_threshold));
            let _ = writeln!(out, "  discounted-sum variance  {}", num(s.discounted_sum_variance));
            if let Some(t) = &s.truncation {
                let _ = writeln!(
                    out,
                    "  series (H = {})         E {} / Var {} (tail {:.3e} / {:.3e})",
                    t.horizon,
                    num(Some(t.partial_expected_price)),
                    num(Some(t.partial_price_variance)),
                    t.tail_bound_expected,
                    t.tail_bound_variance
                );
            }
            if let Some(m) = &s.simulation {
                let _ = writeln!(
                    out,
                    "  simulation ({} paths)  mean {} [{}, {}]",
                    m.n_paths,
                    num(Some(m.sample_mean)),
                    num(Some(m.ci95_mean.lower)),
                    num(Some(m.ci95_mean.upper))
                );
                match m.ci95_variance {
                    Some(ci) => {
                        let _ = writeln!(
                            out,
                            "                          var  {} [{}, {}]",
                            num(Some(m.sample_variance)),
                            num(Some(ci.lower)),
                            num(Some(ci.upper))
                        );
                    }
                    None => {
                        let _ = writeln!(out, "                          var  {} [no interval]", num(Some(m.sample_variance)));
                    }
                }
            }
            if let Some(c) = &s.checks {
                let _ = writeln!(
                    out,
                    "  checks                   series {}, mean {}, variance {}, discounted-sum variance {} => {}",
                    verdict(c.series),
                    verdict(c.simulation_mean),
                    verdict(c.simulation_variance),
                    verdict(c.simulation_discounted_sum_variance),
                    verdict(c.overall)
                );
            }
            for d in &s.diagnostics {
                let _ = writeln!(out, "  diagnostic: {d}");
            }
        }
        out
    }
}

impl MomentsReport {
    pub fn to_human(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let _ = writeln!(out, "{} (j = {}, p = {})", row.label, row.j, row.p);
            let _ = writeln!(out, "  E[d_j]          {}", num(Some(row.expected_dividend_j)));
            let _ = writeln!(out, "  E[d_p]          {}", num(Some(row.expected_dividend_p)));
            let _ = writeln!(out, "  Var(d_j)        {:.4}", row.variance_j);
            let _ = writeln!(out, "  E[d_j d_p]      {}", num(row.cross_moment));
            let _ = writeln!(out, "  cov(d_j, d_p)   {}", row.covariance.map_or("-".into(), |c| format!("{c:.4}")));
            if let Some(table) = &row.joint_table {
                let _ = writeln!(out, "  joint law of (s, r), rows s = 0..={}, columns r = 0..={}", table.j, table.p);
                let width = table.p as usize + 1;
                for (s, chunk) in table.entries.chunks(width).enumerate() {
                    let cells: Vec<String> = chunk.iter().map(|e| format!("{:.4}", e.probability)).collect();
                    let _ = writeln!(out, "    s={s:<3} {}  | {:.4}", cells.join(" "), table.marginal_j()[s]);
                }
                let marginal: Vec<String> = table.marginal_p().iter().map(|q| format!("{q:.4}")).collect();
                let _ = writeln!(out, "    total {}  | {:.4}", marginal.join(" "), table.total_probability());
            }
            for d in &row.diagnostics {
                let _ = writeln!(out, "  diagnostic: {d}");
            }
        }
        out
    }
}
