//! TOML stock-spec files.
//!
//! ```toml
//! [options]            # optional, all keys optional
//! horizon = 500
//! paths = 100000
//! seed = 42
//! tolerance = 1e-6
//!
//! [[stock]]
//! label = "stock-1"
//! d0 = 2.0
//! k = 0.05
//! growth = [
//!     { rate = -0.02, probability = 0.5 },
//!     { rate = 0.04, probability = 0.5 },
//! ]
//! ```

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use stochastic_ddm::{GrowthDistribution, ModelError, Outcome, StockSpec};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl RunOptions {
    fn is_empty(&self) -> bool {
        *self == RunOptions::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockEntry {
    pub label: String,
    pub d0: f64,
    pub k: f64,
    pub growth: Vec<Outcome>,
}

/// Line numbers (1-based) of an entry and its fields, for diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EntryLocation {
    pub line: usize,
    pub d0: usize,
    pub k: usize,
    pub growth: usize,
    /// `(rate, probability)` lines per outcome.
    pub outcomes: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecFile {
    pub options: RunOptions,
    pub stocks: Vec<StockEntry>,
    /// Parallel to `stocks`; empty for files built in code.
    pub locations: Vec<EntryLocation>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("spec file has no [[stock]] entries")]
    NoEntries,
}

/// A stock entry that does not form a valid model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDiagnostic {
    pub entry: usize,
    pub label: String,
    pub field: String,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for EntryDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stock[{}] '{}', {}", self.entry, self.label, self.field)?;
        if self.line > 0 {
            write!(f, " (line {})", self.line)?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    options: RunOptions,
    #[serde(default)]
    stock: Vec<Spanned<RawStock>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStock {
    label: String,
    d0: Spanned<f64>,
    k: Spanned<f64>,
    growth: Spanned<Vec<RawOutcome>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutcome {
    rate: Spanned<f64>,
    probability: Spanned<f64>,
}

#[derive(Serialize)]
struct EmitFile<'a> {
    #[serde(skip_serializing_if = "RunOptions::is_empty")]
    options: &'a RunOptions,
    stock: &'a [StockEntry],
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    let end = span.start.min(text.len());
    text[..end].bytes().filter(|&b| b == b'\n').count() + 1
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self, SpecFileError> {
        let raw: RawFile = toml::from_str(text).map_err(|e| SpecFileError::Syntax {
            line: e.span().map_or(0, |s| line_of(text, s)),
            message: e.message().to_string(),
        })?;
        if raw.stock.is_empty() {
            return Err(SpecFileError::NoEntries);
        }
        let mut stocks = Vec::with_capacity(raw.stock.len());
        let mut locations = Vec::with_capacity(raw.stock.len());
        for spanned in raw.stock {
            let line = line_of(text, spanned.span());
            let stock = spanned.into_inner();
            locations.push(EntryLocation {
                line,
                d0: line_of(text, stock.d0.span()),
                k: line_of(text, stock.k.span()),
                growth: line_of(text, stock.growth.span()),
                outcomes: stock
                    .growth
                    .get_ref()
                    .iter()
                    .map(|o| (line_of(text, o.rate.span()), line_of(text, o.probability.span())))
                    .collect(),
            });
            stocks.push(StockEntry {
                label: stock.label,
                d0: stock.d0.into_inner(),
                k: stock.k.into_inner(),
                growth: stock
                    .growth
                    .into_inner()
                    .into_iter()
                    .map(|o| Outcome::new(o.rate.into_inner(), o.probability.into_inner()))
                    .collect(),
            });
        }
        Ok(SpecFile {
            options: raw.options,
            stocks,
            locations,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&EmitFile {
            options: &self.options,
            stock: &self.stocks,
        })
        .expect("spec files always serialize")
    }

    /// Builds the model for entry `index`, or explains which field is wrong.
    pub fn stock_spec(&self, index: usize) -> Result<StockSpec, EntryDiagnostic> {
        let entry = &self.stocks[index];
        let built = GrowthDistribution::validate(entry.growth.iter().map(|o| (o.rate, o.probability)))
            .and_then(|g| StockSpec::new(entry.d0, entry.k, g));
        built.map_err(|err| self.diagnose(index, &err))
    }

    /// Attaches entry, field and line to a model error for entry `index`.
    pub fn diagnose(&self, index: usize, err: &ModelError) -> EntryDiagnostic {
        let loc = self.locations.get(index).cloned().unwrap_or_default();
        let outcome_line = |i: usize, pick_rate: bool| {
            loc.outcomes
                .get(i)
                .map_or(loc.growth, |&(r, p)| if pick_rate { r } else { p })
        };
        let (field, line) = match err {
            ModelError::AnyRateNotAboveMinusOne { index, .. } => {
                (format!("growth[{index}].rate"), outcome_line(*index, true))
            }
            ModelError::NonPositiveProbability { index, .. } => {
                (format!("growth[{index}].probability"), outcome_line(*index, false))
            }
            ModelError::EmptyDistribution
            | ModelError::ProbabilitiesDoNotSumToOne { .. }
            | ModelError::NotTwoOutcome { .. } => ("growth".to_string(), loc.growth),
            ModelError::NonPositiveDividend { .. } => ("d0".to_string(), loc.d0),
            ModelError::DiscountNotAboveMinusOne { .. }
            | ModelError::DiscountNotAboveGrowth { .. }
            | ModelError::DiscountNotAboveMeanGrowth { .. }
            | ModelError::VarianceSeriesDiverges { .. } => ("k".to_string(), loc.k),
            _ => ("options".to_string(), loc.line),
        };
        EntryDiagnostic {
            entry: index,
            label: self.stocks[index].label.clone(),
            field,
            line,
            message: err.to_string(),
        }
    }
}
