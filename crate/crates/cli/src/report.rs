//! The single row schema shared by every experiment, and its CSV/JSON
//! rendering.
//!
//! Column order: `experiment, row, family, coeffs, d, q, r, scale,
//! numerator, denominator, ratio, slope, intercept, max_residual, predicted,
//! proven_bound, pass`. `scale` is `δ` for family experiments and `N` for
//! exponential sums; `row` is `sample` or `fit`.

use serde::Serialize;

use crate::config::Format;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ReportRow {
    pub experiment: String,
    pub row: String,
    pub family: Option<String>,
    pub coeffs: Option<String>,
    pub d: usize,
    pub q: String,
    pub r: String,
    pub scale: Option<f64>,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
    pub ratio: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub max_residual: Option<f64>,
    pub predicted: Option<f64>,
    pub proven_bound: Option<f64>,
    pub pass: Option<bool>,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn render<T: Serialize>(rows: &[T], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json => Ok(serde_json::to_string_pretty(rows)? + "\n"),
    }
}
