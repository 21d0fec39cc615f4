//! Least-squares power-law fits in log-log coordinates.

use serde::Serialize;

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual of the fitted line.
    pub max_residual: f64,
    /// The `(log scale, log ratio)` points the line was fitted to.
    pub points: Vec<(f64, f64)>,
}

/// Ordinary least squares line through `points`; needs `min_points` distinct
/// abscissae.
pub fn fit_line(points: Vec<(f64, f64)>, min_points: usize) -> Result<FitResult> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    if xs.len() < min_points.max(2) {
        return Err(LabError::TooFewPoints { needed: min_points.max(2), got: xs.len() });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = points.iter().map(|p| (p.1 - intercept - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(FitResult { slope, intercept, max_residual, points })
}
