//! Local slopes of the log-log fluctuation curve.
//!
//! A power law is a straight line in log-log coordinates, so genuine
//! scaling means the slope of a small sliding window is constant across
//! scales. Small windows track the curve closely but scatter; large
//! windows smooth the scatter at the cost of bias near curvature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats;

use super::FluctuationCurve;

/// One sliding-window fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalSlopePoint {
    /// Mean log10 block size of the window.
    pub log10_n_center: f64,
    /// Window slope.
    pub alpha: f64,
    pub r2: f64,
}

/// Slopes of consecutive-point OLS fits slid across the curve.
#[derive(Debug, Clone, Serialize)]
pub struct LocalSlopeCurve {
    pub window: usize,
    pub points: Vec<LocalSlopePoint>,
}

/// Fits a line to every run of `window` consecutive usable (F > 0)
/// log-log points.
pub fn local_slopes(curve: &FluctuationCurve, window: usize) -> Result<LocalSlopeCurve> {
    if window < 3 {
        return Err(Error::InvalidInput(format!(
            "local-slope window must be >= 3, got {window}"
        )));
    }
    let pts = curve.log_points();
    if pts.len() < window {
        return Err(Error::InsufficientPoints {
            needed: window,
            available: pts.len(),
        });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut points = Vec::with_capacity(pts.len() - window + 1);
    for start in 0..=pts.len() - window {
        let wx = &xs[start..start + window];
        let wy = &ys[start..start + window];
        let fit = stats::ols_line(wx, wy)?;
        points.push(LocalSlopePoint {
            log10_n_center: stats::mean(wx),
            alpha: fit.slope,
            r2: fit.r2,
        });
    }
    Ok(LocalSlopeCurve { window, points })
}
