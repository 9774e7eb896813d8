//! Crossover detection: does the log-log fluctuation curve bend?
//!
//! A two-segment continuous piecewise-linear model is fitted at every
//! admissible interior breakpoint and compared against a single line by
//! BIC. A crossover is declared only when the two-segment model wins by a
//! configurable margin (default 6, conventionally "strong evidence").

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{self, solve_dense};

use super::FluctuationCurve;

/// Default BIC margin the two-segment model must win by.
pub const DEFAULT_BIC_THRESHOLD: f64 = 6.0;

/// Minimum slope change for a crossover to count as one. DFA curves are
/// extremely precise, so noise kinks of a few hundredths in slope can be
/// statistically visible while meaning nothing; crossovers of interest
/// change the exponent by several tenths.
pub const MIN_SLOPE_CONTRAST: f64 = 0.2;

/// Minimum usable log-log points for a breakpoint search.
const MIN_POINTS: usize = 8;

/// Minimum points per segment.
const MIN_SEGMENT: usize = 3;

/// Guard against log(0/0) when both models fit exactly.
const RSS_FLOOR: f64 = 1e-30;

/// Outcome of the one- vs two-segment comparison.
///
/// The segment slopes and fit qualities are reported from independent
/// per-segment line fits at the selected breakpoint (the breakpoint
/// sample belongs to both segments); model selection itself uses the
/// continuity-constrained hinge model. When `has_crossover` is false the
/// segment fields still describe the best two-segment candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CrossoverReport {
    pub has_crossover: bool,
    /// Breakpoint position, log10 of the block size.
    pub break_log10_n: f64,
    /// Slope below the breakpoint.
    pub alpha1: f64,
    /// Slope above the breakpoint.
    pub alpha2: f64,
    pub r2_1: f64,
    pub r2_2: f64,
    /// BIC(one line) - BIC(two segments); positive favors the crossover.
    pub delta_bic: f64,
}

/// [`detect_crossover_with`] at the default BIC threshold.
pub fn detect_crossover(curve: &FluctuationCurve) -> Result<CrossoverReport> {
    detect_crossover_with(curve, DEFAULT_BIC_THRESHOLD)
}

/// Exhaustive breakpoint search over interior grid points.
///
/// The search and the reported segment fits run on the scoring window
/// `16*(order+1) <= n <= N/10`. Below that floor the block polynomial
/// consumes most degrees of freedom and bends the curve systematically;
/// above N/10 fewer than ten blocks enter each F(n) and the points
/// wander too much to support a breakpoint claim.
pub fn detect_crossover_with(
    curve: &FluctuationCurve,
    bic_threshold: f64,
) -> Result<CrossoverReport> {
    let all = curve.log_points();
    if all.len() < MIN_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_POINTS,
            available: all.len(),
        });
    }
    let floor = (16 * (curve.order() + 1)) as f64;
    let cap = curve.source_len() as f64 / 10.0;
    let mut pts: Vec<(f64, f64)> = all
        .iter()
        .copied()
        .filter(|p| {
            let n = 10f64.powf(p.0);
            n >= floor - 0.5 && n <= cap + 0.5
        })
        .collect();
    // Fall back to the full curve when the trimmed window is too thin to
    // say anything (very short series); the score then self-limits.
    if pts.len() < MIN_POINTS {
        pts = all;
    }
    let k = pts.len();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();

    // Model comparison runs on an octave-spaced subsample. Neighboring
    // grid points are computed from almost the same blocks of data, so
    // they carry almost no independent information; scoring them all
    // would let a dense grid manufacture evidence for a bend.
    let sub = octave_subsample(&xs);
    let sub_xs: Vec<f64> = sub.iter().map(|&i| xs[i]).collect();
    let sub_ys: Vec<f64> = sub.iter().map(|&i| ys[i]).collect();

    // Candidate breakpoints keep at least MIN_SEGMENT points per side on
    // the full grid and on the subsample; a hinge that only soaks up the
    // wandering last octave (few blocks, large variance) is not evidence.
    let mut best: Option<(usize, f64)> = None; // (breakpoint index, rss)
    for ci in (MIN_SEGMENT - 1)..=(k - MIN_SEGMENT) {
        let xc = xs[ci];
        let sub_left = sub_xs.iter().filter(|&&x| x <= xc).count();
        let sub_right = sub_xs.iter().filter(|&&x| x > xc).count();
        if sub_left < MIN_SEGMENT || sub_right < MIN_SEGMENT {
            continue;
        }
        let rss = hinge_rss(&xs, &ys, xc)?;
        if best.map_or(true, |(_, b)| rss < b) {
            best = Some((ci, rss));
        }
    }
    let Some((ci, _)) = best else {
        // Span too short for one octave-resolved segment on each side:
        // no crossover claim is supportable.
        let mid = k / 2;
        let left = stats::ols_line(&xs[..=mid], &ys[..=mid])?;
        let right = stats::ols_line(&xs[mid..], &ys[mid..])?;
        return Ok(CrossoverReport {
            has_crossover: false,
            break_log10_n: xs[mid],
            alpha1: left.slope,
            alpha2: right.slope,
            r2_1: left.r2,
            r2_2: right.r2,
            delta_bic: f64::NEG_INFINITY,
        });
    };

    let rss_one_sub = stats::ols_line(&sub_xs, &sub_ys)?.rss;
    let rss_two_sub = hinge_rss(&sub_xs, &sub_ys, xs[ci])?;
    let k_sub = sub.len() as f64;
    let delta_bic = k_sub * ((rss_one_sub + RSS_FLOOR) / (rss_two_sub + RSS_FLOOR)).ln()
        - 2.0 * k_sub.ln();

    let left = stats::ols_line(&xs[..=ci], &ys[..=ci])?;
    let right = stats::ols_line(&xs[ci..], &ys[ci..])?;

    Ok(CrossoverReport {
        has_crossover: delta_bic > bic_threshold
            && (right.slope - left.slope).abs() >= MIN_SLOPE_CONTRAST,
        break_log10_n: xs[ci],
        alpha1: left.slope,
        alpha2: right.slope,
        r2_1: left.r2,
        r2_2: right.r2,
        delta_bic,
    })
}

/// Indices of a subsample spaced at least one octave apart in log10 n,
/// always keeping the first and last point.
fn octave_subsample(xs: &[f64]) -> Vec<usize> {
    let mut keep = vec![0usize];
    let mut last = xs[0];
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x - last >= std::f64::consts::LOG10_2 - 1e-12 {
            keep.push(i);
            last = x;
        }
    }
    if *keep.last().unwrap() != xs.len() - 1 {
        keep.push(xs.len() - 1);
    }
    keep
}

/// Residual sum of squares of the continuous hinge model
/// `y = a + b*x + c*max(0, x - xc)`.
fn hinge_rss(xs: &[f64], ys: &[f64], xc: f64) -> Result<f64> {
    let n = xs.len() as f64;
    let mut sx = 0.0;
    let mut su = 0.0;
    let mut sxx = 0.0;
    let mut sxu = 0.0;
    let mut suu = 0.0;
    let mut sy = 0.0;
    let mut sxy = 0.0;
    let mut suy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - xc).max(0.0);
        sx += x;
        su += u;
        sxx += x * x;
        sxu += x * u;
        suu += u * u;
        sy += y;
        sxy += x * y;
        suy += u * y;
    }
    let mut a = vec![n, sx, su, sx, sxx, sxu, su, sxu, suu];
    let mut b = vec![sy, sxy, suy];
    solve_dense(&mut a, &mut b, 3)?;
    let (c0, c1, c2) = (b[0], b[1], b[2]);
    let mut rss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (x - xc).max(0.0);
        let e = y - (c0 + c1 * x + c2 * u);
        rss += e * e;
    }
    Ok(rss)
}
