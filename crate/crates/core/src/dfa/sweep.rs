//! Detrending-order and test-duration sweeps.
//!
//! Comparing fluctuation curves across detrending orders separates
//! artificial crossovers (unremoved trends; they vanish once the order
//! exceeds the trend degree) from persistent ones (genuine changes in
//! correlation structure; position stable across orders). The duration
//! sweep re-estimates the exponent on growing prefixes of the recording.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::{BehaviorSeries, Profile};

use super::{
    default_scales_with, detect_crossover, fit_scaling, fluctuation_function, test_long_memory,
    CrossoverReport, FluctuationCurve, LongMemoryTest, ScaleConfig, ScalingFit,
};

/// Two crossovers at different orders are "the same" when their
/// breakpoints agree within this many log10 units.
const BREAK_AGREEMENT_LOG10: f64 = 0.3;

/// Verdict of a detrending-order sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepClassification {
    /// No order shows a crossover.
    NoCrossover,
    /// A crossover at some order vanishes at a higher order: a trend
    /// artifact, not structure.
    Artificial,
    /// A crossover is present at every order with stable position.
    Persistent,
    /// Crossover pattern fits neither rule (e.g. present at all orders
    /// but wandering, or appearing only at the highest order).
    Indeterminate,
}

/// Analysis of one detrending order.
#[derive(Debug, Clone, Serialize)]
pub struct OrderAnalysis {
    pub order: usize,
    pub curve: FluctuationCurve,
    pub fit: ScalingFit,
    pub test: LongMemoryTest,
    pub crossover: CrossoverReport,
}

/// Result of [`detrending_sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct DetrendingSweep {
    pub per_order: Vec<OrderAnalysis>,
    pub classification: SweepClassification,
    /// Lowest order from which no crossover remains at that order or any
    /// higher one; `None` when crossovers persist through the highest
    /// order analyzed.
    pub recommended_order: Option<usize>,
}

/// Runs the fluctuation analysis at each detrending order and classifies
/// the crossover pattern.
pub fn detrending_sweep(
    series: &BehaviorSeries,
    orders: &[usize],
    cfg: &ScaleConfig,
) -> Result<DetrendingSweep> {
    detrending_sweep_profile(&Profile::from_series(series), orders, cfg)
}

/// [`detrending_sweep`] on a prebuilt profile (also used for real-valued
/// surrogate series).
pub fn detrending_sweep_profile(
    profile: &Profile,
    orders: &[usize],
    cfg: &ScaleConfig,
) -> Result<DetrendingSweep> {
    if orders.is_empty() {
        return Err(Error::InvalidInput("no detrending orders given".into()));
    }
    let mut orders = orders.to_vec();
    orders.sort_unstable();
    orders.dedup();

    let mut per_order = Vec::with_capacity(orders.len());
    for &m in &orders {
        let scales = default_scales_with(profile.len(), m, cfg.cap, cfg.points_per_decade)?;
        let curve = fluctuation_function(profile, m, &scales)?;
        let fit = fit_scaling(&curve, None)?;
        let test = test_long_memory(&fit)?;
        let crossover = detect_crossover(&curve)?;
        per_order.push(OrderAnalysis {
            order: m,
            curve,
            fit,
            test,
            crossover,
        });
    }

    let classification = classify(&per_order);
    let recommended_order = recommend(&per_order);
    Ok(DetrendingSweep {
        per_order,
        classification,
        recommended_order,
    })
}

fn classify(per_order: &[OrderAnalysis]) -> SweepClassification {
    let flags: Vec<bool> = per_order.iter().map(|o| o.crossover.has_crossover).collect();
    if flags.iter().all(|f| !f) {
        return SweepClassification::NoCrossover;
    }
    // Crossover at order k that is gone at some higher order: artificial.
    let vanishes = (0..flags.len())
        .any(|i| flags[i] && flags[i + 1..].iter().any(|later| !later));
    if vanishes {
        return SweepClassification::Artificial;
    }
    if flags.iter().all(|f| *f) {
        let breaks: Vec<f64> = per_order
            .iter()
            .map(|o| o.crossover.break_log10_n)
            .collect();
        let lo = breaks.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = breaks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= BREAK_AGREEMENT_LOG10 {
            return SweepClassification::Persistent;
        }
    }
    SweepClassification::Indeterminate
}

fn recommend(per_order: &[OrderAnalysis]) -> Option<usize> {
    // Lowest order such that it and every higher analyzed order are
    // crossover-free: the smallest detrending that eliminated the trend.
    let mut recommended = None;
    for o in per_order.iter().rev() {
        if o.crossover.has_crossover {
            break;
        }
        recommended = Some(o.order);
    }
    recommended
}

/// One entry of a duration sweep.
#[derive(Debug, Clone, Serialize)]
pub struct DurationPoint {
    pub duration_s: f64,
    pub samples: usize,
    /// `None` when the prefix was skipped (see `note`).
    pub fit: Option<ScalingFit>,
    pub note: Option<String>,
}

/// Re-fits the scaling exponent on increasing prefixes of the series.
///
/// Prefixes too short for the requested order are recorded with a note
/// rather than failing the whole sweep.
pub fn duration_sweep(
    series: &BehaviorSeries,
    durations_s: &[f64],
    order: usize,
    cfg: &ScaleConfig,
) -> Result<Vec<DurationPoint>> {
    duration_sweep_profile(&Profile::from_series(series), durations_s, order, cfg)
}

/// [`duration_sweep`] on a prebuilt profile.
pub fn duration_sweep_profile(
    profile: &Profile,
    durations_s: &[f64],
    order: usize,
    cfg: &ScaleConfig,
) -> Result<Vec<DurationPoint>> {
    if durations_s.is_empty() {
        return Err(Error::InvalidInput("no durations given".into()));
    }
    let dt = profile.source_dt();
    let mut durations = durations_s.to_vec();
    durations.sort_by(f64::total_cmp);
    durations.dedup();

    let mut out = Vec::with_capacity(durations.len());
    for &duration_s in &durations {
        if !(duration_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "durations must be positive, got {duration_s}"
            )));
        }
        let samples = ((duration_s / dt) + 1e-9).floor() as usize;
        if samples > profile.len() {
            out.push(DurationPoint {
                duration_s,
                samples,
                fit: None,
                note: Some(format!(
                    "requested {samples} samples but series has {}",
                    profile.len()
                )),
            });
            continue;
        }
        let entry = analyze_prefix(profile, samples, order, cfg);
        match entry {
            Ok(fit) => out.push(DurationPoint {
                duration_s,
                samples,
                fit: Some(fit),
                note: None,
            }),
            Err(err) => out.push(DurationPoint {
                duration_s,
                samples,
                fit: None,
                note: Some(err.to_string()),
            }),
        }
    }
    Ok(out)
}

fn analyze_prefix(
    profile: &Profile,
    samples: usize,
    order: usize,
    cfg: &ScaleConfig,
) -> Result<ScalingFit> {
    let prefix = profile.prefix(samples)?;
    let scales = default_scales_with(samples, order, cfg.cap, cfg.points_per_decade)?;
    let curve = fluctuation_function(&prefix, order, &scales)?;
    fit_scaling(&curve, None)
}
