//! Mobility/immobility events and their duration distributions.
//!
//! An event is a maximal constant-state run longer than a threshold
//! (0.6 s by convention). The frequency distribution of event durations
//! is fitted both as a power law (log-log) and as an exponential
//! (semi-log); whichever fits better classifies the distribution.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::BehaviorSeries;
use crate::stats;

/// Conventional minimum event duration in seconds.
pub const DEFAULT_MIN_EVENT_SECONDS: f64 = 0.6;

/// Margin below which the two fit qualities are considered tied.
pub const DEFAULT_CLASSIFY_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventState {
    Mobile,
    Immobile,
}

impl std::fmt::Display for EventState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EventState::Mobile => write!(f, "mobile"),
            EventState::Immobile => write!(f, "immobile"),
        }
    }
}

/// One retained event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub state: EventState,
    /// Run length in samples.
    pub samples: usize,
    /// Run length in seconds (`samples * dt`).
    pub duration_s: f64,
}

/// Events extracted from one series.
#[derive(Debug, Clone, Serialize)]
pub struct EventRuns {
    pub events: Vec<Event>,
    pub min_duration_s: f64,
    pub source_dt: f64,
}

impl EventRuns {
    pub fn count(&self, state: EventState) -> usize {
        self.events.iter().filter(|e| e.state == state).count()
    }
}

/// Splits the series into maximal constant-state runs and keeps those
/// strictly longer than `min_duration_s`.
///
/// Sub-threshold runs are dropped, not merged into their neighbors:
/// merging would invent activity that was never observed.
pub fn extract_events(series: &BehaviorSeries, min_duration_s: f64) -> EventRuns {
    let dt = series.dt();
    let values = series.values();
    let mut events = Vec::new();
    let mut start = 0usize;
    for i in 1..=values.len() {
        if i == values.len() || values[i] != values[start] {
            let samples = i - start;
            let duration_s = samples as f64 * dt;
            if duration_s > min_duration_s {
                events.push(Event {
                    state: if values[start] == 1 {
                        EventState::Mobile
                    } else {
                        EventState::Immobile
                    },
                    samples,
                    duration_s,
                });
            }
            start = i;
        }
    }
    EventRuns {
        events,
        min_duration_s,
        source_dt: dt,
    }
}

/// Exact-duration frequency table of one event state.
#[derive(Debug, Clone, Serialize)]
pub struct DurationHistogram {
    /// (duration seconds, count) with strictly increasing durations and
    /// no zero counts.
    pub bins: Vec<(f64, u64)>,
    pub state: EventState,
    /// Number of event lists pooled into the table.
    pub pooled_subjects: usize,
}

impl DurationHistogram {
    pub fn total_events(&self) -> u64 {
        self.bins.iter().map(|b| b.1).sum()
    }
}

/// Histogram of a single subject's events.
pub fn duration_histogram(runs: &EventRuns, state: EventState) -> Result<DurationHistogram> {
    pooled_duration_histogram(std::slice::from_ref(runs), state)
}

/// Pools events across subjects by concatenating the raw event lists
/// (count-weighted), then tabulating exact durations. Durations are
/// integer multiples of each subject's dt, so binning is exact.
pub fn pooled_duration_histogram(
    all_runs: &[EventRuns],
    state: EventState,
) -> Result<DurationHistogram> {
    // Non-negative f64 bit patterns order like the numbers themselves.
    let mut map: BTreeMap<u64, u64> = BTreeMap::new();
    for runs in all_runs {
        for e in runs.events.iter().filter(|e| e.state == state) {
            *map.entry(e.duration_s.to_bits()).or_insert(0) += 1;
        }
    }
    if map.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    Ok(DurationHistogram {
        bins: map
            .into_iter()
            .map(|(bits, count)| (f64::from_bits(bits), count))
            .collect(),
        state,
        pooled_subjects: all_runs.len(),
    })
}

/// Candidate distribution families for event durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitFamily {
    PowerLaw,
    Exponential,
}

/// A fitted duration distribution.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionFit {
    pub family: FitFamily,
    /// Log-log slope (scaling factor S) for the power law; semi-log slope
    /// (log10 frequency per second) for the exponential.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Set by [`classify_distribution`] on the better-fitting family.
    pub winner: bool,
}

/// OLS of `log10 frequency` on `log10 duration`; the slope is the
/// scaling factor S.
pub fn fit_power_law(h: &DurationHistogram) -> Result<DistributionFit> {
    if h.bins.len() < 3 {
        return Err(Error::InsufficientBins {
            needed: 3,
            available: h.bins.len(),
        });
    }
    let xs: Vec<f64> = h.bins.iter().map(|b| b.0.log10()).collect();
    let ys: Vec<f64> = h.bins.iter().map(|b| (b.1 as f64).log10()).collect();
    let fit = stats::ols_line(&xs, &ys)?;
    Ok(DistributionFit {
        family: FitFamily::PowerLaw,
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        winner: false,
    })
}

/// OLS of `log10 frequency` on duration in seconds.
pub fn fit_exponential(h: &DurationHistogram) -> Result<DistributionFit> {
    if h.bins.len() < 3 {
        return Err(Error::InsufficientBins {
            needed: 3,
            available: h.bins.len(),
        });
    }
    let xs: Vec<f64> = h.bins.iter().map(|b| b.0).collect();
    let ys: Vec<f64> = h.bins.iter().map(|b| (b.1 as f64).log10()).collect();
    let fit = stats::ols_line(&xs, &ys)?;
    Ok(DistributionFit {
        family: FitFamily::Exponential,
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        winner: false,
    })
}

/// Verdict of the power-law vs exponential comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionClass {
    PowerLaw,
    Exponential,
    Inconclusive,
}

/// Both fits plus the winner-by-r2 verdict.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionComparison {
    pub power_law: DistributionFit,
    pub exponential: DistributionFit,
    pub class: DistributionClass,
}

/// Compares the two fits with the default tie margin.
pub fn classify_distribution(h: &DurationHistogram) -> Result<DistributionComparison> {
    classify_distribution_with(h, DEFAULT_CLASSIFY_MARGIN)
}

/// Power law iff its r2 beats the exponential's by at least `margin`;
/// exponential in the reversed case; inconclusive inside the margin.
pub fn classify_distribution_with(
    h: &DurationHistogram,
    margin: f64,
) -> Result<DistributionComparison> {
    let mut power_law = fit_power_law(h)?;
    let mut exponential = fit_exponential(h)?;
    let delta = power_law.r2 - exponential.r2;
    let class = if delta.abs() < margin {
        DistributionClass::Inconclusive
    } else if delta > 0.0 {
        power_law.winner = true;
        DistributionClass::PowerLaw
    } else {
        exponential.winner = true;
        DistributionClass::Exponential
    };
    Ok(DistributionComparison {
        power_law,
        exponential,
        class,
    })
}
