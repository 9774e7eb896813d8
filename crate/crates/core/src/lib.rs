//! Long-range correlation analysis of binary behavioral time series.
//!
//! The crate estimates the scaling exponent of a 0/1 activity sequence by
//! Detrended Fluctuation Analysis and supplies the machinery needed to
//! trust that estimate: detrending-order sweeps that separate trend
//! artifacts from genuine crossovers, local-slope curves that verify the
//! log-log plot is actually straight, a periodicity pre-check, ARFIMA
//! surrogates for empirical confidence bands, duration-sensitivity
//! sweeps, and power-law vs exponential fits of event-duration
//! distributions.
//!
//! Modules:
//! - [`series`]: the 0/1 data model, tracking ingestion, activity shares.
//! - [`dfa`]: fluctuation curves, scaling fits, the d = 0 test, local
//!   slopes, crossover detection, order/duration sweeps.
//! - [`surrogate`]: ARFIMA generation, trends, empirical exponent bands.
//! - [`events`]: run-length events and duration-distribution fits.
//! - [`spectrum`]: periodogram gate against sinusoidal contamination.
//! - [`io`]: the CSV and sidecar file formats.
//!
//! Everything is a pure function of its inputs: same input, same output,
//! down to the last bit. Randomized procedures take explicit seeds.

pub mod dfa;
pub mod error;
pub mod events;
pub mod io;
pub mod series;
pub mod spectrum;
pub mod stats;
pub mod surrogate;

pub use dfa::{
    default_scales, default_scales_with, detect_crossover, detect_crossover_with,
    detrending_sweep, detrending_sweep_profile, duration_sweep, duration_sweep_profile,
    fit_scaling, fluctuation_function, fluctuation_function_with, local_slopes, test_long_memory,
    CrossoverReport, CurvePoint, DetrendingSweep, DurationPoint, FluctuationCurve,
    FluctuationOptions, LocalSlopeCurve, LocalSlopePoint, LongMemoryTest, OrderAnalysis,
    ScaleCap, ScaleConfig, ScalingFit, SweepClassification,
};
pub use error::{Error, Result};
pub use events::{
    classify_distribution, classify_distribution_with, duration_histogram, extract_events,
    fit_exponential, fit_power_law, pooled_duration_histogram, DistributionClass,
    DistributionComparison, DistributionFit, DurationHistogram, Event, EventRuns, EventState,
    FitFamily,
};
pub use series::{
    ingest_tracking, percent_time_ambulating, percent_time_immobile, profile, BehaviorSeries,
    Profile, Subject, TrackFix,
};
pub use spectrum::{
    detect_periodicity, periodogram, periodogram_values, PeriodicityCheck, PowerSpectrum,
};
pub use surrogate::{
    add_trend, binarize_at_median, derive_seed, empirical_ci, empirical_ci_with,
    fractional_weights, gen_arfima, gen_arfima_with, ArfimaParams, EmpiricalCi, GenOptions,
    TrendSpec,
};
