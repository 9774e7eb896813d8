//! The batch pipeline: ingestion, periodicity gate, DFA sweeps, events,
//! pooling, and the report bundle.
//!
//! Per-file analyses run in parallel; results are collected in input
//! order and all artifacts use deterministic formatting, so two runs on
//! identical inputs produce byte-identical bundles.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use fluctus_core::io::{
    write_curve_csv, write_events_csv, write_histogram_csv, write_spectrum_csv,
};
use fluctus_core::{
    classify_distribution_with, detect_periodicity, detrending_sweep, duration_sweep,
    extract_events, fit_power_law, percent_time_ambulating, percent_time_immobile, periodogram,
    pooled_duration_histogram, stats, BehaviorSeries, CrossoverReport, DistributionComparison,
    DurationHistogram, DurationPoint, Error, EventRuns, EventState, FluctuationCurve,
    LocalSlopeCurve, LongMemoryTest, PeriodicityCheck, ScalingFit, SweepClassification,
};

use crate::config::AnalysisConfig;
use crate::format::{render_table, sig6};
use crate::input::{load_series, stem_of};

/// One failed input file.
#[derive(Debug, Clone, Serialize)]
pub struct FileFailure {
    pub file: String,
    pub error: String,
}

/// Fit, test, and crossover for one detrending order.
#[derive(Debug, Clone, Serialize)]
pub struct OrderSummary {
    pub order: usize,
    pub fit: ScalingFit,
    pub test: LongMemoryTest,
    pub crossover: CrossoverReport,
}

/// Detrending sweep with curves stripped (curves live in the CSVs).
#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub per_order: Vec<OrderSummary>,
    pub classification: SweepClassification,
    pub recommended_order: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalSlopesEntry {
    pub window: usize,
    pub curve: Option<LocalSlopeCurve>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateEvents {
    pub events: usize,
    pub histogram_bins: usize,
    pub comparison: Option<DistributionComparison>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventsSection {
    pub min_duration_s: f64,
    pub mobile: StateEvents,
    pub immobile: StateEvents,
}

/// Everything reported about one series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub id: String,
    pub file: String,
    pub n_samples: usize,
    pub dt: f64,
    pub total_seconds: f64,
    pub t_percent_mobile: f64,
    pub t_percent_immobile: f64,
    pub periodicity: PeriodicityCheck,
    /// Present unless the series was too inactive to fit.
    pub dfa: Option<SweepSummary>,
    /// `degenerate-activity` when the fluctuation curve carried no
    /// usable scaling information (long immobility spans).
    pub dfa_flag: Option<String>,
    /// Order used for local slopes and the duration sweep: the
    /// recommended order, or the highest analyzed when crossovers
    /// persist.
    pub analysis_order: Option<usize>,
    pub local_slopes: Vec<LocalSlopesEntry>,
    pub duration_sweep: Vec<DurationPoint>,
    pub events: EventsSection,
}

/// Group-level pooled distribution fits.
#[derive(Debug, Clone, Serialize)]
pub struct PooledState {
    pub subjects: usize,
    pub total_events: u64,
    pub histogram_bins: usize,
    pub comparison: Option<DistributionComparison>,
    /// Mean and standard error of the per-subject log-log slopes, for
    /// subjects with enough bins to fit.
    pub per_subject_slope_mean: Option<f64>,
    pub per_subject_slope_se: Option<f64>,
    pub per_subject_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupReport {
    pub mobile: Option<PooledState>,
    pub immobile: Option<PooledState>,
}

/// The full run report (`report.json`).
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: AnalysisConfig,
    pub series: Vec<SeriesReport>,
    pub failures: Vec<FileFailure>,
    pub group: GroupReport,
}

/// Result of a pipeline run.
pub struct PipelineOutcome {
    pub report: RunReport,
    pub out_dir: PathBuf,
}

impl PipelineOutcome {
    pub fn any_failures(&self) -> bool {
        !self.report.failures.is_empty()
    }
}

/// Plot-ready data produced alongside a [`SeriesReport`].
pub struct SeriesArtifacts {
    stem: String,
    curves: Vec<(usize, FluctuationCurve)>,
    spectrum: fluctus_core::PowerSpectrum,
    runs: EventRuns,
    mobile_hist: Option<DurationHistogram>,
    immobile_hist: Option<DurationHistogram>,
}

fn uniquify_stems(artifacts: &mut [SeriesArtifacts]) {
    let mut seen: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for art in artifacts.iter_mut() {
        let count = seen.entry(art.stem.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            art.stem = format!("{}_{}", art.stem, count);
        }
    }
}

/// Runs the full analysis over `inputs` and writes the report bundle
/// into `out_dir`.
pub fn run_pipeline(
    cfg: &AnalysisConfig,
    inputs: &[PathBuf],
    out_dir: &Path,
) -> Result<PipelineOutcome, Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot build worker pool: {e}")))?;

    let results: Vec<Result<(SeriesReport, SeriesArtifacts), FileFailure>> = pool.install(|| {
        inputs
            .par_iter()
            .map(|path| {
                analyze_file(path, cfg).map_err(|e| FileFailure {
                    file: path.display().to_string(),
                    error: e.to_string(),
                })
            })
            .collect()
    });

    let mut series = Vec::new();
    let mut artifacts = Vec::new();
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok((report, art)) => {
                series.push(report);
                artifacts.push(art);
            }
            Err(failure) => failures.push(failure),
        }
    }

    uniquify_stems(&mut artifacts);
    let group = pool_groups(cfg, &artifacts);

    std::fs::create_dir_all(out_dir)?;
    for art in &artifacts {
        for (order, curve) in &art.curves {
            write_curve_csv(
                &out_dir.join(format!("{}_dfa{}.csv", art.stem, order)),
                curve,
            )?;
        }
        write_spectrum_csv(
            &out_dir.join(format!("{}_spectrum.csv", art.stem)),
            &art.spectrum,
        )?;
        write_events_csv(&out_dir.join(format!("{}_events.csv", art.stem)), &art.runs)?;
        if let Some(h) = &art.mobile_hist {
            write_histogram_csv(&out_dir.join(format!("{}_hist_mobile.csv", art.stem)), h)?;
        }
        if let Some(h) = &art.immobile_hist {
            write_histogram_csv(&out_dir.join(format!("{}_hist_immobile.csv", art.stem)), h)?;
        }
    }
    for (state, name) in [
        (EventState::Mobile, "pooled_hist_mobile.csv"),
        (EventState::Immobile, "pooled_hist_immobile.csv"),
    ] {
        let all: Vec<EventRuns> = artifacts.iter().map(|a| a.runs.clone()).collect();
        if let Ok(h) = pooled_duration_histogram(&all, state) {
            write_histogram_csv(&out_dir.join(name), &h)?;
        }
    }

    let report = RunReport {
        config: cfg.clone(),
        series,
        failures,
        group,
    };
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
    std::fs::write(out_dir.join("report.json"), json + "\n")?;
    std::fs::write(out_dir.join("ci_table.txt"), ci_table(&report))?;

    Ok(PipelineOutcome {
        report,
        out_dir: out_dir.to_path_buf(),
    })
}

fn analyze_file(
    path: &Path,
    cfg: &AnalysisConfig,
) -> fluctus_core::Result<(SeriesReport, SeriesArtifacts)> {
    let series = load_series(path, None, cfg.default_dt)?;
    analyze_series(&series, &path.display().to_string(), &stem_of(path), cfg)
}

/// Analysis of one already-loaded series; split out for testability.
pub fn analyze_series(
    series: &BehaviorSeries,
    file_label: &str,
    stem: &str,
    cfg: &AnalysisConfig,
) -> fluctus_core::Result<(SeriesReport, SeriesArtifacts)> {
    let spectrum = periodogram(series)?;
    let periodicity = detect_periodicity(&spectrum, cfg.periodicity_ratio);

    let scale_cfg = cfg.scale_config();
    let (dfa, dfa_flag, curves) = match detrending_sweep(series, &cfg.detrend_orders, &scale_cfg)
    {
        Ok(sweep) => {
            let flag = sweep
                .per_order
                .iter()
                .any(|o| o.fit.degenerate_activity)
                .then(|| "degenerate-activity".to_string());
            let curves: Vec<(usize, FluctuationCurve)> = sweep
                .per_order
                .iter()
                .map(|o| (o.order, o.curve.clone()))
                .collect();
            let summary = SweepSummary {
                per_order: sweep
                    .per_order
                    .into_iter()
                    .map(|o| OrderSummary {
                        order: o.order,
                        fit: o.fit,
                        test: o.test,
                        crossover: o.crossover,
                    })
                    .collect(),
                classification: sweep.classification,
                recommended_order: sweep.recommended_order,
            };
            (Some(summary), flag, curves)
        }
        Err(Error::DegenerateCurve) => (None, Some("degenerate-activity".to_string()), Vec::new()),
        Err(other) => return Err(other),
    };

    let analysis_order = dfa.as_ref().map(|sweep| {
        sweep
            .recommended_order
            .unwrap_or_else(|| *cfg.detrend_orders.iter().max().expect("validated non-empty"))
    });

    let mut local = Vec::new();
    let mut durations = Vec::new();
    if let Some(order) = analysis_order {
        let curve = curves
            .iter()
            .find(|(o, _)| *o == order)
            .map(|(_, c)| c)
            .expect("analysis order comes from the sweep");
        for &window in &cfg.local_windows {
            match fluctus_core::local_slopes(curve, window) {
                Ok(c) => local.push(LocalSlopesEntry {
                    window,
                    curve: Some(c),
                    note: None,
                }),
                Err(e) => local.push(LocalSlopesEntry {
                    window,
                    curve: None,
                    note: Some(e.to_string()),
                }),
            }
        }
        let duration_grid: Vec<f64> = cfg
            .duration_fractions
            .iter()
            .map(|f| f * series.total_seconds())
            .collect();
        durations = duration_sweep(series, &duration_grid, order, &scale_cfg)?;
    }

    let runs = extract_events(series, cfg.min_event_duration_s);
    let (mobile, mobile_hist) = state_events(&runs, EventState::Mobile, cfg);
    let (immobile, immobile_hist) = state_events(&runs, EventState::Immobile, cfg);

    let report = SeriesReport {
        id: series.subject().id.clone(),
        file: file_label.to_string(),
        n_samples: series.len(),
        dt: series.dt(),
        total_seconds: series.total_seconds(),
        t_percent_mobile: percent_time_ambulating(series),
        t_percent_immobile: percent_time_immobile(series),
        periodicity,
        dfa,
        dfa_flag,
        analysis_order,
        local_slopes: local,
        duration_sweep: durations,
        events: EventsSection {
            min_duration_s: cfg.min_event_duration_s,
            mobile,
            immobile,
        },
    };
    let artifacts = SeriesArtifacts {
        stem: stem.to_string(),
        curves,
        spectrum,
        runs,
        mobile_hist,
        immobile_hist,
    };
    Ok((report, artifacts))
}

fn state_events(
    runs: &EventRuns,
    state: EventState,
    cfg: &AnalysisConfig,
) -> (StateEvents, Option<DurationHistogram>) {
    let count = runs.count(state);
    match fluctus_core::duration_histogram(runs, state) {
        Ok(hist) => {
            let (comparison, note) = match classify_distribution_with(&hist, cfg.classify_margin)
            {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            (
                StateEvents {
                    events: count,
                    histogram_bins: hist.bins.len(),
                    comparison,
                    note,
                },
                Some(hist),
            )
        }
        Err(e) => (
            StateEvents {
                events: count,
                histogram_bins: 0,
                comparison: None,
                note: Some(e.to_string()),
            },
            None,
        ),
    }
}

fn pool_groups(cfg: &AnalysisConfig, artifacts: &[SeriesArtifacts]) -> GroupReport {
    let all: Vec<EventRuns> = artifacts.iter().map(|a| a.runs.clone()).collect();
    let pooled = |state: EventState| -> Option<PooledState> {
        let hist = pooled_duration_histogram(&all, state).ok()?;
        let comparison = classify_distribution_with(&hist, cfg.classify_margin).ok();
        let per_subject: Vec<f64> = artifacts
            .iter()
            .filter_map(|a| {
                let h = fluctus_core::duration_histogram(&a.runs, state).ok()?;
                fit_power_law(&h).ok().map(|f| f.slope)
            })
            .collect();
        let (mean, se) = if per_subject.is_empty() {
            (None, None)
        } else {
            let m = stats::mean(&per_subject);
            let se = stats::sample_sd(&per_subject) / (per_subject.len() as f64).sqrt();
            (Some(m), Some(se))
        };
        Some(PooledState {
            subjects: all.len(),
            total_events: hist.total_events(),
            histogram_bins: hist.bins.len(),
            comparison,
            per_subject_slope_mean: mean,
            per_subject_slope_se: se,
            per_subject_count: per_subject.len(),
        })
    };
    GroupReport {
        mobile: pooled(EventState::Mobile),
        immobile: pooled(EventState::Immobile),
    }
}

/// Table-style summary: one row per series, `alpha ± 1.96*se` per order.
fn ci_table(report: &RunReport) -> String {
    let orders = &report.config.detrend_orders;
    let mut sorted_orders: Vec<usize> = orders.clone();
    sorted_orders.sort_unstable();
    sorted_orders.dedup();

    let mut rows = Vec::new();
    let mut header = vec!["series".to_string()];
    for m in &sorted_orders {
        header.push(format!("DFA{m}"));
    }
    rows.push(header);
    for s in &report.series {
        let mut row = vec![s.id.clone()];
        for m in &sorted_orders {
            let cell = match (&s.dfa, &s.dfa_flag) {
                (Some(sweep), _) => sweep
                    .per_order
                    .iter()
                    .find(|o| o.order == *m)
                    .map(|o| {
                        format!("{} ± {}", sig6(o.fit.alpha), sig6(1.96 * o.fit.se_alpha))
                    })
                    .unwrap_or_else(|| "-".to_string()),
                (None, Some(flag)) => flag.clone(),
                (None, None) => "-".to_string(),
            };
            row.push(cell);
        }
        rows.push(row);
    }
    render_table(&rows)
}
