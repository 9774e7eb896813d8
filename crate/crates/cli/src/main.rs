//! `fluctus`: long-range correlation analysis of binary behavioral
//! time series.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use fluctus_cli::config::AnalysisConfig;
use fluctus_cli::input::{load_series, stem_of};
use fluctus_cli::pipeline::run_pipeline;
use fluctus_core::io::{
    read_tracking_csv, write_behavior_csv, write_curve_csv, write_events_csv,
    write_histogram_csv, write_sidecar, write_spectrum_csv, write_values_csv,
};
use fluctus_core::{
    binarize_at_median, classify_distribution_with, default_scales_with, detect_periodicity,
    detrending_sweep, duration_histogram, extract_events, fit_scaling, fluctuation_function,
    gen_arfima, ingest_tracking, percent_time_ambulating, periodogram, profile, test_long_memory,
    ArfimaParams, EventState, ScaleCap, Subject, TrendSpec,
};

#[derive(Parser)]
#[command(
    name = "fluctus",
    version,
    about = "Detrended fluctuation analysis of binary behavioral time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CapArg {
    Quarter,
    Tenth,
}

impl From<CapArg> for ScaleCap {
    fn from(value: CapArg) -> Self {
        match value {
            CapArg::Quarter => ScaleCap::Quarter,
            CapArg::Tenth => ScaleCap::Tenth,
        }
    }
}

#[derive(Args)]
struct SeriesInput {
    /// Series CSV (header `value`, one 0/1 per line).
    input: PathBuf,
    /// Sampling interval in seconds; overrides the sidecar.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct ScaleArgs {
    /// Largest block size as a fraction of the series length.
    #[arg(long, value_enum, default_value_t = CapArg::Quarter)]
    cap: CapArg,
    /// Geometric grid density.
    #[arg(long, default_value_t = fluctus_core::dfa::DEFAULT_POINTS_PER_DECADE)]
    points_per_decade: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Binarize tracking coordinates (`t,x,y` CSV) into a 0/1 series.
    Ingest {
        /// Tracking CSV with header `t,x,y`.
        input: PathBuf,
        /// Sampling interval in seconds.
        #[arg(long)]
        dt: f64,
        /// Displacement threshold; motion means moving farther than this.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Subject id recorded in the sidecar (defaults to the file stem).
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        species: Option<String>,
        #[arg(long)]
        treatment: Option<String>,
        /// Output series CSV; a `.meta` sidecar is written next to it.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fluctuation curve, scaling fit, and d=0 test at given orders.
    Dfa {
        #[command(flatten)]
        series: SeriesInput,
        /// Detrending orders, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = vec![3])]
        orders: Vec<usize>,
        #[command(flatten)]
        scales: ScaleArgs,
        /// Directory for curve CSVs (default: alongside the input).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Detrending-order sweep with crossover classification.
    Sweep {
        #[command(flatten)]
        series: SeriesInput,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3, 4])]
        orders: Vec<usize>,
        #[command(flatten)]
        scales: ScaleArgs,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Extract events and fit the duration distributions.
    Events {
        #[command(flatten)]
        series: SeriesInput,
        /// Minimum event duration in seconds.
        #[arg(long, default_value_t = fluctus_core::events::DEFAULT_MIN_EVENT_SECONDS)]
        min_duration: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Periodogram and periodicity verdict.
    Spectrum {
        #[command(flatten)]
        series: SeriesInput,
        /// Peak-to-median power ratio that flags periodicity.
        #[arg(long, default_value_t = fluctus_core::spectrum::DEFAULT_PERIODICITY_RATIO)]
        ratio: f64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate an ARFIMA surrogate series.
    Surrogate {
        /// Series length in samples.
        #[arg(long)]
        n: usize,
        /// Fractional differencing parameter, |d| < 0.5.
        #[arg(long, default_value_t = 0.0)]
        d: f64,
        /// AR coefficients, comma separated.
        #[arg(long, value_delimiter = ',')]
        ar: Vec<f64>,
        /// MA coefficients, comma separated.
        #[arg(long, value_delimiter = ',')]
        ma: Vec<f64>,
        /// Innovation standard deviation.
        #[arg(long, default_value_t = 1.0)]
        sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Added trend: `poly:AMPLITUDE:POWER` or `sin:AMPLITUDE:PERIOD`.
        #[arg(long)]
        trend: Option<String>,
        /// Threshold at the median into a 0/1 series.
        #[arg(long)]
        binarize: bool,
        /// Sampling interval recorded for binarized output.
        #[arg(long, default_value_t = 1.0)]
        dt: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Full batch pipeline: report bundle over one or more series.
    Report {
        /// Series CSVs.
        inputs: Vec<PathBuf>,
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for the report bundle.
        #[arg(long)]
        out_dir: PathBuf,
        /// Override: detrending orders.
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
        /// Override: scale cap.
        #[arg(long, value_enum)]
        cap: Option<CapArg>,
        /// Override: minimum event duration in seconds.
        #[arg(long)]
        min_duration: Option<f64>,
        /// Override: fallback sampling interval.
        #[arg(long)]
        dt: Option<f64>,
        /// Override: worker threads (0 = one per core).
        #[arg(long)]
        workers: Option<usize>,
        /// Override: seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Ingest {
            input,
            dt,
            epsilon,
            id,
            species,
            treatment,
            output,
        } => {
            let rows = read_tracking_csv(&input)?;
            let subject = Subject {
                id: id.unwrap_or_else(|| stem_of(&output)),
                species,
                treatment,
            };
            let series = ingest_tracking(&rows, dt, epsilon, subject.clone())?;
            write_behavior_csv(&output, &series)?;
            let mut meta = BTreeMap::new();
            meta.insert("dt".to_string(), dt.to_string());
            meta.insert("id".to_string(), subject.id.clone());
            if let Some(s) = &subject.species {
                meta.insert("species".to_string(), s.clone());
            }
            if let Some(t) = &subject.treatment {
                meta.insert("treatment".to_string(), t.clone());
            }
            write_sidecar(&fluctus_core::io::sidecar_path(&output), &meta)?;
            println!(
                "{}",
                json!({
                    "samples": series.len(),
                    "dt": series.dt(),
                    "t_percent_mobile": percent_time_ambulating(&series),
                    "output": output.display().to_string(),
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Dfa {
            series,
            orders,
            scales,
            out_dir,
        } => {
            let s = load_series(&series.input, series.dt, None)?;
            let p = profile(&s);
            let dir = resolve_dir(&series.input, out_dir)?;
            let stem = stem_of(&series.input);
            let mut entries = Vec::new();
            for order in orders {
                let grid = default_scales_with(
                    s.len(),
                    order,
                    scales.cap.into(),
                    scales.points_per_decade,
                )?;
                let curve = fluctuation_function(&p, order, &grid)?;
                write_curve_csv(&dir.join(format!("{stem}_dfa{order}.csv")), &curve)?;
                let fit = fit_scaling(&curve, None)?;
                let test = test_long_memory(&fit)?;
                entries.push(json!({ "order": order, "fit": fit, "test": test }));
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "series": stem, "dfa": entries }))?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            series,
            orders,
            scales,
            out_dir,
        } => {
            let s = load_series(&series.input, series.dt, None)?;
            let cfg = fluctus_core::ScaleConfig {
                cap: scales.cap.into(),
                points_per_decade: scales.points_per_decade,
            };
            let sweep = detrending_sweep(&s, &orders, &cfg)?;
            let dir = resolve_dir(&series.input, out_dir)?;
            let stem = stem_of(&series.input);
            for o in &sweep.per_order {
                write_curve_csv(&dir.join(format!("{stem}_dfa{}.csv", o.order)), &o.curve)?;
            }
            let per_order: Vec<serde_json::Value> = sweep
                .per_order
                .iter()
                .map(|o| {
                    json!({
                        "order": o.order,
                        "fit": o.fit,
                        "test": o.test,
                        "crossover": o.crossover,
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "series": stem,
                    "classification": sweep.classification,
                    "recommended_order": sweep.recommended_order,
                    "per_order": per_order,
                }))?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Events {
            series,
            min_duration,
            out_dir,
        } => {
            let s = load_series(&series.input, series.dt, None)?;
            let runs = extract_events(&s, min_duration);
            let dir = resolve_dir(&series.input, out_dir)?;
            let stem = stem_of(&series.input);
            write_events_csv(&dir.join(format!("{stem}_events.csv")), &runs)?;
            let mut out = serde_json::Map::new();
            out.insert("series".into(), json!(stem));
            out.insert("min_duration_s".into(), json!(min_duration));
            for state in [EventState::Mobile, EventState::Immobile] {
                let key = state.to_string();
                match duration_histogram(&runs, state) {
                    Ok(hist) => {
                        write_histogram_csv(
                            &dir.join(format!("{stem}_hist_{key}.csv")),
                            &hist,
                        )?;
                        let verdict = classify_distribution_with(
                            &hist,
                            fluctus_core::events::DEFAULT_CLASSIFY_MARGIN,
                        )
                        .map(|c| json!(c))
                        .unwrap_or_else(|e| json!({ "error": e.to_string() }));
                        out.insert(
                            key,
                            json!({
                                "events": runs.count(state),
                                "bins": hist.bins.len(),
                                "fits": verdict,
                            }),
                        );
                    }
                    Err(e) => {
                        out.insert(key, json!({ "events": 0, "error": e.to_string() }));
                    }
                }
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum {
            series,
            ratio,
            out_dir,
        } => {
            let s = load_series(&series.input, series.dt, None)?;
            let spectrum = periodogram(&s)?;
            let verdict = detect_periodicity(&spectrum, ratio);
            let dir = resolve_dir(&series.input, out_dir)?;
            let stem = stem_of(&series.input);
            write_spectrum_csv(&dir.join(format!("{stem}_spectrum.csv")), &spectrum)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "series": stem,
                    "ratio_threshold": ratio,
                    "periodicity": verdict,
                }))?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Surrogate {
            n,
            d,
            ar,
            ma,
            sd,
            seed,
            trend,
            binarize,
            dt,
            output,
        } => {
            let params = ArfimaParams::new(d, ar, ma, sd)?;
            let mut values = gen_arfima(&params, n, seed)?;
            if let Some(spec) = trend.as_deref() {
                values = fluctus_core::add_trend(&values, &parse_trend(spec)?)?;
            }
            if binarize {
                let series = binarize_at_median(&values, dt, Subject::with_id(stem_of(&output)))?;
                write_behavior_csv(&output, &series)?;
                let mut meta = BTreeMap::new();
                meta.insert("dt".to_string(), dt.to_string());
                meta.insert("id".to_string(), series.subject().id.clone());
                write_sidecar(&fluctus_core::io::sidecar_path(&output), &meta)?;
            } else {
                write_values_csv(&output, &values)?;
            }
            println!(
                "{}",
                json!({
                    "samples": n,
                    "d": d,
                    "seed": seed,
                    "binarized": binarize,
                    "output": output.display().to_string(),
                })
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Report {
            inputs,
            config,
            out_dir,
            orders,
            cap,
            min_duration,
            dt,
            workers,
            seed,
        } => {
            let mut cfg = match config {
                Some(path) => match AnalysisConfig::from_file(&path) {
                    Ok(cfg) => cfg,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return Ok(ExitCode::from(2));
                    }
                },
                None => AnalysisConfig::default(),
            };
            if let Some(orders) = orders {
                cfg.detrend_orders = orders;
            }
            if let Some(cap) = cap {
                cfg.scale_cap = cap.into();
            }
            if let Some(v) = min_duration {
                cfg.min_event_duration_s = v;
            }
            if let Some(v) = dt {
                cfg.default_dt = Some(v);
            }
            if let Some(v) = workers {
                cfg.workers = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if inputs.is_empty() {
                eprintln!("error: no input series given");
                return Ok(ExitCode::from(2));
            }
            if let Err(e) = cfg.validate() {
                eprintln!("error: {e}");
                return Ok(ExitCode::from(2));
            }
            let outcome = run_pipeline(&cfg, &inputs, &out_dir)?;
            for failure in &outcome.report.failures {
                eprintln!("failed: {}: {}", failure.file, failure.error);
            }
            println!(
                "{}",
                json!({
                    "out_dir": outcome.out_dir.display().to_string(),
                    "series_analyzed": outcome.report.series.len(),
                    "failures": outcome.report.failures.len(),
                })
            );
            Ok(if outcome.any_failures() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

fn resolve_dir(
    input: &std::path::Path,
    out_dir: Option<PathBuf>,
) -> std::io::Result<PathBuf> {
    let dir = out_dir.unwrap_or_else(|| {
        input
            .parent()
            .map(|p| p.to_path_buf())
            .unwrap_or_else(|| PathBuf::from("."))
    });
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn parse_trend(spec: &str) -> Result<TrendSpec, fluctus_core::Error> {
    let parts: Vec<&str> = spec.split(':').collect();
    let invalid = || {
        fluctus_core::Error::InvalidInput(format!(
            "trend '{spec}': expected poly:AMPLITUDE:POWER or sin:AMPLITUDE:PERIOD"
        ))
    };
    if parts.len() != 3 {
        return Err(invalid());
    }
    let amplitude: f64 = parts[1].parse().map_err(|_| invalid())?;
    let value: f64 = parts[2].parse().map_err(|_| invalid())?;
    let trend = match parts[0] {
        "poly" => TrendSpec::Polynomial {
            amplitude,
            power: value,
        },
        "sin" => TrendSpec::Sinusoidal {
            amplitude,
            period: value,
        },
        _ => return Err(invalid()),
    };
    trend.validate()?;
    Ok(trend)
}
