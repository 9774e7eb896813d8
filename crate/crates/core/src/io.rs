//! File formats: tracking CSV, series CSV, sidecar metadata, and the
//! plot-ready CSV exports.
//!
//! All writers emit floats with Rust's shortest round-trip formatting,
//! so identical inputs always produce byte-identical files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::dfa::FluctuationCurve;
use crate::error::{Error, Result};
use crate::events::{DurationHistogram, EventRuns};
use crate::series::{BehaviorSeries, Subject, TrackFix};
use crate::spectrum::PowerSpectrum;

/// Reads a tracking CSV with header `t,x,y`, one fix per row.
pub fn read_tracking_csv(path: &Path) -> Result<Vec<TrackFix>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "t,x,y" => {}
        Some((_, header)) => {
            return Err(Error::InvalidInput(format!(
                "{}: expected header 't,x,y', found '{}'",
                path.display(),
                header.trim()
            )))
        }
        None => return Err(Error::InvalidInput(format!("{}: empty file", path.display()))),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let parse = |field: Option<&str>, name: &str| -> Result<f64> {
            field
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "{}:{}: missing {name} column",
                        path.display(),
                        idx + 1
                    ))
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| {
                    Error::InvalidInput(format!("{}:{}: {name}: {e}", path.display(), idx + 1))
                })
        };
        let t = parse(fields.next(), "t")?;
        let x = parse(fields.next(), "x")?;
        let y = parse(fields.next(), "y")?;
        if fields.next().is_some() {
            return Err(Error::InvalidInput(format!(
                "{}:{}: more than three columns",
                path.display(),
                idx + 1
            )));
        }
        rows.push(TrackFix { t, x, y });
    }
    Ok(rows)
}

/// Reads a series CSV (header `value`, one number per line) as raw reals.
pub fn read_values_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "value" => {}
        Some((_, header)) => {
            return Err(Error::InvalidInput(format!(
                "{}: expected header 'value', found '{}'",
                path.display(),
                header.trim()
            )))
        }
        None => return Err(Error::InvalidInput(format!("{}: empty file", path.display()))),
    }
    let mut values = Vec::new();
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|e| {
            Error::InvalidInput(format!("{}:{}: {e}", path.display(), idx + 1))
        })?);
    }
    Ok(values)
}

/// Interprets raw values as a 0/1 behavioral series.
pub fn behavior_from_values(values: &[f64], dt: f64, subject: Subject) -> Result<BehaviorSeries> {
    let mut bits = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        if v == 0.0 {
            bits.push(0);
        } else if v == 1.0 {
            bits.push(1);
        } else {
            return Err(Error::InvalidInput(format!(
                "sample {i} is {v}, expected 0 or 1"
            )));
        }
    }
    BehaviorSeries::new(bits, dt, subject)
}

pub fn write_values_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::from("value\n");
    for v in values {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_behavior_csv(path: &Path, series: &BehaviorSeries) -> Result<()> {
    let mut out = String::from("value\n");
    for v in series.values() {
        out.push_str(if *v == 1 { "1\n" } else { "0\n" });
    }
    write_file(path, &out)
}

/// Sidecar path of a series file: same stem, `.meta` extension.
pub fn sidecar_path(series_path: &Path) -> std::path::PathBuf {
    series_path.with_extension("meta")
}

/// Reads a flat `key = value` sidecar; `#` starts a comment.
pub fn read_sidecar(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    parse_key_values(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Parses flat `key = value` text (also used for config files).
pub fn parse_key_values(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value'", idx + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", idx + 1));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn write_sidecar(path: &Path, entries: &BTreeMap<String, String>) -> Result<()> {
    let mut out = String::new();
    for (k, v) in entries {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    write_file(path, &out)
}

/// Curve CSV: `n,log10_n,F,log10_F`. Zero fluctuations print `-inf`,
/// which `f64::from_str` round-trips.
pub fn write_curve_csv(path: &Path, curve: &FluctuationCurve) -> Result<()> {
    let mut out = String::from("n,log10_n,F,log10_F\n");
    for p in curve.points() {
        let log_n = (p.n as f64).log10();
        let log_f = p.f.log10();
        out.push_str(&format!("{},{},{},{}\n", p.n, log_n, p.f, log_f));
    }
    write_file(path, &out)
}

/// Spectrum CSV: `freq_cycles_per_sample,power`.
pub fn write_spectrum_csv(path: &Path, spectrum: &PowerSpectrum) -> Result<()> {
    let mut out = String::from("freq_cycles_per_sample,power\n");
    for (f, p) in spectrum.freqs.iter().zip(&spectrum.power) {
        out.push_str(&format!("{f},{p}\n"));
    }
    write_file(path, &out)
}

/// Events CSV: `state,duration_s`.
pub fn write_events_csv(path: &Path, runs: &EventRuns) -> Result<()> {
    let mut out = String::from("state,duration_s\n");
    for e in &runs.events {
        out.push_str(&format!("{},{}\n", e.state, e.duration_s));
    }
    write_file(path, &out)
}

/// Histogram CSV: `duration_s,frequency`.
pub fn write_histogram_csv(path: &Path, hist: &DurationHistogram) -> Result<()> {
    let mut out = String::from("duration_s,frequency\n");
    for (d, c) in &hist.bins {
        out.push_str(&format!("{d},{c}\n"));
    }
    write_file(path, &out)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(contents.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{extract_events, EventState};
    use std::io::Write;

    fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("fluctus-io-{}-{name}", std::process::id()));
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn tracking_round_trip() {
        let path = temp_file("track.csv", "t,x,y\n0.0,1.0,2.0\n0.5,1.5,2.0\n");
        let rows = read_tracking_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1], TrackFix { t: 0.5, x: 1.5, y: 2.0 });
        fs::remove_file(path).ok();
    }

    #[test]
    fn tracking_rejects_bad_header_and_fields() {
        let bad_header = temp_file("bad-header.csv", "time,x,y\n0,0,0\n");
        assert!(read_tracking_csv(&bad_header).is_err());
        fs::remove_file(bad_header).ok();

        let bad_field = temp_file("bad-field.csv", "t,x,y\n0,zero,0\n");
        assert!(read_tracking_csv(&bad_field).is_err());
        fs::remove_file(bad_field).ok();
    }

    #[test]
    fn series_round_trip() {
        let s = BehaviorSeries::new(vec![0, 1, 1, 0], 0.5, Subject::with_id("io")).unwrap();
        let path = std::env::temp_dir().join(format!("fluctus-io-series-{}.csv", std::process::id()));
        write_behavior_csv(&path, &s).unwrap();
        let values = read_values_csv(&path).unwrap();
        let back = behavior_from_values(&values, 0.5, Subject::with_id("io")).unwrap();
        assert_eq!(back.values(), s.values());
        fs::remove_file(path).ok();
    }

    #[test]
    fn non_binary_values_rejected_for_behavior() {
        assert!(behavior_from_values(&[0.0, 0.5], 1.0, Subject::default()).is_err());
    }

    #[test]
    fn sidecar_round_trip_and_comments() {
        let mut entries = BTreeMap::new();
        entries.insert("dt".to_string(), "0.5".to_string());
        entries.insert("id".to_string(), "quail_1".to_string());
        let path = std::env::temp_dir().join(format!("fluctus-io-meta-{}.meta", std::process::id()));
        write_sidecar(&path, &entries).unwrap();
        let back = read_sidecar(&path).unwrap();
        assert_eq!(back, entries);
        fs::remove_file(path).ok();

        let parsed = parse_key_values("# comment\n dt = 0.5 # trailing\n\nid = a\n").unwrap();
        assert_eq!(parsed["dt"], "0.5");
        assert_eq!(parsed["id"], "a");
        assert!(parse_key_values("no-equals-here\n").is_err());
    }

    #[test]
    fn events_csv_format() {
        let s = BehaviorSeries::new(vec![0, 0, 1, 1, 1], 0.5, Subject::default()).unwrap();
        let runs = extract_events(&s, 0.6);
        assert_eq!(runs.count(EventState::Mobile), 1);
        let path = std::env::temp_dir().join(format!("fluctus-io-events-{}.csv", std::process::id()));
        write_events_csv(&path, &runs).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "state,duration_s\nimmobile,1\nmobile,1.5\n");
        fs::remove_file(path).ok();
    }
}
