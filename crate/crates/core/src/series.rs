//! Binary behavioral series: data model, ingestion from tracking
//! coordinates, and basic activity metrics.
//!
//! A [`BehaviorSeries`] holds one uniformly sampled 0/1 sequence (0 =
//! immobile, 1 = mobile during the sampling interval). The cumulative-sum
//! [`Profile`] is the random-walk representation that detrended
//! fluctuation analysis operates on.

use serde::Serialize;

use crate::error::{Error, Result};

/// Subject metadata carried alongside a series. Opaque to the analysis.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Subject {
    pub id: String,
    pub species: Option<String>,
    pub treatment: Option<String>,
}

impl Subject {
    pub fn with_id(id: impl Into<String>) -> Self {
        Subject {
            id: id.into(),
            ..Default::default()
        }
    }
}

/// Uniformly sampled 0/1 activity sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorSeries {
    values: Vec<u8>,
    dt: f64,
    subject: Subject,
}

impl BehaviorSeries {
    /// Validates and wraps a 0/1 sequence sampled every `dt` seconds.
    pub fn new(values: Vec<u8>, dt: f64, subject: Subject) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("series must contain at least one sample".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("sampling interval must be positive, got {dt}")));
        }
        if let Some(pos) = values.iter().position(|v| *v > 1) {
            return Err(Error::InvalidInput(format!(
                "sample {pos} is {}, expected 0 or 1",
                values[pos]
            )));
        }
        Ok(BehaviorSeries { values, dt, subject })
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// Sampling interval in seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn subject(&self) -> &Subject {
        &self.subject
    }

    /// Number of samples. At least 1 by construction.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Total recorded time in seconds.
    pub fn total_seconds(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }

    /// Truncates to the first `len` samples. Errors if `len` is zero or
    /// exceeds the series length.
    pub fn prefix(&self, len: usize) -> Result<BehaviorSeries> {
        if len == 0 || len > self.values.len() {
            return Err(Error::InvalidInput(format!(
                "prefix length {len} outside 1..={}",
                self.values.len()
            )));
        }
        Ok(BehaviorSeries {
            values: self.values[..len].to_vec(),
            dt: self.dt,
            subject: self.subject.clone(),
        })
    }
}

/// One tracking fix: timestamp in seconds and planar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackFix {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

/// Bins tracking fixes into `dt`-second intervals and binarizes motion.
///
/// A sample is 1 iff the Euclidean displacement across the interval
/// exceeds `move_epsilon`. Displacement of interval `k` is measured
/// between the last fix inside interval `k` and the last fix before it.
/// Intervals containing no fix are an error, never interpolated: silent
/// gap-filling would corrupt the correlation structure under study.
pub fn ingest_tracking(
    rows: &[TrackFix],
    dt: f64,
    move_epsilon: f64,
    subject: Subject,
) -> Result<BehaviorSeries> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no tracking rows".into()));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidInput(
            "at least two tracking rows are needed to cover one interval".into(),
        ));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if move_epsilon < 0.0 {
        return Err(Error::InvalidInput(format!(
            "move_epsilon must be non-negative, got {move_epsilon}"
        )));
    }
    for w in rows.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::InvalidInput(format!(
                "timestamps must be strictly increasing ({} then {})",
                w[0].t, w[1].t
            )));
        }
    }

    let t0 = rows[0].t;
    // Interval k covers (t0 + k*dt, t0 + (k+1)*dt]. A small tolerance keeps
    // fixes landing exactly on a boundary in the earlier interval.
    let tol = 1e-9 * dt;
    let interval_of = |t: f64| -> usize {
        let raw = (t - t0) / dt;
        let k = (raw - tol).ceil() as isize - 1;
        k.max(0) as usize
    };

    let n_intervals = interval_of(rows[rows.len() - 1].t) + 1;
    let mut last_fix_in: Vec<Option<(f64, f64)>> = vec![None; n_intervals];
    for fix in &rows[1..] {
        let k = interval_of(fix.t);
        last_fix_in[k] = Some((fix.x, fix.y));
    }

    let mut values = Vec::with_capacity(n_intervals);
    let mut prev = (rows[0].x, rows[0].y);
    for (k, slot) in last_fix_in.iter().enumerate() {
        let (x, y) = slot.ok_or(Error::MissingData { interval: k })?;
        let displacement = ((x - prev.0).powi(2) + (y - prev.1).powi(2)).sqrt();
        values.push(u8::from(displacement > move_epsilon));
        prev = (x, y);
    }
    BehaviorSeries::new(values, dt, subject)
}

/// Percentage of total time spent mobile: `100 * (count of ones) / N`.
pub fn percent_time_ambulating(s: &BehaviorSeries) -> f64 {
    let ones = s.values().iter().filter(|v| **v == 1).count();
    100.0 * ones as f64 / s.len() as f64
}

/// Complement of [`percent_time_ambulating`] for binary input.
pub fn percent_time_immobile(s: &BehaviorSeries) -> f64 {
    let zeros = s.values().iter().filter(|v| **v == 0).count();
    100.0 * zeros as f64 / s.len() as f64
}

/// Cumulative sum of a series; the walk that DFA detrends.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    y: Vec<f64>,
    source_dt: f64,
}

impl Profile {
    /// Profile of a binary behavioral series: `y[t] = sum(values[..=t])`.
    pub fn from_series(s: &BehaviorSeries) -> Profile {
        let mut y = Vec::with_capacity(s.len());
        let mut acc = 0.0;
        for &v in s.values() {
            acc += f64::from(v);
            y.push(acc);
        }
        Profile { y, source_dt: s.dt() }
    }

    /// Profile of an arbitrary real-valued series (surrogates).
    pub fn from_values(values: &[f64], dt: f64) -> Result<Profile> {
        if values.is_empty() {
            return Err(Error::InvalidInput("cannot build profile of empty series".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
        }
        let mut y = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        for &v in values {
            acc += v;
            y.push(acc);
        }
        Ok(Profile { y, source_dt: dt })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Number of profile values. At least 1 by construction.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn source_dt(&self) -> f64 {
        self.source_dt
    }

    /// First differences; inverts profile construction.
    pub fn differences(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.y.len());
        let mut prev = 0.0;
        for &v in &self.y {
            out.push(v - prev);
            prev = v;
        }
        out
    }

    /// View of the first `len` profile values as a profile of the prefix
    /// series (the cumulative sum of a prefix is a prefix of the
    /// cumulative sum).
    pub fn prefix(&self, len: usize) -> Result<Profile> {
        if len == 0 || len > self.y.len() {
            return Err(Error::InvalidInput(format!(
                "prefix length {len} outside 1..={}",
                self.y.len()
            )));
        }
        Ok(Profile {
            y: self.y[..len].to_vec(),
            source_dt: self.source_dt,
        })
    }
}

/// Shorthand for `Profile::from_series`.
pub fn profile(s: &BehaviorSeries) -> Profile {
    Profile::from_series(s)
}
