//! Analysis configuration: defaults, config-file parsing, and flag
//! overrides. Every knob the pipeline uses lives here so a run can be
//! reproduced from the `config` block echoed into its report.

use std::path::Path;

use serde::Serialize;

use fluctus_core::io::parse_key_values;
use fluctus_core::{ScaleCap, ScaleConfig};

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Everything the batch pipeline needs to know.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisConfig {
    /// Detrending orders analyzed per series.
    pub detrend_orders: Vec<usize>,
    pub scale_cap: ScaleCap,
    pub points_per_decade: usize,
    /// Sliding-window sizes for local-slope curves.
    pub local_windows: Vec<usize>,
    /// Evidence margin for crossover detection.
    pub bic_threshold: f64,
    /// Minimum event duration in seconds.
    pub min_event_duration_s: f64,
    /// Prefix lengths for the duration sweep, as fractions of the series.
    pub duration_fractions: Vec<f64>,
    /// Peak-to-median power ratio that flags periodicity.
    pub periodicity_ratio: f64,
    /// r2 margin below which distribution fits are tied.
    pub classify_margin: f64,
    /// Seed for operations that draw randomness (surrogates).
    pub seed: u64,
    /// Worker threads for per-file parallelism; 0 = one per core.
    pub workers: usize,
    /// Fallback sampling interval when a series has no sidecar.
    pub default_dt: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            detrend_orders: vec![1, 2, 3, 4],
            scale_cap: ScaleCap::Quarter,
            points_per_decade: fluctus_core::dfa::DEFAULT_POINTS_PER_DECADE,
            local_windows: vec![5, 25, 50],
            bic_threshold: fluctus_core::dfa::DEFAULT_BIC_THRESHOLD,
            min_event_duration_s: fluctus_core::events::DEFAULT_MIN_EVENT_SECONDS,
            duration_fractions: vec![0.25, 0.5, 0.75, 1.0],
            periodicity_ratio: fluctus_core::spectrum::DEFAULT_PERIODICITY_RATIO,
            classify_margin: fluctus_core::events::DEFAULT_CLASSIFY_MARGIN,
            seed: 0,
            workers: 0,
            default_dt: None,
        }
    }
}

impl AnalysisConfig {
    pub fn scale_config(&self) -> ScaleConfig {
        ScaleConfig {
            cap: self.scale_cap,
            points_per_decade: self.points_per_decade,
        }
    }

    /// Reads a flat `key = value` config file over the defaults.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg = AnalysisConfig::default();
        cfg.apply_key_values(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_key_values(&mut self, text: &str, source: &str) -> Result<(), ConfigError> {
        let map =
            parse_key_values(text).map_err(|e| ConfigError(format!("{source}: {e}")))?;
        for (key, value) in &map {
            self.apply(key, value)
                .map_err(|e| ConfigError(format!("{source}: key '{key}': {e}")))?;
        }
        Ok(())
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "orders" => self.detrend_orders = parse_list(value)?,
            "scale_cap" => {
                self.scale_cap = match value {
                    "quarter" => ScaleCap::Quarter,
                    "tenth" => ScaleCap::Tenth,
                    other => return Err(format!("expected 'quarter' or 'tenth', got '{other}'")),
                }
            }
            "points_per_decade" => self.points_per_decade = parse_one(value)?,
            "local_windows" => self.local_windows = parse_list(value)?,
            "bic_threshold" => self.bic_threshold = parse_one(value)?,
            "min_event_duration" => self.min_event_duration_s = parse_one(value)?,
            "duration_fractions" => self.duration_fractions = parse_list(value)?,
            "periodicity_ratio" => self.periodicity_ratio = parse_one(value)?,
            "classify_margin" => self.classify_margin = parse_one(value)?,
            "seed" => self.seed = parse_one(value)?,
            "workers" => self.workers = parse_one(value)?,
            "dt" => self.default_dt = Some(parse_one(value)?),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Checks every module precondition representable at load time.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |msg: String| Err(ConfigError(msg));
        if self.detrend_orders.is_empty() {
            return err("orders must not be empty".into());
        }
        if self.detrend_orders.iter().any(|&m| m == 0 || m > 10) {
            return err("detrending orders must be in 1..=10".into());
        }
        if self.points_per_decade == 0 {
            return err("points_per_decade must be >= 1".into());
        }
        if self.local_windows.iter().any(|&w| w < 3) {
            return err("local-slope windows must be >= 3".into());
        }
        if !self.bic_threshold.is_finite() {
            return err("bic_threshold must be finite".into());
        }
        if !(self.min_event_duration_s >= 0.0) {
            return err("min_event_duration must be >= 0".into());
        }
        if self.duration_fractions.is_empty()
            || self
                .duration_fractions
                .iter()
                .any(|&f| !(f > 0.0 && f <= 1.0))
        {
            return err("duration_fractions must lie in (0, 1]".into());
        }
        if !(self.periodicity_ratio > 0.0) {
            return err("periodicity_ratio must be > 0".into());
        }
        if !(self.classify_margin >= 0.0) {
            return err("classify_margin must be >= 0".into());
        }
        if let Some(dt) = self.default_dt {
            if !(dt > 0.0) {
                return err("dt must be > 0".into());
            }
        }
        Ok(())
    }
}

fn parse_one<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| format!("cannot parse '{value}': {e}"))
}

fn parse_list<T: std::str::FromStr>(value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|part| parse_one(part))
        .collect::<Result<Vec<T>, String>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("empty list".into())
            } else {
                Ok(v)
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        AnalysisConfig::default().validate().unwrap();
    }

    #[test]
    fn key_values_override_defaults() {
        let mut cfg = AnalysisConfig::default();
        cfg.apply_key_values(
            "orders = 1,3\nscale_cap = tenth\nmin_event_duration = 0.9\nseed = 7\n",
            "test",
        )
        .unwrap();
        assert_eq!(cfg.detrend_orders, vec![1, 3]);
        assert_eq!(cfg.scale_cap, ScaleCap::Tenth);
        assert_eq!(cfg.min_event_duration_s, 0.9);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_errors() {
        let mut cfg = AnalysisConfig::default();
        assert!(cfg.apply_key_values("verbosity = 3\n", "t").is_err());
        assert!(cfg.apply_key_values("orders = 1,zero\n", "t").is_err());
    }

    #[test]
    fn validation_catches_bad_settings() {
        let mut cfg = AnalysisConfig::default();
        cfg.detrend_orders = vec![];
        assert!(cfg.validate().is_err());

        let mut cfg = AnalysisConfig::default();
        cfg.duration_fractions = vec![1.5];
        assert!(cfg.validate().is_err());

        let mut cfg = AnalysisConfig::default();
        cfg.local_windows = vec![2];
        assert!(cfg.validate().is_err());
    }
}
