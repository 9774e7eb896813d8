//! Series loading: value CSV plus sidecar metadata, with flag overrides.

use std::path::Path;

use fluctus_core::io::{behavior_from_values, read_sidecar, read_values_csv, sidecar_path};
use fluctus_core::{BehaviorSeries, Error, Result, Subject};

/// Loads a behavioral series from a value CSV. The sampling interval
/// comes from, in priority order: the `dt_override` argument, the
/// sidecar `dt` key, then `default_dt`.
pub fn load_series(
    path: &Path,
    dt_override: Option<f64>,
    default_dt: Option<f64>,
) -> Result<BehaviorSeries> {
    let values = read_values_csv(path)?;
    let side = sidecar_path(path);
    let meta = if side.exists() {
        read_sidecar(&side)?
    } else {
        Default::default()
    };
    let sidecar_dt = match meta.get("dt") {
        Some(raw) => Some(raw.parse::<f64>().map_err(|e| {
            Error::InvalidInput(format!("{}: dt: {e}", side.display()))
        })?),
        None => None,
    };
    let dt = dt_override.or(sidecar_dt).or(default_dt).ok_or_else(|| {
        Error::InvalidInput(format!(
            "{}: no sampling interval; pass --dt or provide a sidecar with a dt key",
            path.display()
        ))
    })?;
    let subject = Subject {
        id: meta
            .get("id")
            .cloned()
            .unwrap_or_else(|| stem_of(path)),
        species: meta.get("species").cloned(),
        treatment: meta.get("treatment").cloned(),
    };
    behavior_from_values(&values, dt, subject)
}

pub fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string())
}
