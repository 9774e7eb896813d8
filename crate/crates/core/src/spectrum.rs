//! Periodicity pre-check.
//!
//! A superposed sinusoid produces an artificial crossover in the
//! fluctuation function at the scale of its period, so series are
//! screened with a periodogram before DFA. The gate is a median-ratio
//! rule on the raw (untapered) periodogram.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::BehaviorSeries;
use crate::stats;

/// Default ratio of peak power to median power that flags periodicity.
pub const DEFAULT_PERIODICITY_RATIO: f64 = 10.0;

/// Minimum series length for a meaningful periodogram.
const MIN_LEN: usize = 16;

/// One-sided power spectrum at the Fourier frequencies `k/N`,
/// `k = 1..floor(N/2)`.
#[derive(Debug, Clone, Serialize)]
pub struct PowerSpectrum {
    /// Frequencies in cycles per sample, strictly increasing in (0, 0.5].
    pub freqs: Vec<f64>,
    /// Non-negative powers, Parseval-normalized: their sum equals
    /// `N * var(x)` for real input.
    pub power: Vec<f64>,
    pub source_len: usize,
}

impl PowerSpectrum {
    /// Frequency carrying the most power.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        (self.freqs[best], self.power[best])
    }
}

/// Mean-removed discrete-Fourier periodogram of a behavioral series.
pub fn periodogram(series: &BehaviorSeries) -> Result<PowerSpectrum> {
    let values: Vec<f64> = series.values().iter().map(|&v| f64::from(v)).collect();
    periodogram_values(&values)
}

/// [`periodogram`] over raw real values (surrogates, profiles).
pub fn periodogram_values(values: &[f64]) -> Result<PowerSpectrum> {
    let n = values.len();
    if n < MIN_LEN {
        return Err(Error::InsufficientLength { len: n, order: 0 });
    }
    let mean = stats::mean(values);
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let mut freqs = Vec::with_capacity(half);
    let mut power = Vec::with_capacity(half);
    for k in 1..=half {
        // Fold the redundant negative frequencies into the positive ones;
        // the Nyquist bin of an even-length series has no mirror.
        let weight = if n % 2 == 0 && k == half { 1.0 } else { 2.0 };
        freqs.push(k as f64 / n as f64);
        power.push(weight * buf[k].norm_sqr() / n as f64);
    }
    Ok(PowerSpectrum {
        freqs,
        power,
        source_len: n,
    })
}

/// Verdict of the periodicity gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum PeriodicityCheck {
    Clean,
    Periodic { freq_cycles_per_sample: f64 },
}

impl PeriodicityCheck {
    pub fn is_periodic(&self) -> bool {
        matches!(self, PeriodicityCheck::Periodic { .. })
    }
}

/// Flags the spectrum as periodic when the peak power exceeds
/// `ratio_threshold` times the median power.
///
/// The rule is a screen for discrete spectral lines, not a test: a
/// steeply colored spectrum (strongly correlated series) can trip it at
/// a near-zero frequency. The offending frequency is reported so such
/// cases are recognizable, and the pipeline annotates rather than
/// blocks.
pub fn detect_periodicity(spectrum: &PowerSpectrum, ratio_threshold: f64) -> PeriodicityCheck {
    if spectrum.power.is_empty() {
        return PeriodicityCheck::Clean;
    }
    let median = stats::quantile(&spectrum.power, 0.5);
    let (freq, peak) = spectrum.peak();
    if peak > ratio_threshold * median {
        PeriodicityCheck::Periodic {
            freq_cycles_per_sample: freq,
        }
    } else {
        PeriodicityCheck::Clean
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sinusoid(n: usize, period: f64, amplitude: f64) -> Vec<f64> {
        (0..n)
            .map(|t| amplitude * (2.0 * std::f64::consts::PI * t as f64 / period).sin())
            .collect()
    }

    #[test]
    fn pure_sinusoid_concentrates_power() {
        let x = sinusoid(1000, 100.0, 1.0);
        let ps = periodogram_values(&x).unwrap();
        let (freq, peak) = ps.peak();
        assert!((freq - 0.01).abs() < 1e-12);
        let total: f64 = ps.power.iter().sum();
        assert!(peak / total > 0.9, "peak share = {}", peak / total);
        assert!(detect_periodicity(&ps, DEFAULT_PERIODICITY_RATIO).is_periodic());
    }

    #[test]
    fn parseval_normalization_holds() {
        let x: Vec<f64> = (0..512)
            .map(|t| (t as f64 * 0.37).sin() * 0.8 + ((t * t) as f64 * 0.011).cos())
            .collect();
        let ps = periodogram_values(&x).unwrap();
        let m = stats::mean(&x);
        let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64;
        let total: f64 = ps.power.iter().sum();
        let expected = var * x.len() as f64;
        assert!(
            ((total - expected) / expected).abs() < 1e-6,
            "sum power = {total}, N*var = {expected}"
        );
    }

    #[test]
    fn parseval_holds_for_odd_length() {
        let x: Vec<f64> = (0..511).map(|t| ((t * 7919) % 101) as f64 / 101.0).collect();
        let ps = periodogram_values(&x).unwrap();
        let m = stats::mean(&x);
        let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64;
        let total: f64 = ps.power.iter().sum();
        assert!(((total - var * x.len() as f64) / (var * x.len() as f64)).abs() < 1e-6);
    }

    #[test]
    fn constant_series_has_zero_spectrum() {
        let x = vec![3.25; 64];
        let ps = periodogram_values(&x).unwrap();
        assert!(ps.power.iter().all(|&p| p.abs() < 1e-20));
        assert_eq!(
            detect_periodicity(&ps, DEFAULT_PERIODICITY_RATIO),
            PeriodicityCheck::Clean
        );
    }

    #[test]
    fn short_series_is_rejected() {
        let x = vec![1.0; 15];
        assert!(matches!(
            periodogram_values(&x),
            Err(Error::InsufficientLength { .. })
        ));
    }

    #[test]
    fn noisy_sinusoid_peak_is_within_one_bin() {
        // SNR ~ 5 with deterministic pseudo-noise.
        let n = 1000;
        let mut state = 12345u64;
        let mut noise = || {
            state ^= state >> 12;
            state ^= state << 25;
            state ^= state >> 27;
            ((state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                * 2.0
        };
        let x: Vec<f64> = sinusoid(n, 100.0, 2.2)
            .into_iter()
            .map(|v| v + noise())
            .collect();
        let ps = periodogram_values(&x).unwrap();
        let (freq, _) = ps.peak();
        assert!((freq - 0.01).abs() <= 1.0 / n as f64 + 1e-12, "freq = {freq}");
    }

    #[test]
    fn raising_threshold_never_flips_clean_to_periodic() {
        let x = sinusoid(512, 64.0, 1.0);
        let ps = periodogram_values(&x).unwrap();
        let mut last_periodic = true;
        for threshold in [0.5, 2.0, 10.0, 100.0, 1e6, f64::INFINITY] {
            let now = detect_periodicity(&ps, threshold).is_periodic();
            assert!(!now || last_periodic, "clean flipped back to periodic");
            last_periodic = now;
        }
        assert!(!detect_periodicity(&ps, f64::INFINITY).is_periodic());
    }

    #[test]
    fn flat_spectrum_is_clean_and_delta_is_flagged() {
        let flat = PowerSpectrum {
            freqs: (1..=32).map(|k| k as f64 / 64.0).collect(),
            power: vec![1.0; 32],
            source_len: 64,
        };
        assert_eq!(
            detect_periodicity(&flat, DEFAULT_PERIODICITY_RATIO),
            PeriodicityCheck::Clean
        );
        let mut delta = flat;
        delta.power[10] = 1e6;
        match detect_periodicity(&delta, DEFAULT_PERIODICITY_RATIO) {
            PeriodicityCheck::Periodic {
                freq_cycles_per_sample,
            } => {
                assert!((freq_cycles_per_sample - delta.freqs[10]).abs() < 1e-15)
            }
            PeriodicityCheck::Clean => panic!("delta spike not flagged"),
        }
    }
}
