//! ARFIMA(p,d,q) surrogate generation and empirical confidence bands.
//!
//! Surrogates with a known fractional parameter `d` calibrate the scaling
//! estimator: `alpha = d + 0.5`, so a `d = 0` ensemble gives the null
//! band for the uncorrelated hypothesis and `d > 0` ensembles check
//! recovery. Generation is Gaussian innovations, truncated
//! fractional-integration weights, then the AR/MA recursion; everything
//! is deterministic per seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::dfa::{default_scales_with, fit_scaling, fluctuation_function, ScaleConfig};
use crate::error::{Error, Result};
use crate::series::{BehaviorSeries, Profile, Subject};
use crate::stats;

/// Default truncation of the fractional-integration weights, in lags.
pub const DEFAULT_TRUNCATION: usize = 5000;

/// Extra samples generated and discarded so the AR/MA recursion forgets
/// its zero initial state: `2 * max(p, q) + 1000`.
const BURN_IN_BASE: usize = 1000;

/// Direct convolution is used below this operation count; FFT above.
const FFT_CONV_THRESHOLD: u64 = 1 << 22;

/// ARFIMA model parameters.
///
/// Stationarity (AR roots outside the unit circle), invertibility (MA
/// roots outside the unit circle) and `|d| < 0.5` are enforced at
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArfimaParams {
    d: f64,
    ar: Vec<f64>,
    ma: Vec<f64>,
    innovation_sd: f64,
}

impl ArfimaParams {
    pub fn new(d: f64, ar: Vec<f64>, ma: Vec<f64>, innovation_sd: f64) -> Result<Self> {
        if !d.is_finite() || d.abs() >= 0.5 {
            return Err(Error::InvalidModel(format!(
                "fractional parameter must satisfy |d| < 0.5, got {d}"
            )));
        }
        if !(innovation_sd > 0.0) || !innovation_sd.is_finite() {
            return Err(Error::InvalidModel(format!(
                "innovation standard deviation must be positive, got {innovation_sd}"
            )));
        }
        if !lag_polynomial_stable(&ar) {
            return Err(Error::InvalidModel(
                "AR polynomial has a root inside or on the unit circle (non-stationary)".into(),
            ));
        }
        if !lag_polynomial_stable(&ma_to_ar_convention(&ma)) {
            return Err(Error::InvalidModel(
                "MA polynomial has a root inside or on the unit circle (non-invertible)".into(),
            ));
        }
        Ok(ArfimaParams {
            d,
            ar,
            ma,
            innovation_sd,
        })
    }

    /// ARFIMA(0,d,0) with unit innovation variance.
    pub fn fractional(d: f64) -> Result<Self> {
        ArfimaParams::new(d, Vec::new(), Vec::new(), 1.0)
    }

    /// White noise: ARFIMA(0,0,0).
    pub fn white_noise(innovation_sd: f64) -> Result<Self> {
        ArfimaParams::new(0.0, Vec::new(), Vec::new(), innovation_sd)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn ar(&self) -> &[f64] {
        &self.ar
    }

    pub fn ma(&self) -> &[f64] {
        &self.ma
    }

    pub fn innovation_sd(&self) -> f64 {
        self.innovation_sd
    }

    pub fn p(&self) -> usize {
        self.ar.len()
    }

    pub fn q(&self) -> usize {
        self.ma.len()
    }
}

/// True iff `1 - c_1 z - ... - c_k z^k` (sign convention of an AR
/// polynomial; pass MA coefficients negated via the helper below) has all
/// roots strictly outside the unit circle.
///
/// Uses the Schur-Cohn reduction on the reversed (characteristic)
/// polynomial, so no root finding is needed.
fn lag_polynomial_stable(coeffs: &[f64]) -> bool {
    if coeffs.is_empty() {
        return true;
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return false;
    }
    // phi(z) = 1 - sum c_i z^i has roots outside the unit circle iff
    // a(z) = z^k - c_1 z^(k-1) - ... - c_k has all roots inside.
    // Coefficients of a(z), low order first.
    let k = coeffs.len();
    let mut a: Vec<f64> = Vec::with_capacity(k + 1);
    for i in (0..k).rev() {
        a.push(-coeffs[i]);
    }
    a.push(1.0);
    all_roots_inside_unit_circle(&mut a)
}

/// Schur-Cohn test: all roots of the polynomial (low order first,
/// non-zero leading coefficient) strictly inside the unit circle.
fn all_roots_inside_unit_circle(a: &mut Vec<f64>) -> bool {
    while a.len() > 1 {
        let n = a.len() - 1;
        let lead = a[n];
        let tail = a[0];
        if tail.abs() >= lead.abs() {
            return false;
        }
        // Schur transform: b_j = lead*a_{j+1} - tail*a_{n-1-j}.
        let b: Vec<f64> = (0..n)
            .map(|j| lead * a[j + 1] - tail * a[n - 1 - j])
            .collect();
        *a = b;
    }
    true
}

/// MA polynomial `1 + theta_1 z + ...` maps onto the AR convention by
/// negating the coefficients.
fn ma_to_ar_convention(ma: &[f64]) -> Vec<f64> {
    ma.iter().map(|c| -c).collect()
}

/// Fractional-integration weights: `w_0 = 1`,
/// `w_k = w_{k-1} * (k - 1 + d) / k`.
pub fn fractional_weights(d: f64, len: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(len);
    if len == 0 {
        return w;
    }
    w.push(1.0);
    for k in 1..len {
        let prev = w[k - 1];
        w.push(prev * ((k as f64 - 1.0 + d) / k as f64));
    }
    w
}

/// Generation knobs beyond the model itself.
#[derive(Debug, Clone, Copy)]
pub struct GenOptions {
    /// Number of fractional-integration lags kept; effective value is
    /// `min(truncation, generated length)`.
    pub truncation: usize,
    /// Burn-in override; default `2 * max(p, q) + 1000`.
    pub burn_in: Option<usize>,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            truncation: DEFAULT_TRUNCATION,
            burn_in: None,
        }
    }
}

/// Generates an ARFIMA realization of length `n`, deterministic per seed.
pub fn gen_arfima(params: &ArfimaParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    gen_arfima_with(params, n, seed, &GenOptions::default())
}

/// [`gen_arfima`] with explicit truncation/burn-in.
pub fn gen_arfima_with(
    params: &ArfimaParams,
    n: usize,
    seed: u64,
    opts: &GenOptions,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("surrogate length must be >= 1".into()));
    }
    if opts.truncation == 0 {
        return Err(Error::InvalidInput("truncation must be >= 1".into()));
    }
    let burn = opts
        .burn_in
        .unwrap_or(2 * params.p().max(params.q()) + BURN_IN_BASE);
    let total = n + burn;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let eps: Vec<f64> = (0..total)
        .map(|_| {
            let z: f64 = normal.sample(&mut rng);
            z * params.innovation_sd
        })
        .collect();

    // Fractional integration: u = weights (*) eps, truncated.
    let u = if params.d == 0.0 {
        eps
    } else {
        let k = opts.truncation.min(total);
        let weights = fractional_weights(params.d, k);
        convolve_truncated(&eps, &weights)
    };

    // AR/MA recursion on the fractionally integrated innovations.
    let x = if params.p() == 0 && params.q() == 0 {
        u
    } else {
        let ar = &params.ar;
        let ma = &params.ma;
        let mut x = vec![0.0; total];
        for t in 0..total {
            let mut v = u[t];
            for (j, &theta) in ma.iter().enumerate() {
                if t > j {
                    v += theta * u[t - 1 - j];
                }
            }
            for (i, &phi) in ar.iter().enumerate() {
                if t > i {
                    v += phi * x[t - 1 - i];
                }
            }
            x[t] = v;
        }
        x
    };

    Ok(x[burn..].to_vec())
}

/// Causal truncated convolution `out[t] = sum_k w[k] * x[t-k]`.
fn convolve_truncated(x: &[f64], w: &[f64]) -> Vec<f64> {
    let cost = x.len() as u64 * w.len() as u64;
    if cost <= FFT_CONV_THRESHOLD {
        let mut out = vec![0.0; x.len()];
        for (t, slot) in out.iter_mut().enumerate() {
            let kmax = w.len().min(t + 1);
            let mut acc = 0.0;
            for k in 0..kmax {
                acc += w[k] * x[t - k];
            }
            *slot = acc;
        }
        out
    } else {
        fft_convolve(x, w)
    }
}

fn fft_convolve(x: &[f64], w: &[f64]) -> Vec<f64> {
    let out_len = x.len();
    let size = (x.len() + w.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);

    let mut xa: Vec<Complex<f64>> = x
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut wa: Vec<Complex<f64>> = w
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    fft.process(&mut xa);
    fft.process(&mut wa);
    for (a, b) in xa.iter_mut().zip(&wa) {
        *a *= b;
    }
    ifft.process(&mut xa);
    let scale = 1.0 / size as f64;
    xa[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Deterministic trend added on top of a surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TrendSpec {
    /// Adds `amplitude * (t/N)^power`, t = 0..N-1.
    Polynomial { amplitude: f64, power: f64 },
    /// Adds `amplitude * sin(2*pi*t / period)`, period in samples.
    Sinusoidal { amplitude: f64, period: f64 },
}

impl TrendSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TrendSpec::Polynomial { amplitude, power } => {
                if !amplitude.is_finite() {
                    return Err(Error::InvalidInput("trend amplitude must be finite".into()));
                }
                if !(power >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "polynomial trend power must be >= 0, got {power}"
                    )));
                }
            }
            TrendSpec::Sinusoidal { amplitude, period } => {
                if !amplitude.is_finite() {
                    return Err(Error::InvalidInput("trend amplitude must be finite".into()));
                }
                if !(period >= 2.0) {
                    return Err(Error::InvalidInput(format!(
                        "sinusoidal period must be >= 2 samples, got {period}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Adds the trend to a series, leaving the length unchanged.
pub fn add_trend(series: &[f64], spec: &TrendSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = series.len() as f64;
    Ok(match *spec {
        TrendSpec::Polynomial { amplitude, power } => series
            .iter()
            .enumerate()
            .map(|(t, &v)| v + amplitude * (t as f64 / n).powf(power))
            .collect(),
        TrendSpec::Sinusoidal { amplitude, period } => series
            .iter()
            .enumerate()
            .map(|(t, &v)| v + amplitude * (2.0 * std::f64::consts::PI * t as f64 / period).sin())
            .collect(),
    })
}

/// Thresholds a real-valued surrogate at its median into a 0/1 series,
/// so the event machinery can be exercised on synthetic data.
pub fn binarize_at_median(values: &[f64], dt: f64, subject: Subject) -> Result<BehaviorSeries> {
    if values.is_empty() {
        return Err(Error::InvalidInput("cannot binarize an empty series".into()));
    }
    let median = stats::quantile(values, 0.5);
    let bits: Vec<u8> = values.iter().map(|&v| u8::from(v > median)).collect();
    BehaviorSeries::new(bits, dt, subject)
}

/// Empirical distribution summary of the scaling exponent over ARFIMA
/// replicates.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalCi {
    pub mean: f64,
    pub sd: f64,
    /// 2.5% quantile of the replicate exponents.
    pub q025: f64,
    /// 97.5% quantile of the replicate exponents.
    pub q975: f64,
    pub replicates: usize,
    /// Per-replicate exponents, in replicate order.
    #[serde(skip_serializing)]
    pub alphas: Vec<f64>,
}

/// Runs the full DFA pipeline on `replicates` independent realizations
/// and summarizes the exponent distribution.
///
/// Replicates use seeds derived from `(seed, index)` and are evaluated in
/// parallel; results are collected in index order, so the summary is
/// deterministic.
pub fn empirical_ci(
    model: &ArfimaParams,
    n: usize,
    order: usize,
    replicates: usize,
    seed: u64,
) -> Result<EmpiricalCi> {
    empirical_ci_with(model, n, order, replicates, seed, &ScaleConfig::default())
}

/// [`empirical_ci`] with an explicit scale grid configuration.
pub fn empirical_ci_with(
    model: &ArfimaParams,
    n: usize,
    order: usize,
    replicates: usize,
    seed: u64,
    cfg: &ScaleConfig,
) -> Result<EmpiricalCi> {
    if replicates < 2 {
        return Err(Error::InsufficientReplicates {
            needed: 2,
            got: replicates,
        });
    }
    let scales = default_scales_with(n, order, cfg.cap, cfg.points_per_decade)?;
    let alphas: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let x = gen_arfima(model, n, derive_seed(seed, i as u64))?;
            let p = Profile::from_values(&x, 1.0)?;
            let curve = fluctuation_function(&p, order, &scales)?;
            Ok(fit_scaling(&curve, None)?.alpha)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EmpiricalCi {
        mean: stats::mean(&alphas),
        sd: stats::sample_sd(&alphas),
        q025: stats::quantile(&alphas, 0.025),
        q975: stats::quantile(&alphas, 0.975),
        replicates,
        alphas,
    })
}

/// Splitmix64-based sub-seed for replicate `index` of a run seeded with
/// `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(1)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_validation() {
        assert!(ArfimaParams::new(0.5, vec![], vec![], 1.0).is_err());
        assert!(ArfimaParams::new(-0.5, vec![], vec![], 1.0).is_err());
        assert!(ArfimaParams::new(0.3, vec![], vec![], 0.0).is_err());
        // AR(1) with unit root.
        assert!(matches!(
            ArfimaParams::new(0.0, vec![1.0], vec![], 1.0),
            Err(Error::InvalidModel(_))
        ));
        // Non-invertible MA.
        assert!(ArfimaParams::new(0.0, vec![], vec![-1.5], 1.0).is_err());
        assert!(ArfimaParams::new(0.2, vec![0.5], vec![0.3], 1.0).is_ok());
    }

    #[test]
    fn ar2_stationarity_triangle() {
        // Inside the triangle.
        assert!(lag_polynomial_stable(&[0.5, -0.3]));
        assert!(lag_polynomial_stable(&[1.2, -0.4]));
        // Outside: phi1 + phi2 > 1.
        assert!(!lag_polynomial_stable(&[0.75, 0.3]));
        // Outside: |phi2| >= 1.
        assert!(!lag_polynomial_stable(&[0.0, 1.01]));
    }

    #[test]
    fn ma_convention_helper_negates() {
        assert_eq!(ma_to_ar_convention(&[0.4, -0.2]), vec![-0.4, 0.2]);
    }

    #[test]
    fn weights_satisfy_recursion_exactly() {
        let d = 0.27;
        let w = fractional_weights(d, 200);
        assert_eq!(w[0], 1.0);
        for k in 1..w.len() {
            let expected = w[k - 1] * ((k as f64 - 1.0 + d) / k as f64);
            assert_eq!(w[k], expected, "weight {k}");
        }
        // d = 0 collapses to the identity filter.
        let w0 = fractional_weights(0.0, 10);
        assert_eq!(w0[0], 1.0);
        assert!(w0[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_reproduces_identically() {
        let params = ArfimaParams::new(0.3, vec![0.2], vec![-0.1], 1.0).unwrap();
        let a = gen_arfima(&params, 500, 99).unwrap();
        let b = gen_arfima(&params, 500, 99).unwrap();
        assert_eq!(a, b);
        let c = gen_arfima(&params, 500, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn longer_run_extends_the_same_stream() {
        let params = ArfimaParams::fractional(0.2).unwrap();
        let short = gen_arfima(&params, 300, 7).unwrap();
        let long = gen_arfima(&params, 600, 7).unwrap();
        for (a, b) in short.iter().zip(&long) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn white_noise_is_uncorrelated_at_lag_one() {
        let params = ArfimaParams::white_noise(1.0).unwrap();
        let x = gen_arfima(&params, 20_000, 4242).unwrap();
        let n = x.len();
        let m = stats::mean(&x);
        let var: f64 = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
        let cov1: f64 = x
            .windows(2)
            .map(|w| (w[0] - m) * (w[1] - m))
            .sum::<f64>()
            / n as f64;
        let rho1 = cov1 / var;
        assert!(rho1.abs() < 3.0 / (n as f64).sqrt(), "rho1 = {rho1}");
    }

    #[test]
    fn white_noise_moments_converge() {
        let params = ArfimaParams::white_noise(1.0).unwrap();
        let x = gen_arfima(&params, 100_000, 31).unwrap();
        let m = stats::mean(&x);
        let sd = stats::sample_sd(&x);
        assert!(m.abs() < 0.02, "mean = {m}");
        assert!((sd - 1.0).abs() < 0.05, "sd = {sd}");
    }

    #[test]
    fn fft_and_direct_convolution_agree() {
        let x: Vec<f64> = (0..3000)
            .map(|i| ((i as f64 * 0.77).sin() + (i as f64 * 0.13).cos()) * 0.5)
            .collect();
        let w = fractional_weights(0.3, 900);
        let direct = {
            let mut out = vec![0.0; x.len()];
            for t in 0..x.len() {
                for k in 0..w.len().min(t + 1) {
                    out[t] += w[k] * x[t - k];
                }
            }
            out
        };
        let fft = fft_convolve(&x, &w);
        for (a, b) in direct.iter().zip(&fft) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_amplitude_trend_is_identity() {
        let x = vec![1.0, -0.5, 2.0, 0.0];
        let spec = TrendSpec::Polynomial {
            amplitude: 0.0,
            power: 2.0,
        };
        assert_eq!(add_trend(&x, &spec).unwrap(), x);
        let spec = TrendSpec::Sinusoidal {
            amplitude: 0.0,
            period: 100.0,
        };
        assert_eq!(add_trend(&x, &spec).unwrap(), x);
    }

    #[test]
    fn trend_validation() {
        assert!(TrendSpec::Polynomial {
            amplitude: f64::NAN,
            power: 1.0
        }
        .validate()
        .is_err());
        assert!(TrendSpec::Polynomial {
            amplitude: 1.0,
            power: -1.0
        }
        .validate()
        .is_err());
        assert!(TrendSpec::Sinusoidal {
            amplitude: 1.0,
            period: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn binarize_splits_roughly_in_half() {
        let params = ArfimaParams::fractional(0.3).unwrap();
        let x = gen_arfima(&params, 8192, 5).unwrap();
        let s = binarize_at_median(&x, 0.5, Subject::with_id("surr")).unwrap();
        let ones = s.values().iter().filter(|v| **v == 1).count();
        let frac = ones as f64 / s.len() as f64;
        assert!((frac - 0.5).abs() < 0.02, "fraction of ones = {frac}");
    }

    #[test]
    fn empirical_ci_rejects_single_replicate() {
        let params = ArfimaParams::white_noise(1.0).unwrap();
        assert!(matches!(
            empirical_ci(&params, 4096, 1, 1, 1),
            Err(Error::InsufficientReplicates { .. })
        ));
    }

    #[test]
    fn empirical_ci_quantiles_are_ordered() {
        let params = ArfimaParams::white_noise(1.0).unwrap();
        let ci = empirical_ci(&params, 2048, 1, 24, 7).unwrap();
        assert!(ci.q025 < ci.mean && ci.mean < ci.q975);
        assert_eq!(ci.alphas.len(), 24);
        // Determinism across calls.
        let ci2 = empirical_ci(&params, 2048, 1, 24, 7).unwrap();
        assert_eq!(ci.alphas, ci2.alphas);
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        let c = derive_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
