//! Detrended Fluctuation Analysis: fluctuation curves of any detrending
//! order, scaling-exponent inference, and the long-memory hypothesis test.
//!
//! The pipeline is: build the cumulative [`Profile`](crate::series::Profile),
//! evaluate the root-mean-square fluctuation `F(n)` over a geometric grid
//! of block sizes, regress `log10 F` on `log10 n`, and test the estimated
//! exponent against the uncorrelated value 0.5.

mod crossover;
mod detrend;
mod local;
mod sweep;

pub use crossover::{detect_crossover, detect_crossover_with, CrossoverReport, DEFAULT_BIC_THRESHOLD};
pub use local::{local_slopes, LocalSlopeCurve, LocalSlopePoint};
pub use sweep::{
    detrending_sweep, detrending_sweep_profile, duration_sweep, duration_sweep_profile,
    DetrendingSweep, DurationPoint, OrderAnalysis, SweepClassification,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::Profile;
use crate::stats;

use detrend::BlockDetrender;

/// Largest block size as a fraction of the series length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleCap {
    /// n_max = N/4, the conventional upper bound.
    Quarter,
    /// n_max = N/10, the conservative bound that trims the noisy largest
    /// scales.
    Tenth,
}

impl ScaleCap {
    pub fn fraction(self) -> f64 {
        match self {
            ScaleCap::Quarter => 0.25,
            ScaleCap::Tenth => 0.1,
        }
    }
}

/// Scale-grid settings shared by the sweep operations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScaleConfig {
    pub cap: ScaleCap,
    pub points_per_decade: usize,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig {
            cap: ScaleCap::Quarter,
            points_per_decade: DEFAULT_POINTS_PER_DECADE,
        }
    }
}

/// Default density of the geometric scale grid.
pub const DEFAULT_POINTS_PER_DECADE: usize = 30;

/// Smallest block size used regardless of order; very small blocks bend
/// the curve down because the polynomial consumes most of the degrees of
/// freedom.
const MIN_SCALE_FLOOR: usize = 8;

/// Geometric grid of block sizes for a series of length `n_len` and
/// detrending order `m`.
///
/// Spans `max(2m+2, 8) ..= floor(n_len * cap)` with roughly 30 points per
/// decade, clamped to 25-50 points before integer deduplication.
pub fn default_scales(n_len: usize, m: usize, cap: ScaleCap) -> Result<Vec<usize>> {
    default_scales_with(n_len, m, cap, DEFAULT_POINTS_PER_DECADE)
}

/// [`default_scales`] with an explicit grid density.
pub fn default_scales_with(
    n_len: usize,
    m: usize,
    cap: ScaleCap,
    points_per_decade: usize,
) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::InvalidInput("detrending order must be >= 1".into()));
    }
    if points_per_decade == 0 {
        return Err(Error::InvalidInput("points_per_decade must be >= 1".into()));
    }
    let n_min = (2 * m + 2).max(MIN_SCALE_FLOOR);
    let n_max = (n_len as f64 * cap.fraction()).floor() as usize;
    if n_max < n_min {
        return Err(Error::InsufficientLength { len: n_len, order: m });
    }
    if n_max == n_min {
        return Ok(vec![n_min]);
    }
    let decades = (n_max as f64 / n_min as f64).log10();
    let count = ((decades * points_per_decade as f64).round() as usize + 1).clamp(8, 50);
    let ratio = n_max as f64 / n_min as f64;
    let mut scales = Vec::with_capacity(count);
    for i in 0..count {
        let frac = i as f64 / (count - 1) as f64;
        let n = (n_min as f64 * ratio.powf(frac)).round() as usize;
        scales.push(n.clamp(n_min, n_max));
    }
    scales.dedup();
    Ok(scales)
}

/// One point of a fluctuation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Block size in samples.
    pub n: usize,
    /// Root-mean-square fluctuation at that block size.
    pub f: f64,
}

/// Root-mean-square fluctuation `F(n)` over a grid of block sizes for one
/// detrending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationCurve {
    order: usize,
    points: Vec<CurvePoint>,
    source_len: usize,
}

impl FluctuationCurve {
    /// Builds a curve from precomputed points, e.g. for synthetic
    /// crossover studies. Enforces the structural invariants: strictly
    /// increasing block sizes, each at least `order + 2`, non-negative F.
    pub fn from_points(order: usize, points: Vec<CurvePoint>, source_len: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("detrending order must be >= 1".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidInput("curve needs at least one point".into()));
        }
        for w in points.windows(2) {
            if w[1].n <= w[0].n {
                return Err(Error::InvalidInput(
                    "block sizes must be strictly increasing".into(),
                ));
            }
        }
        for p in &points {
            if p.n < order + 2 {
                return Err(Error::InvalidScale {
                    scale: p.n,
                    reason: format!("below order {order} + 2"),
                });
            }
            if !(p.f >= 0.0) {
                return Err(Error::InvalidInput(format!("negative or NaN F at n={}", p.n)));
            }
        }
        Ok(FluctuationCurve {
            order,
            points,
            source_len,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    /// (log10 n, log10 F) pairs for points with F > 0.
    pub fn log_points(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.f > 0.0)
            .map(|p| ((p.n as f64).log10(), p.f.log10()))
            .collect()
    }
}

/// Options for [`fluctuation_function_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FluctuationOptions {
    /// Also tile blocks from the series end and average both passes.
    /// Off by default: the defining construction tiles from the start and
    /// discards the remainder beyond the last full block.
    pub scan_both_ends: bool,
}

/// Fluctuation function with default options.
pub fn fluctuation_function(
    profile: &Profile,
    order: usize,
    scales: &[usize],
) -> Result<FluctuationCurve> {
    fluctuation_function_with(profile, order, scales, FluctuationOptions::default())
}

/// Computes `F(n)` for each block size in `scales`.
///
/// For block size n the first `M*n` profile values (`M = floor(N/n)`) are
/// split into M non-overlapping blocks, each block is detrended by its
/// degree-m least-squares polynomial, and `F(n)` is the RMS of the
/// residuals over all `M*n` samples.
pub fn fluctuation_function_with(
    profile: &Profile,
    order: usize,
    scales: &[usize],
    opts: FluctuationOptions,
) -> Result<FluctuationCurve> {
    if order == 0 {
        return Err(Error::InvalidInput("detrending order must be >= 1".into()));
    }
    if scales.is_empty() {
        return Err(Error::InvalidInput("no scales given".into()));
    }
    for w in scales.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidInput(
                "scales must be strictly increasing".into(),
            ));
        }
    }
    let y = profile.y();
    let n_len = y.len();
    let mut points = Vec::with_capacity(scales.len());
    for &n in scales {
        if n < order + 2 {
            return Err(Error::InvalidScale {
                scale: n,
                reason: format!("detrending order {order} needs blocks of at least {}", order + 2),
            });
        }
        if n > n_len {
            return Err(Error::InvalidScale {
                scale: n,
                reason: format!("exceeds series length {n_len}"),
            });
        }
        let blocks = n_len / n;
        let used = blocks * n;
        let detrender = BlockDetrender::new(n, order)?;
        let mut sse = 0.0;
        for b in 0..blocks {
            sse += detrender.block_sse(&y[b * n..(b + 1) * n]);
        }
        let f = if opts.scan_both_ends {
            let offset = n_len - used;
            let mut sse_rev = 0.0;
            for b in 0..blocks {
                sse_rev += detrender.block_sse(&y[offset + b * n..offset + (b + 1) * n]);
            }
            ((sse + sse_rev) / (2 * used) as f64).sqrt()
        } else {
            (sse / used as f64).sqrt()
        };
        points.push(CurvePoint { n, f });
    }
    Ok(FluctuationCurve {
        order,
        points,
        source_len: n_len,
    })
}

/// Power-law fit of a fluctuation curve: OLS of `log10 F` on `log10 n`.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    /// Scaling exponent (slope of the log-log fit).
    pub alpha: f64,
    /// Intercept of the log-log fit.
    pub log_phi: f64,
    /// Residual-based standard error of `alpha`.
    pub se_alpha: f64,
    /// `alpha -/+ 1.96 * se_alpha`.
    pub ci95: (f64, f64),
    pub r2: f64,
    /// Smallest and largest block size actually fitted.
    pub range: (usize, usize),
    /// Number of points used in the fit.
    pub n_points: usize,
    /// Points excluded because F = 0 (long immobility spans).
    pub zero_points: usize,
    /// Set when more than 20% of the in-range points had F = 0: the
    /// series carries too little activity for the fit to mean much.
    pub degenerate_activity: bool,
}

/// Fraction of zero-F points above which a fit is flagged
/// `degenerate_activity`.
const DEGENERATE_ZERO_FRACTION: f64 = 0.2;

/// Fits the scaling exponent over `range` (inclusive block-size bounds),
/// or the whole curve when `range` is `None`.
///
/// Points with F = 0 carry no information on a log scale; they are
/// excluded and counted in `zero_points`.
pub fn fit_scaling(curve: &FluctuationCurve, range: Option<(usize, usize)>) -> Result<ScalingFit> {
    let in_range: Vec<&CurvePoint> = curve
        .points()
        .iter()
        .filter(|p| match range {
            Some((lo, hi)) => p.n >= lo && p.n <= hi,
            None => true,
        })
        .collect();
    if in_range.is_empty() {
        return Err(Error::InsufficientPoints {
            needed: 3,
            available: 0,
        });
    }
    let usable: Vec<&CurvePoint> = in_range.iter().copied().filter(|p| p.f > 0.0).collect();
    let zero_points = in_range.len() - usable.len();
    if usable.is_empty() {
        return Err(Error::DegenerateCurve);
    }
    if usable.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            available: usable.len(),
        });
    }
    let xs: Vec<f64> = usable.iter().map(|p| (p.n as f64).log10()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.f.log10()).collect();
    let fit = stats::ols_line(&xs, &ys)?;
    let half_width = 1.96 * fit.se_slope;
    Ok(ScalingFit {
        alpha: fit.slope,
        log_phi: fit.intercept,
        se_alpha: fit.se_slope,
        ci95: (fit.slope - half_width, fit.slope + half_width),
        r2: fit.r2,
        range: (usable[0].n, usable[usable.len() - 1].n),
        n_points: usable.len(),
        zero_points,
        degenerate_activity: (zero_points as f64)
            > DEGENERATE_ZERO_FRACTION * in_range.len() as f64,
    })
}

/// Z-test of the long-memory hypothesis `d = 0` (`alpha = 0.5`).
#[derive(Debug, Clone, Serialize)]
pub struct LongMemoryTest {
    /// `alpha - 0.5`, the implied fractional-differencing parameter.
    pub d_hat: f64,
    /// `d_hat / se_alpha`. Infinite when the fit is exact with d != 0.
    pub z: f64,
    /// Two-sided normal p-value.
    pub p_value: f64,
    /// True iff |z| exceeds the two-sided 5% critical value.
    pub reject_at_5pct: bool,
}

/// Tests `H0: d = 0` against `HA: d != 0` at the 5% level.
///
/// The estimator is asymptotically normal, so `z = d_hat / se_alpha` is
/// referred to the standard normal distribution. The rejection flag, the
/// critical value and the p-value threshold form a consistent triple.
pub fn test_long_memory(fit: &ScalingFit) -> Result<LongMemoryTest> {
    let d_hat = fit.alpha - 0.5;
    if fit.se_alpha == 0.0 {
        if d_hat == 0.0 {
            return Err(Error::NoVariance);
        }
        return Ok(LongMemoryTest {
            d_hat,
            z: if d_hat > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY },
            p_value: 0.0,
            reject_at_5pct: true,
        });
    }
    let z = d_hat / fit.se_alpha;
    let p_value = stats::two_sided_p(z);
    Ok(LongMemoryTest {
        d_hat,
        z,
        p_value,
        reject_at_5pct: z.abs() > stats::Z_CRIT_5PCT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{BehaviorSeries, Profile, Subject};

    fn profile_of(values: &[f64]) -> Profile {
        Profile::from_values(values, 1.0).unwrap()
    }

    /// Curve with F(n) = n^alpha exactly.
    fn exact_power_curve(alpha: f64, scales: &[usize]) -> FluctuationCurve {
        FluctuationCurve {
            order: 1,
            points: scales
                .iter()
                .map(|&n| CurvePoint {
                    n,
                    f: (n as f64).powf(alpha),
                })
                .collect(),
            source_len: scales.last().unwrap() * 4,
        }
    }

    #[test]
    fn default_scales_span_the_documented_range() {
        let scales = default_scales(86_400, 3, ScaleCap::Quarter).unwrap();
        assert_eq!(*scales.first().unwrap(), 8);
        assert_eq!(*scales.last().unwrap(), 21_600);
        assert!(scales.len() >= 25 && scales.len() <= 50);
        assert!(scales.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn default_scales_small_series() {
        let scales = default_scales(40, 1, ScaleCap::Quarter).unwrap();
        assert!(scales.iter().all(|&n| (4..=10).contains(&n)));
        assert!(!scales.is_empty());
    }

    #[test]
    fn default_scales_rejects_too_short_series() {
        match default_scales(20, 5, ScaleCap::Quarter) {
            Err(Error::InsufficientLength { len, order }) => {
                assert_eq!((len, order), (20, 5));
            }
            other => panic!("expected InsufficientLength, got {other:?}"),
        }
    }

    #[test]
    fn tenth_cap_shrinks_the_largest_scale() {
        let q = default_scales(10_000, 1, ScaleCap::Quarter).unwrap();
        let t = default_scales(10_000, 1, ScaleCap::Tenth).unwrap();
        assert_eq!(*q.last().unwrap(), 2_500);
        assert_eq!(*t.last().unwrap(), 1_000);
    }

    #[test]
    fn linear_profile_is_annihilated_by_dfa1() {
        let values = vec![0.7; 256]; // constant series -> exactly linear profile
        let p = profile_of(&values);
        let curve = fluctuation_function(&p, 1, &[8, 16, 32, 64]).unwrap();
        for pt in curve.points() {
            assert!(pt.f.abs() < 1e-12, "F({}) = {}", pt.n, pt.f);
        }
    }

    #[test]
    fn cubic_profile_is_annihilated_by_dfa3() {
        // Series whose profile is exactly cubic: first differences of t^3.
        let mut values = Vec::new();
        let mut prev = 0.0f64;
        for t in 1..=512 {
            let c = (t as f64).powi(3) * 1e-4 + 2.0 * (t as f64) - 5.0;
            values.push(c - prev);
            prev = c;
        }
        let p = profile_of(&values);
        let curve = fluctuation_function(&p, 3, &[8, 16, 64, 128]).unwrap();
        for pt in curve.points() {
            assert!(pt.f.abs() < 1e-10, "F({}) = {}", pt.n, pt.f);
        }
    }

    #[test]
    fn alternating_series_matches_hand_computed_value() {
        // [1,0,1,0,...] of length 16 at n = 4, m = 1: every block's
        // profile is a staircase [c, c, c+1, c+1]; its linear fit has
        // slope 0.4 and per-block squared residual 0.2, so
        // F = sqrt(4 * 0.2 / 16) = sqrt(0.05).
        let values: Vec<f64> = (0..16).map(|i| ((i + 1) % 2) as f64).collect();
        let p = profile_of(&values);
        let curve = fluctuation_function(&p, 1, &[4]).unwrap();
        let expected = 0.05f64.sqrt();
        let got = curve.points()[0].f;
        assert!(
            ((got - expected) / expected).abs() < 1e-10,
            "F(4) = {got}, expected {expected}"
        );
    }

    #[test]
    fn invalid_scales_are_rejected() {
        let p = profile_of(&vec![1.0; 64]);
        assert!(matches!(
            fluctuation_function(&p, 3, &[4]),
            Err(Error::InvalidScale { .. })
        ));
        assert!(matches!(
            fluctuation_function(&p, 1, &[128]),
            Err(Error::InvalidScale { .. })
        ));
        assert!(matches!(
            fluctuation_function(&p, 1, &[8, 8]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn both_ends_option_changes_nothing_when_blocks_tile_exactly() {
        let values: Vec<f64> = (0..64).map(|i| ((i * 37 + 11) % 7) as f64).collect();
        let p = profile_of(&values);
        let a = fluctuation_function(&p, 1, &[8, 16, 32]).unwrap();
        let b = fluctuation_function_with(
            &p,
            1,
            &[8, 16, 32],
            FluctuationOptions { scan_both_ends: true },
        )
        .unwrap();
        for (pa, pb) in a.points().iter().zip(b.points()) {
            assert!((pa.f - pb.f).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_power_law_fit() {
        let curve = exact_power_curve(0.8, &[8, 12, 16, 24, 32, 48, 64, 96, 128]);
        let fit = fit_scaling(&curve, None).unwrap();
        assert!((fit.alpha - 0.8).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!(fit.se_alpha < 1e-12);
        assert_eq!(fit.range, (8, 128));
        assert_eq!(fit.n_points, 9);
        assert!(!fit.degenerate_activity);
    }

    #[test]
    fn zero_points_are_excluded_from_fit() {
        let mut curve = exact_power_curve(0.8, &[8, 12, 16, 24, 32, 48, 64, 96, 128]);
        curve.points[3].f = 0.0;
        let fit = fit_scaling(&curve, None).unwrap();
        assert!((fit.alpha - 0.8).abs() < 1e-12);
        assert_eq!(fit.n_points, 8);
        assert_eq!(fit.zero_points, 1);
        assert!(!fit.degenerate_activity); // 1/9 is under the 20% flag line
    }

    #[test]
    fn heavy_zero_fraction_sets_degenerate_flag() {
        let mut curve = exact_power_curve(0.8, &[8, 12, 16, 24, 32, 48, 64, 96, 128, 190]);
        for i in 0..3 {
            curve.points[i].f = 0.0;
        }
        let fit = fit_scaling(&curve, None).unwrap();
        assert!(fit.degenerate_activity);
    }

    #[test]
    fn all_zero_curve_is_degenerate() {
        let mut curve = exact_power_curve(0.8, &[8, 12, 16]);
        for p in curve.points.iter_mut() {
            p.f = 0.0;
        }
        assert!(matches!(fit_scaling(&curve, None), Err(Error::DegenerateCurve)));
    }

    #[test]
    fn range_restriction_applies() {
        let curve = exact_power_curve(0.8, &[8, 12, 16, 24, 32, 48, 64, 96, 128]);
        let fit = fit_scaling(&curve, Some((16, 64))).unwrap();
        assert_eq!(fit.range, (16, 64));
        assert_eq!(fit.n_points, 5);
    }

    #[test]
    fn table_style_test_rejects() {
        // Magnitudes typical of a long bird-locomotion recording.
        let fit = ScalingFit {
            alpha: 0.7875,
            log_phi: 0.0,
            se_alpha: 0.0125 / 1.96,
            ci95: (0.7875 - 0.0125, 0.7875 + 0.0125),
            r2: 0.995,
            range: (8, 21_600),
            n_points: 50,
            zero_points: 0,
            degenerate_activity: false,
        };
        let test = test_long_memory(&fit).unwrap();
        assert!((test.d_hat - 0.2875).abs() < 1e-12);
        assert!(test.reject_at_5pct);
        assert!(test.p_value < 1e-10);
    }

    #[test]
    fn alpha_half_never_rejects() {
        let fit = ScalingFit {
            alpha: 0.5,
            log_phi: 0.0,
            se_alpha: 0.03,
            ci95: (0.5 - 1.96 * 0.03, 0.5 + 1.96 * 0.03),
            r2: 0.99,
            range: (8, 100),
            n_points: 20,
            zero_points: 0,
            degenerate_activity: false,
        };
        let test = test_long_memory(&fit).unwrap();
        assert_eq!(test.z, 0.0);
        assert!((test.p_value - 1.0).abs() < 1e-12);
        assert!(!test.reject_at_5pct);
    }

    #[test]
    fn zero_se_cases() {
        let mut fit = ScalingFit {
            alpha: 0.8,
            log_phi: 0.0,
            se_alpha: 0.0,
            ci95: (0.8, 0.8),
            r2: 1.0,
            range: (8, 100),
            n_points: 20,
            zero_points: 0,
            degenerate_activity: false,
        };
        let test = test_long_memory(&fit).unwrap();
        assert!(test.z.is_infinite() && test.z > 0.0);
        assert_eq!(test.p_value, 0.0);
        assert!(test.reject_at_5pct);

        fit.alpha = 0.5;
        assert!(matches!(test_long_memory(&fit), Err(Error::NoVariance)));
    }

    #[test]
    fn behavior_series_round_trip_through_dfa() {
        // Alternating activity has a bounded profile: F is small and flat.
        let values: Vec<u8> = (0..256).map(|i| (i % 2) as u8).collect();
        let s = BehaviorSeries::new(values, 0.5, Subject::with_id("alt")).unwrap();
        let p = Profile::from_series(&s);
        let curve = fluctuation_function(&p, 1, &[4, 8, 16, 32, 64]).unwrap();
        assert!(curve.points().iter().all(|pt| pt.f > 0.0));
        let fit = fit_scaling(&curve, None).unwrap();
        // Anti-correlated input: far below the random-walk exponent.
        assert!(fit.alpha < 0.3, "alpha = {}", fit.alpha);
    }
}
