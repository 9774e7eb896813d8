//! Small shared statistics kernel: ordinary least squares, the standard
//! normal distribution, and quantiles.

use crate::error::{Error, Result};

/// Two-sided 5% critical value of the standard normal distribution,
/// conventionally quoted as 1.96. The full-precision quantile keeps
/// `|z| > z_crit`, `p < 0.05` and the reject flag mutually consistent.
pub const Z_CRIT_5PCT: f64 = 1.959_963_984_540_054;

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual-based standard error of the slope; 0 when dof = 0.
    pub se_slope: f64,
    pub r2: f64,
    /// Residual sum of squares.
    pub rss: f64,
    pub n: usize,
}

/// Fits `y = intercept + slope*x` by OLS.
///
/// `se_slope` uses the standard residual estimator
/// `se^2 = (rss / (n-2)) / sum((x - mean_x)^2)`.
pub fn ols_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "x/y length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            available: n,
        });
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput(
            "all x values identical: slope undefined".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut rss = 0.0;
    let mut sst = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let e = y - (intercept + slope * x);
        rss += e * e;
        sst += (y - mean_y) * (y - mean_y);
    }
    let r2 = if sst > 0.0 {
        (1.0 - rss / sst).clamp(0.0, 1.0)
    } else {
        // Flat y: a line reproduces it exactly.
        1.0
    };
    let se_slope = if n > 2 {
        (rss / (n as f64 - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        se_slope,
        r2,
        rss,
        n,
    })
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-sided p-value of a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Linear-interpolation quantile (type 7) of an unsorted sample.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&p), "quantile level outside [0,1]");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n-1 denominator).
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    (ss / (n as f64 - 1.0)).sqrt()
}

/// Solves a small dense linear system `a x = b` in place by Gaussian
/// elimination with partial pivoting. `a` is row-major, `dim x dim`.
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], dim: usize) -> Result<()> {
    debug_assert_eq!(a.len(), dim * dim);
    debug_assert_eq!(b.len(), dim);
    for col in 0..dim {
        let mut pivot = col;
        for row in col + 1..dim {
            if a[row * dim + col].abs() > a[pivot * dim + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * dim + col] == 0.0 {
            return Err(Error::InvalidInput("singular linear system".into()));
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(col * dim + k, pivot * dim + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * dim + col];
        for row in col + 1..dim {
            let factor = a[row * dim + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..dim {
                a[row * dim + k] -= factor * a[col * dim + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..dim).rev() {
        let mut acc = b[col];
        for k in col + 1..dim {
            acc -= a[col * dim + k] * b[k];
        }
        b[col] = acc / a[col * dim + col];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 + 2.0 * x).collect();
        let fit = ols_line(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.se_slope < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_x_rejected() {
        let xs = [1.0, 1.0, 1.0];
        let ys = [0.0, 1.0, 2.0];
        assert!(ols_line(&xs, &ys).is_err());
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(Z_CRIT_5PCT) - 0.975).abs() < 1e-12);
        assert!((two_sided_p(Z_CRIT_5PCT) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
    }

    #[test]
    fn dense_solver_3x3() {
        let mut a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let mut b = vec![8.0, -11.0, -3.0];
        solve_dense(&mut a, &mut b, 3).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-12);
        assert!((b[1] - 3.0).abs() < 1e-12);
        assert!((b[2] - -1.0).abs() < 1e-12);
    }
}
