//! Per-block polynomial least-squares detrending.
//!
//! All blocks at one scale share the same abscissa grid, so the Gram
//! matrix of the polynomial basis is factorized once per scale and only
//! the right-hand side changes block to block.

use crate::error::{Error, Result};

/// Least-squares detrender for blocks of a fixed length `n` and
/// polynomial degree `m`. Works on abscissae rescaled to [-1, 1], which
/// keeps the normal equations well conditioned for the degrees DFA uses.
pub(crate) struct BlockDetrender {
    degree: usize,
    /// Scaled abscissa s_t = 2t/(n-1) - 1 for t = 0..n-1.
    s: Vec<f64>,
    /// Lower-triangular Cholesky factor of the basis Gram matrix,
    /// row-major, (degree+1) x (degree+1).
    chol: Vec<f64>,
}

impl BlockDetrender {
    pub fn new(block_len: usize, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidInput("detrending order must be >= 1".into()));
        }
        if block_len < degree + 2 {
            return Err(Error::InvalidScale {
                scale: block_len,
                reason: format!("block shorter than order {degree} + 2"),
            });
        }
        let n = block_len;
        let dim = degree + 1;
        let s: Vec<f64> = (0..n)
            .map(|t| 2.0 * t as f64 / (n as f64 - 1.0) - 1.0)
            .collect();

        // Power sums P_r = sum_t s_t^r, r = 0..2*degree.
        let mut power_sums = vec![0.0; 2 * degree + 1];
        for &v in &s {
            let mut p = 1.0;
            for sum in power_sums.iter_mut() {
                *sum += p;
                p *= v;
            }
        }
        let mut gram = vec![0.0; dim * dim];
        for j in 0..dim {
            for k in 0..dim {
                gram[j * dim + k] = power_sums[j + k];
            }
        }
        let chol = cholesky(&gram, dim)?;
        Ok(BlockDetrender { degree, s, chol })
    }

    /// Sum of squared residuals of `y` around its degree-m least-squares
    /// polynomial fit. `y.len()` must equal the block length.
    pub fn block_sse(&self, y: &[f64]) -> f64 {
        debug_assert_eq!(y.len(), self.s.len());
        let dim = self.degree + 1;
        let mut rhs = vec![0.0; dim];
        for (&v, &yt) in self.s.iter().zip(y) {
            let mut p = 1.0;
            for r in rhs.iter_mut() {
                *r += p * yt;
                p *= v;
            }
        }
        let coeffs = chol_solve(&self.chol, &rhs, dim);
        let mut sse = 0.0;
        for (&v, &yt) in self.s.iter().zip(y) {
            // Horner evaluation of the fitted polynomial at s_t.
            let mut fit = coeffs[dim - 1];
            for j in (0..dim - 1).rev() {
                fit = fit * v + coeffs[j];
            }
            let e = yt - fit;
            sse += e * e;
        }
        sse
    }
}

/// Dense Cholesky factorization of a symmetric positive-definite matrix.
fn cholesky(a: &[f64], dim: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut acc = a[i * dim + j];
            for k in 0..j {
                acc -= l[i * dim + k] * l[j * dim + k];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::InvalidInput(
                        "detrending basis is numerically singular".into(),
                    ));
                }
                l[i * dim + j] = acc.sqrt();
            } else {
                l[i * dim + j] = acc / l[j * dim + j];
            }
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` by forward/back substitution.
fn chol_solve(l: &[f64], b: &[f64], dim: usize) -> Vec<f64> {
    let mut x = b.to_vec();
    for i in 0..dim {
        for k in 0..i {
            x[i] -= l[i * dim + k] * x[k];
        }
        x[i] /= l[i * dim + i];
    }
    for i in (0..dim).rev() {
        for k in i + 1..dim {
            x[i] -= l[k * dim + i] * x[k];
        }
        x[i] /= l[i * dim + i];
    }
    x
}
