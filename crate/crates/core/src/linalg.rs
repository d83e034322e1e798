//! Small dense linear-algebra helpers shared by the distribution and
//! estimation modules. Dimensions here are tiny (p <= 10 or so), so clarity
//! wins over blocking or SIMD.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot tolerance for the positive-definiteness check.
const PIVOT_REL_TOL: f64 = 1e-12;

/// Lower-triangular Cholesky factor of a symmetric matrix.
///
/// Fails (never clamps) when a pivot drops below `1e-12 * max diagonal`,
/// which doubles as the positive-definiteness test used across the crate.
pub fn cholesky_lower(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::Dimension(format!(
            "cholesky expects a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let max_diag = (0..p).map(|i| a[(i, i)]).fold(0.0f64, f64::max);
    if !max_diag.is_finite() || max_diag <= 0.0 {
        return Err(Error::NotPositiveDefinite(
            "non-positive or non-finite diagonal".into(),
        ));
    }
    let tol = PIVOT_REL_TOL * max_diag;
    let mut l = DMatrix::<f64>::zeros(p, p);
    for j in 0..p {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= tol {
            return Err(Error::NotPositiveDefinite(format!(
                "pivot {d:.3e} at column {} below tolerance {tol:.3e}",
                j + 1
            )));
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..p {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Log-determinant of a matrix given its lower Cholesky factor.
pub fn logdet_from_cholesky(l: &DMatrix<f64>) -> f64 {
    (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0
}

/// Solves L x = b for lower-triangular L.
pub fn solve_lower(l: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let p = l.nrows();
    let mut x = b.clone();
    for i in 0..p {
        for k in 0..i {
            let v = x[k];
            x[i] -= l[(i, k)] * v;
        }
        x[i] /= l[(i, i)];
    }
    x
}

/// Inverse of a symmetric positive-definite matrix from its Cholesky factor.
pub fn spd_inverse_from_cholesky(l: &DMatrix<f64>) -> DMatrix<f64> {
    let p = l.nrows();
    // Invert L by forward substitution, then A^-1 = L^-T L^-1.
    let mut linv = DMatrix::<f64>::identity(p, p);
    for col in 0..p {
        for i in 0..p {
            let mut s = linv[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * linv[(k, col)];
            }
            linv[(i, col)] = s / l[(i, i)];
        }
    }
    let inv = linv.transpose() * &linv;
    symmetrize(&inv)
}

/// Exact symmetrization (A + A^T) / 2.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (a + a.transpose())
}

/// Maximum absolute asymmetry |a_ij - a_ji| relative to the largest entry.
pub fn relative_asymmetry(a: &DMatrix<f64>) -> f64 {
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Kahan-compensated sum, used wherever reductions must not depend on
/// accumulation order beyond a documented 1e-12 tolerance.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
