//! Densities and samplers for the multivariate normal, Wishart,
//! inverse-Wishart, and multivariate Student-t distributions.
//!
//! All samplers draw from an explicit [`RngStream`], so every sequence is
//! reproducible from its `(seed, stream)` address. Positive definiteness is
//! established by a triangular factorization that fails rather than clamps.

use nalgebra::{DMatrix, DVector};
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::RngStream;
use crate::specfun::ln_gamma;

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// A validated symmetric positive-definite matrix with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl SpdMatrix {
    /// Validates symmetry (relative tolerance 1e-10) and positive
    /// definiteness, storing the symmetrized matrix and its factor.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        if linalg::relative_asymmetry(&m) > 1e-10 {
            return Err(Error::Domain(
                "matrix is not symmetric within relative tolerance 1e-10".into(),
            ));
        }
        let sym = linalg::symmetrize(&m);
        let chol = linalg::cholesky_lower(&sym)?;
        Ok(SpdMatrix { m: sym, chol })
    }

    /// Builds the matrix `f f^T` from a lower-triangular factor with strictly
    /// positive diagonal. The factor is taken as the Cholesky factor, so no
    /// re-validation can fail.
    pub fn from_factor(f: DMatrix<f64>) -> Result<Self> {
        let p = f.nrows();
        if f.ncols() != p {
            return Err(Error::Dimension("factor must be square".into()));
        }
        for j in 0..p {
            if !f[(j, j)].is_finite() || f[(j, j)] <= 0.0 {
                return Err(Error::NotPositiveDefinite(format!(
                    "factor diagonal entry {} not positive",
                    j + 1
                )));
            }
            for k in (j + 1)..p {
                if f[(j, k)] != 0.0 {
                    return Err(Error::Domain("factor must be lower triangular".into()));
                }
            }
        }
        let m = linalg::symmetrize(&(&f * f.transpose()));
        Ok(SpdMatrix { m, chol: f })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("ragged rows in matrix literal".into()));
        }
        let m = DMatrix::from_fn(p, p, |i, j| rows[i][j]);
        SpdMatrix::new(m)
    }

    /// Convenience constructor for the 1x1 case.
    pub fn scalar(v: f64) -> Result<Self> {
        SpdMatrix::new(DMatrix::from_element(1, 1, v))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Lower-triangular Cholesky factor.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn logdet(&self) -> f64 {
        linalg::logdet_from_cholesky(&self.chol)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        linalg::spd_inverse_from_cholesky(&self.chol)
    }

    /// Quadratic form `x^T A^-1 x` via one triangular solve.
    pub fn inv_quad_form(&self, x: &DVector<f64>) -> f64 {
        let z = linalg::solve_lower(&self.chol, x);
        z.dot(&z)
    }

    /// Trace of `A^-1 B`.
    pub fn inv_trace_product(&self, b: &DMatrix<f64>) -> f64 {
        let inv = self.inverse();
        (0..self.dim())
            .map(|i| inv.row(i).transpose().dot(&b.column(i)))
            .sum()
    }

    /// Scales the matrix by `c > 0`.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(SpdMatrix {
            m: &self.m * c,
            chol: &self.chol * c.sqrt(),
        })
    }
}

/// Degrees of freedom and scale of a Wishart distribution.
#[derive(Debug, Clone)]
pub struct WishartParams {
    df: f64,
    scale: SpdMatrix,
}

impl WishartParams {
    /// Requires `df >= p` so draws are almost surely invertible.
    pub fn new(df: f64, scale: SpdMatrix) -> Result<Self> {
        let p = scale.dim() as f64;
        if !df.is_finite() || df < p {
            return Err(Error::Domain(format!(
                "Wishart degrees of freedom must satisfy df >= p, got df = {df}, p = {p}"
            )));
        }
        Ok(WishartParams { df, scale })
    }

    pub fn df(&self) -> f64 {
        self.df
    }

    pub fn scale(&self) -> &SpdMatrix {
        &self.scale
    }

    pub fn dim(&self) -> usize {
        self.scale.dim()
    }
}

/// Log of the multivariate gamma function `Gamma_p(z)`, defined for
/// `z > (p - 1) / 2`.
pub fn multigamma_log(p: usize, z: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let pole = (p as f64 - 1.0) / 2.0;
    if z.is_nan() || z <= pole {
        return Err(Error::Domain(format!(
            "multivariate gamma requires z > (p-1)/2 = {pole}, got z = {z}"
        )));
    }
    let mut s = 0.25 * (p * (p - 1)) as f64 * std::f64::consts::PI.ln();
    for i in 1..=p {
        s += ln_gamma(z + (1.0 - i as f64) / 2.0);
    }
    Ok(s)
}

/// Wishart log-density at `a`.
pub fn wishart_logpdf(a: &SpdMatrix, params: &WishartParams) -> Result<f64> {
    let p = params.dim();
    if a.dim() != p {
        return Err(Error::Dimension(format!(
            "matrix is {}x{} but scale is {p}x{p}",
            a.dim(),
            a.dim()
        )));
    }
    let m = params.df();
    let pf = p as f64;
    Ok(0.5 * (m - pf - 1.0) * a.logdet()
        - 0.5 * params.scale().inv_trace_product(a.matrix())
        - 0.5 * m * pf * std::f64::consts::LN_2
        - 0.5 * m * params.scale().logdet()
        - multigamma_log(p, 0.5 * m)?)
}

/// Inverse-Wishart log-density at `b`; requires `df > p - 1`.
pub fn inverse_wishart_logpdf(b: &SpdMatrix, df: f64, scale: &SpdMatrix) -> Result<f64> {
    let p = scale.dim();
    if b.dim() != p {
        return Err(Error::Dimension("matrix and scale dimensions differ".into()));
    }
    let pf = p as f64;
    if df.is_nan() || df <= pf - 1.0 {
        return Err(Error::Domain(format!(
            "inverse-Wishart requires df > p - 1, got df = {df}, p = {p}"
        )));
    }
    Ok(0.5 * df * scale.logdet()
        - 0.5 * (df + pf + 1.0) * b.logdet()
        - 0.5 * b.inv_trace_product(scale.matrix())
        - 0.5 * df * pf * std::f64::consts::LN_2
        - multigamma_log(p, 0.5 * df)?)
}

/// Draws from the Wishart distribution by the Bartlett construction:
/// a lower-triangular matrix with chi-squared diagonal entries (df m, m-1,
/// ..., m-p+1) and standard-normal subdiagonals, pushed through the scale's
/// Cholesky factor.
pub fn wishart_sample(params: &WishartParams, rng: &mut RngStream) -> SpdMatrix {
    let p = params.dim();
    let m = params.df();
    let mut t = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(m - i as f64).expect("df >= p > i");
        t[(i, i)] = chi.sample(rng).sqrt();
        for j in 0..i {
            t[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let factor = params.scale().cholesky() * t;
    SpdMatrix::from_factor(factor).expect("triangular factor with positive diagonal")
}

/// Draws from the inverse-Wishart distribution as the inverse of a Wishart
/// draw with inverted scale; requires `df >= p`.
pub fn inverse_wishart_sample(
    df: f64,
    scale: &SpdMatrix,
    rng: &mut RngStream,
) -> Result<SpdMatrix> {
    let scale_inv = SpdMatrix::new(scale.inverse())?;
    let w = wishart_sample(&WishartParams::new(df, scale_inv)?, rng);
    SpdMatrix::new(w.inverse())
}

/// Draws from `N_p(mu, sigma)`.
pub fn mvn_sample(mu: &DVector<f64>, sigma: &SpdMatrix, rng: &mut RngStream) -> DVector<f64> {
    let p = sigma.dim();
    debug_assert_eq!(mu.len(), p);
    let z = DVector::from_iterator(p, (0..p).map(|_| StandardNormal.sample(rng)));
    mu + sigma.cholesky() * z
}

/// Multivariate normal log-density.
pub fn mvn_logpdf(x: &DVector<f64>, mu: &DVector<f64>, sigma: &SpdMatrix) -> Result<f64> {
    let p = sigma.dim();
    if x.len() != p || mu.len() != p {
        return Err(Error::Dimension("vector lengths must match sigma".into()));
    }
    let diff = x - mu;
    Ok(-0.5 * (p as f64 * LN_2PI + sigma.logdet() + sigma.inv_quad_form(&diff)))
}

/// Multivariate Student-t log-density with location `loc`, scale matrix
/// `scale`, and `df > 0` degrees of freedom.
pub fn mvt_logpdf(
    x: &DVector<f64>,
    loc: &DVector<f64>,
    scale: &SpdMatrix,
    df: f64,
) -> Result<f64> {
    let p = scale.dim();
    if x.len() != p || loc.len() != p {
        return Err(Error::Dimension("vector lengths must match scale".into()));
    }
    if df.is_nan() || df <= 0.0 {
        return Err(Error::Domain(format!("t degrees of freedom must be positive, got {df}")));
    }
    let pf = p as f64;
    let diff = x - loc;
    let q = scale.inv_quad_form(&diff);
    Ok(ln_gamma(0.5 * (df + pf))
        - ln_gamma(0.5 * df)
        - 0.5 * pf * (df * std::f64::consts::PI).ln()
        - 0.5 * scale.logdet()
        - 0.5 * (df + pf) * (1.0 + q / df).ln())
}
