//! Estimators for the interval-valued model.
//!
//! The internal means follow `N_p(mu, Sigma)` and the internal spreads a
//! Wishart `W_p(m, Lambda)` with known degrees of freedom `m`. Everything an
//! estimator needs is carried by [`SufficientStats`]: the mean of the
//! internal means, their centered scatter, and the summed spread matrices.
//!
//! Closed forms:
//!
//! ```text
//! ML:    mu = theta_bar   Sigma = S / n        Lambda = sum(theta2) / (n m)
//! Bayes: mu = theta_bar   Sigma = S / (n - p)  Lambda = sum(theta2) / (n m - p - 1)
//! ```
//!
//! The module also provides the likelihoods the estimators maximize, the
//! Fisher information with Wald intervals, the Gibbs full-conditional
//! samplers matching the closed-form posterior means, bivariate convenience
//! forms, and the Box-Cox / power transforms used when normality of the
//! internal means is doubtful.

use nalgebra::{DMatrix, DVector};

use crate::dist::{
    inverse_wishart_sample, mvn_logpdf, mvn_sample, wishart_logpdf, SpdMatrix, WishartParams,
};
use crate::error::{Error, Result};
use crate::interval::InternalRep;
use crate::linalg;
use crate::rng::RngStream;
use crate::specfun::std_normal_quantile;

/// Sufficient statistics of a sample of internal representations.
#[derive(Debug, Clone)]
pub struct SufficientStats {
    theta_bar: DVector<f64>,
    scatter: DMatrix<f64>,
    theta2_sum: DMatrix<f64>,
    n: usize,
}

impl SufficientStats {
    pub fn theta_bar(&self) -> &DVector<f64> {
        &self.theta_bar
    }

    /// Centered scatter `S = sum (theta1_i - theta_bar)(theta1_i - theta_bar)^T`.
    pub fn scatter(&self) -> &DMatrix<f64> {
        &self.scatter
    }

    pub fn theta2_sum(&self) -> &DMatrix<f64> {
        &self.theta2_sum
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.theta_bar.len()
    }
}

/// Computes sufficient statistics with a centered two-pass scatter.
pub fn sufficient_stats(reps: &[InternalRep]) -> Result<SufficientStats> {
    let n = reps.len();
    if n == 0 {
        return Err(Error::Domain("need at least one observation".into()));
    }
    let p = reps[0].dim();
    if reps.iter().any(|r| r.dim() != p) {
        return Err(Error::Dimension("observations have mixed dimensions".into()));
    }
    let mut theta_bar = DVector::<f64>::zeros(p);
    for r in reps {
        theta_bar += r.theta1();
    }
    theta_bar /= n as f64;

    let mut scatter = DMatrix::<f64>::zeros(p, p);
    let mut theta2_sum = DMatrix::<f64>::zeros(p, p);
    for r in reps {
        let d = r.theta1() - &theta_bar;
        scatter += &d * d.transpose();
        theta2_sum += r.theta2();
    }
    Ok(SufficientStats {
        theta_bar,
        scatter: linalg::symmetrize(&scatter),
        theta2_sum: linalg::symmetrize(&theta2_sum),
        n,
    })
}

/// Ground-truth (or estimated) model parameters.
#[derive(Debug, Clone)]
pub struct ModelParams {
    mu: DVector<f64>,
    sigma: SpdMatrix,
    lambda: SpdMatrix,
    m: f64,
}

impl ModelParams {
    pub fn new(mu: DVector<f64>, sigma: SpdMatrix, lambda: SpdMatrix, m: f64) -> Result<Self> {
        let p = mu.len();
        if sigma.dim() != p || lambda.dim() != p {
            return Err(Error::Dimension("mu, sigma, lambda dimensions differ".into()));
        }
        if m < p as f64 {
            return Err(Error::Domain(format!(
                "Wishart degrees of freedom m = {m} must be at least p = {p}"
            )));
        }
        Ok(ModelParams { mu, sigma, lambda, m })
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn lambda(&self) -> &SpdMatrix {
        &self.lambda
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn p(&self) -> usize {
        self.mu.len()
    }
}

/// Which estimator produced a [`ParamEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ml,
    Bayes,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ml => "ML",
            Method::Bayes => "Bayes",
        }
    }
}

/// Point estimates of (mu, Sigma, Lambda).
#[derive(Debug, Clone)]
pub struct ParamEstimate {
    pub mu_hat: DVector<f64>,
    pub sigma_hat: DMatrix<f64>,
    pub lambda_hat: DMatrix<f64>,
    pub method: Method,
    pub m_used: f64,
    /// Set when the scatter carries no information (n = 1), making the
    /// covariance estimate identically zero.
    pub sigma_degenerate: bool,
}

impl ParamEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "mu": self.mu_hat.iter().copied().collect::<Vec<f64>>(),
            "sigma": crate::interval::matrix_rows(&self.sigma_hat),
            "lambda": crate::interval::matrix_rows(&self.lambda_hat),
            "method": self.method.as_str(),
            "m": self.m_used,
        });
        if self.sigma_degenerate {
            obj["warnings"] =
                serde_json::json!(["covariance estimate is singular: single observation"]);
        }
        obj
    }
}

/// Maximum-likelihood estimators.
pub fn ml_estimate(stats: &SufficientStats, m: f64) -> Result<ParamEstimate> {
    let (n, p) = (stats.n() as f64, stats.p() as f64);
    if m < p {
        return Err(Error::Domain(format!(
            "Wishart degrees of freedom m = {m} must be at least p = {p}"
        )));
    }
    Ok(ParamEstimate {
        mu_hat: stats.theta_bar().clone(),
        sigma_hat: stats.scatter() / n,
        lambda_hat: stats.theta2_sum() / (n * m),
        method: Method::Ml,
        m_used: m,
        sigma_degenerate: stats.n() == 1,
    })
}

/// Bayes estimators (posterior means under the reference priors).
///
/// Requires `n > p` for the covariance and `n m > p + 1` for the scale.
pub fn bayes_estimate(stats: &SufficientStats, m: f64) -> Result<ParamEstimate> {
    let (n, p) = (stats.n() as f64, stats.p() as f64);
    if m < p {
        return Err(Error::Domain(format!(
            "Wishart degrees of freedom m = {m} must be at least p = {p}"
        )));
    }
    if n <= p {
        return Err(Error::Estimation(format!(
            "posterior mean of Sigma undefined: requires n > p (n = {n}, p = {p})"
        )));
    }
    if n * m <= p + 1.0 {
        return Err(Error::Estimation(format!(
            "posterior mean of Lambda undefined: requires n*m > p + 1 (n*m = {})",
            n * m
        )));
    }
    Ok(ParamEstimate {
        mu_hat: stats.theta_bar().clone(),
        sigma_hat: stats.scatter() / (n - p),
        lambda_hat: stats.theta2_sum() / (n * m - p - 1.0),
        method: Method::Bayes,
        m_used: m,
        sigma_degenerate: false,
    })
}

/// Joint log-likelihood of the internal means under `N_p(mu, sigma)`.
pub fn log_likelihood_l1(
    mu: &DVector<f64>,
    sigma: &SpdMatrix,
    reps: &[InternalRep],
) -> Result<f64> {
    let mut total = 0.0;
    for r in reps {
        total += mvn_logpdf(r.theta1(), mu, sigma)?;
    }
    Ok(total)
}

/// Joint log-likelihood of the internal spreads under `W_p(m, lambda)`,
/// including the full Wishart normalizer. Every observed spread matrix must
/// be positive definite, which holds for model-simulated data.
pub fn log_likelihood_l2(lambda: &SpdMatrix, m: f64, reps: &[InternalRep]) -> Result<f64> {
    let params = WishartParams::new(m, lambda.clone())?;
    let mut total = 0.0;
    for (i, r) in reps.iter().enumerate() {
        let a = SpdMatrix::new(r.theta2().clone()).map_err(|e| {
            Error::NotPositiveDefinite(format!("spread matrix of observation {}: {e}", i + 1))
        })?;
        total += wishart_logpdf(&a, &params)?;
    }
    Ok(total)
}

/// Fisher information of one `N_p(mu, Sigma)` observation in the
/// `(mu, vech(Sigma))` parameterization.
#[derive(Debug, Clone)]
pub struct FisherInfo {
    matrix: DMatrix<f64>,
    layout: Vec<String>,
}

impl FisherInfo {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Parameter names in row/column order: `mu_j` first, then the
    /// column-stacked lower triangle `sigma_i_j` (i >= j).
    pub fn layout(&self) -> &[String] {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Column-stacked lower-triangle index pairs (i >= j), the vech order.
pub fn vech_indices(p: usize) -> Vec<(usize, usize)> {
    let mut idx = Vec::with_capacity(p * (p + 1) / 2);
    for j in 0..p {
        for i in j..p {
            idx.push((i, j));
        }
    }
    idx
}

/// Duplication matrix `D` with `vec(M) = D vech(M)` for symmetric `M`.
fn duplication_matrix(p: usize) -> DMatrix<f64> {
    let pairs = vech_indices(p);
    let mut d = DMatrix::<f64>::zeros(p * p, pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        d[(j * p + i, col)] = 1.0;
        if i != j {
            d[(i * p + j, col)] = 1.0;
        }
    }
    d
}

/// Parameter names in `(mu, vech(Sigma))` order.
fn parameter_layout(p: usize) -> Vec<String> {
    let mut layout: Vec<String> = (1..=p).map(|j| format!("mu_{j}")).collect();
    layout.extend(vech_indices(p).iter().map(|&(i, j)| format!("sigma_{}_{}", i + 1, j + 1)));
    layout
}

/// Per-observation Fisher information: block-diagonal with `Sigma^-1` for
/// the mean and `0.5 D^T (Sigma^-1 kron Sigma^-1) D` for `vech(Sigma)`.
pub fn fisher_information(sigma: &SpdMatrix) -> FisherInfo {
    let p = sigma.dim();
    let q = p * (p + 3) / 2;
    let inv = sigma.inverse();
    let mut info = DMatrix::<f64>::zeros(q, q);
    info.view_mut((0, 0), (p, p)).copy_from(&inv);

    let d = duplication_matrix(p);
    let kron = inv.kronecker(&inv);
    let sigma_block = 0.5 * d.transpose() * kron * &d;
    let q2 = p * (p + 1) / 2;
    info.view_mut((p, p), (q2, q2)).copy_from(&sigma_block);

    FisherInfo {
        matrix: linalg::symmetrize(&info),
        layout: parameter_layout(p),
    }
}

/// One Wald interval.
#[derive(Debug, Clone)]
pub struct ParamInterval {
    pub name: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Inverse-information diagonal in the `(mu, vech(Sigma))` layout. For the
/// Gaussian family the inverse has the closed form `Sigma` for the mean
/// block and `2 D+ (Sigma kron Sigma) D+^T` for the covariance block, whose
/// diagonal entries are `sigma_ii sigma_jj + sigma_ij^2`; evaluating these
/// directly sidesteps inverting the assembled information matrix, which can
/// be numerically singular when variable scales differ by orders of
/// magnitude.
fn inverse_information_diagonal(sigma: &SpdMatrix) -> Vec<f64> {
    let s = sigma.matrix();
    let mut diag: Vec<f64> = (0..sigma.dim()).map(|k| s[(k, k)]).collect();
    diag.extend(
        vech_indices(sigma.dim())
            .iter()
            .map(|&(i, j)| s[(i, i)] * s[(j, j)] + s[(i, j)] * s[(i, j)]),
    );
    diag
}

/// Wald confidence intervals `est_k +- z sqrt([I^-1]_kk / n)` for the mean
/// and covariance parameters, with the information evaluated at the
/// estimate.
pub fn asymptotic_ci(
    estimate: &ParamEstimate,
    stats: &SufficientStats,
    level: f64,
) -> Result<Vec<ParamInterval>> {
    if level.is_nan() || level <= 0.0 || level >= 1.0 {
        return Err(Error::Domain(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    let sigma = SpdMatrix::new(estimate.sigma_hat.clone()).map_err(|e| {
        Error::Estimation(format!("information matrix is singular at the estimate: {e}"))
    })?;
    let inv_diag = inverse_information_diagonal(&sigma);
    let layout = parameter_layout(stats.p());
    let z = std_normal_quantile(0.5 + level / 2.0)?;
    let n = stats.n() as f64;

    let mut values: Vec<f64> = estimate.mu_hat.iter().copied().collect();
    values.extend(
        vech_indices(stats.p())
            .iter()
            .map(|&(i, j)| estimate.sigma_hat[(i, j)]),
    );
    Ok(values
        .iter()
        .zip(layout)
        .zip(inv_diag)
        .map(|((&est, name), var_k)| {
            let half = z * (var_k / n).sqrt();
            ParamInterval {
                name,
                estimate: est,
                lower: est - half,
                upper: est + half,
            }
        })
        .collect())
}

/// Draws the mean full conditional `N_p(theta_bar, Sigma / n)`.
pub fn gibbs_mu(sigma: &SpdMatrix, stats: &SufficientStats, rng: &mut RngStream) -> DVector<f64> {
    let scaled = sigma
        .scale(1.0 / stats.n() as f64)
        .expect("n >= 1 gives a positive factor");
    mvn_sample(stats.theta_bar(), &scaled, rng)
}

/// Draws the covariance full conditional: inverse-Wishart with degrees of
/// freedom `n + 2` and scale `sum_i (theta1_i - mu)(theta1_i - mu)^T`.
///
/// Alternating this with [`gibbs_mu`] targets the joint whose covariance
/// margin is inverse-Wishart `(n + 1, S)`, so the chain's long-run mean is
/// the closed-form posterior mean `S / (n - p)`.
pub fn gibbs_sigma(
    mu: &DVector<f64>,
    reps: &[InternalRep],
    rng: &mut RngStream,
) -> Result<SpdMatrix> {
    let n = reps.len();
    let p = mu.len();
    if n < p + 1 {
        return Err(Error::Domain(format!(
            "covariance conditional needs n >= p + 1 (n = {n}, p = {p})"
        )));
    }
    let mut c = DMatrix::<f64>::zeros(p, p);
    for r in reps {
        let d = r.theta1() - mu;
        c += &d * d.transpose();
    }
    let scale = SpdMatrix::new(linalg::symmetrize(&c))
        .map_err(|e| Error::Estimation(format!("rank-deficient conditional scale: {e}")))?;
    inverse_wishart_sample(n as f64 + 2.0, &scale, rng)
}

/// Draws the scale full conditional: inverse-Wishart `(n m, sum_i theta2_i)`.
pub fn gibbs_lambda(reps: &[InternalRep], m: f64, rng: &mut RngStream) -> Result<SpdMatrix> {
    let stats = sufficient_stats(reps)?;
    let (n, p) = (stats.n() as f64, stats.p() as f64);
    if m < p {
        return Err(Error::Domain(format!("m = {m} must be at least p = {p}")));
    }
    let scale = SpdMatrix::new(stats.theta2_sum().clone())
        .map_err(|e| Error::Estimation(format!("rank-deficient conditional scale: {e}")))?;
    inverse_wishart_sample(n * m, &scale, rng)
}

/// Named scalar estimates for the bivariate case.
#[derive(Debug, Clone)]
pub struct BivariateMl {
    pub mu1: f64,
    pub mu2: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub rho: f64,
    pub lambda11: f64,
    pub lambda22: f64,
    pub lambda12: f64,
}

/// Bivariate ML estimates; `rho` is the scatter correlation
/// `S_12 / sqrt(S_11 S_22)`.
pub fn bivariate_ml(reps: &[InternalRep], m: f64) -> Result<BivariateMl> {
    let stats = sufficient_stats(reps)?;
    if stats.p() != 2 {
        return Err(Error::Dimension(format!(
            "bivariate form requires p = 2, got p = {}",
            stats.p()
        )));
    }
    let est = ml_estimate(&stats, m)?;
    let s = stats.scatter();
    let denom = s[(0, 0)] * s[(1, 1)];
    if denom <= 0.0 {
        return Err(Error::Estimation(
            "correlation undefined: zero variance in a coordinate".into(),
        ));
    }
    Ok(BivariateMl {
        mu1: est.mu_hat[0],
        mu2: est.mu_hat[1],
        sigma1_sq: est.sigma_hat[(0, 0)],
        sigma2_sq: est.sigma_hat[(1, 1)],
        rho: s[(0, 1)] / denom.sqrt(),
        lambda11: est.lambda_hat[(0, 0)],
        lambda22: est.lambda_hat[(1, 1)],
        lambda12: est.lambda_hat[(0, 1)],
    })
}

fn check_transform_args(value: f64, kappa: f64) -> Result<()> {
    if value.is_nan() || value <= 0.0 {
        return Err(Error::Domain(format!(
            "transform requires a positive value, got {value}"
        )));
    }
    if kappa.abs() >= 3.0 {
        return Err(Error::Domain(format!(
            "transform exponent must lie in (-3, 3), got {kappa}"
        )));
    }
    Ok(())
}

/// Box-Cox transform `(v^k - 1)/k`, continuous in `k` with `log v` at zero.
pub fn boxcox(value: f64, kappa: f64) -> Result<f64> {
    check_transform_args(value, kappa)?;
    if kappa == 0.0 {
        Ok(value.ln())
    } else {
        Ok((value.powf(kappa) - 1.0) / kappa)
    }
}

/// Power transform `v^k`, with `log v` at `k = 0`.
pub fn power_transform(value: f64, kappa: f64) -> Result<f64> {
    check_transform_args(value, kappa)?;
    if kappa == 0.0 {
        Ok(value.ln())
    } else {
        Ok(value.powf(kappa))
    }
}

/// Grid search for the Box-Cox exponent maximizing the profile normal
/// log-likelihood of the transformed values, over (-3, 3) in steps of 0.01.
/// Coarse by construction; fine enough for the diagnostics it feeds.
pub fn boxcox_optimal_kappa(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Domain("need at least two values".into()));
    }
    if values.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::Domain("all values must be positive".into()));
    }
    let n = values.len() as f64;
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    let mut best = (f64::NEG_INFINITY, 0.0);
    for step in -299..=299 {
        let kappa = step as f64 / 100.0;
        let ys: Vec<f64> = values.iter().map(|&v| boxcox(v, kappa).unwrap()).collect();
        let mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        if var <= 0.0 {
            continue;
        }
        let ll = -0.5 * n * var.ln() + (kappa - 1.0) * log_sum;
        if ll > best.0 {
            best = (ll, kappa);
        }
    }
    if best.0.is_finite() {
        Ok(best.1)
    } else {
        Err(Error::Estimation("profile likelihood degenerate on the grid".into()))
    }
}
