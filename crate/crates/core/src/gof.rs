//! Distributional assumption checks for the interval-valued model.
//!
//! Mardia's multivariate skewness and kurtosis tests probe the normality of
//! the internal means. The Wishart goodness-of-fit checks compare the
//! half-vectorized observed spread matrices against matrices simulated from
//! the fitted Wishart, coordinate by coordinate, with a pooled
//! equiprobable-bin chi-squared homogeneity statistic; a bootstrap variant
//! ranks the observed statistic among statistics recomputed on resampled
//! data.
//!
//! Every p-value is deterministic given the data and the `(seed, stream)`
//! address of the supplied generator.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::parallel;
use crate::rng::RngStream;
use crate::specfun::{chi2_sf, std_normal_sf};

/// Outcome of one test, with enough configuration echoed for exact replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofResult {
    /// `mardia-skew`, `mardia-kurt`, `wishart-gof`, or `wishart-gof-boot`.
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    /// Reference-distribution degrees of freedom, when one applies.
    pub df: Option<f64>,
    pub wishart_df: Option<f64>,
    pub bootstrap: Option<usize>,
    pub bins: Option<usize>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    /// Coordinates dropped for zero pooled spread.
    pub skipped_coordinates: Option<usize>,
}

/// Mardia's multivariate normality tests.
///
/// Skewness: `n b_1p / 6` against chi-squared with `p(p+1)(p+2)/6` degrees
/// of freedom. Kurtosis: normal z-score of `b_2p` around `p(p+2)`, two
/// sided. Both use the maximum-likelihood covariance (divisor `n`).
pub fn mardia_test(theta1s: &[DVector<f64>]) -> Result<(GofResult, GofResult)> {
    let n = theta1s.len();
    if n == 0 {
        return Err(Error::Domain("empty sample".into()));
    }
    let p = theta1s[0].len();
    if theta1s.iter().any(|x| x.len() != p) {
        return Err(Error::Dimension("vectors have mixed lengths".into()));
    }
    if n <= p {
        return Err(Error::Domain(format!(
            "Mardia's test needs n > p (n = {n}, p = {p})"
        )));
    }
    let nf = n as f64;
    let pf = p as f64;

    let mut mean = DVector::<f64>::zeros(p);
    for x in theta1s {
        mean += x;
    }
    mean /= nf;
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for x in theta1s {
        let d = x - &mean;
        cov += &d * d.transpose();
    }
    cov /= nf;
    let chol = linalg::cholesky_lower(&linalg::symmetrize(&cov))
        .map_err(|e| Error::Estimation(format!("singular sample covariance: {e}")))?;

    // Whitened scores make the skewness a p^3 tensor sum instead of an
    // n^2 double loop.
    let whitened: Vec<DVector<f64>> = theta1s
        .iter()
        .map(|x| linalg::solve_lower(&chol, &(x - &mean)))
        .collect();
    let mut b1 = 0.0;
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                let t: f64 = whitened.iter().map(|y| y[a] * y[b] * y[c]).sum();
                b1 += t * t;
            }
        }
    }
    b1 /= nf * nf;
    let skew_stat = nf * b1 / 6.0;
    let skew_df = pf * (pf + 1.0) * (pf + 2.0) / 6.0;
    let skew = GofResult {
        method: "mardia-skew".into(),
        statistic: skew_stat,
        p_value: chi2_sf(skew_stat, skew_df),
        df: Some(skew_df),
        wishart_df: None,
        bootstrap: None,
        bins: None,
        seed: None,
        stream: None,
        skipped_coordinates: None,
    };

    let b2: f64 = whitened.iter().map(|y| y.norm_squared().powi(2)).sum::<f64>() / nf;
    let z = (b2 - pf * (pf + 2.0)) * (nf / (8.0 * pf * (pf + 2.0))).sqrt();
    let kurt = GofResult {
        method: "mardia-kurt".into(),
        statistic: z,
        p_value: (2.0 * std_normal_sf(z.abs())).min(1.0),
        df: None,
        wishart_df: None,
        bootstrap: None,
        bins: None,
        seed: None,
        stream: None,
        skipped_coordinates: None,
    };
    Ok((skew, kurt))
}

/// Two-sample chi-squared homogeneity test on equiprobable pooled-quantile
/// bins. Ties at a bin edge fall toward the lower bin, deterministically.
///
/// Returns `(statistic, degrees of freedom, p-value)`.
pub fn chisq_two_sample(sample_a: &[f64], sample_b: &[f64], bins: usize) -> Result<(f64, f64, f64)> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::Domain("both samples must be nonempty".into()));
    }
    if bins < 2 {
        return Err(Error::Domain("need at least 2 bins".into()));
    }
    let mut pooled: Vec<f64> = sample_a.iter().chain(sample_b.iter()).copied().collect();
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("samples must be finite".into()));
    }
    pooled.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    let total = pooled.len();
    if pooled[0] == pooled[total - 1] {
        return Err(Error::Domain("degenerate pooled sample: all values equal".into()));
    }
    let edges: Vec<f64> = (1..bins)
        .map(|t| pooled[(t * total).div_ceil(bins) - 1])
        .collect();
    let bin_of = |v: f64| edges.iter().filter(|&&e| v > e).count();

    let mut count_a = vec![0usize; bins];
    let mut count_b = vec![0usize; bins];
    for &v in sample_a {
        count_a[bin_of(v)] += 1;
    }
    for &v in sample_b {
        count_b[bin_of(v)] += 1;
    }

    let (na, nb, nt) = (sample_a.len() as f64, sample_b.len() as f64, total as f64);
    let mut stat = 0.0;
    let mut nonempty = 0usize;
    for k in 0..bins {
        let col = (count_a[k] + count_b[k]) as f64;
        if col == 0.0 {
            continue;
        }
        nonempty += 1;
        let ea = na * col / nt;
        let eb = nb * col / nt;
        stat += (count_a[k] as f64 - ea).powi(2) / ea + (count_b[k] as f64 - eb).powi(2) / eb;
    }
    if nonempty < 2 {
        return Err(Error::Domain("degenerate binning: one occupied bin".into()));
    }
    let df = (nonempty - 1) as f64;
    Ok((stat, df, chi2_sf(stat, df)))
}

/// Lower-triangle half-vectorization in column order.
fn vech(m: &DMatrix<f64>) -> Vec<f64> {
    let p = m.nrows();
    let mut v = Vec::with_capacity(p * (p + 1) / 2);
    for j in 0..p {
        for i in j..p {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Summed per-coordinate chi-squared statistic between two vech samples.
/// Returns `(statistic, df, skipped coordinate count)`.
fn wishart_gof_statistic(
    observed: &[Vec<f64>],
    simulated: &[Vec<f64>],
    bins: usize,
) -> Result<(f64, f64, usize)> {
    let coords = observed[0].len();
    let mut stat = 0.0;
    let mut df = 0.0;
    let mut skipped = 0usize;
    for c in 0..coords {
        let a: Vec<f64> = observed.iter().map(|v| v[c]).collect();
        let b: Vec<f64> = simulated.iter().map(|v| v[c]).collect();
        let lo = a.iter().chain(&b).cloned().fold(f64::INFINITY, f64::min);
        let hi = a.iter().chain(&b).cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            skipped += 1;
            continue;
        }
        let (s, d, _) = chisq_two_sample(&a, &b, bins)?;
        stat += s;
        df += d;
    }
    if df == 0.0 {
        return Err(Error::Domain("all coordinates degenerate".into()));
    }
    Ok((stat, df, skipped))
}

fn default_bins(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(2)
}

fn validate_gof_inputs(
    observed: &[DMatrix<f64>],
    df: f64,
    lambda_hat: &crate::dist::SpdMatrix,
) -> Result<usize> {
    let n = observed.len();
    if n < 5 {
        return Err(Error::Domain(format!(
            "insufficient observations for the goodness-of-fit test (n = {n} < 5)"
        )));
    }
    let p = lambda_hat.dim();
    for (i, o) in observed.iter().enumerate() {
        if o.nrows() != p || o.ncols() != p {
            return Err(Error::Dimension(format!(
                "observed matrix {} is {}x{}, expected {p}x{p}",
                i + 1,
                o.nrows(),
                o.ncols()
            )));
        }
    }
    if df < p as f64 {
        return Err(Error::Domain(format!(
            "Wishart degrees of freedom {df} below dimension {p}"
        )));
    }
    Ok(p)
}

fn simulate_vechs(
    n: usize,
    df: f64,
    lambda_hat: &crate::dist::SpdMatrix,
    rng: &mut RngStream,
) -> Result<Vec<Vec<f64>>> {
    let params = crate::dist::WishartParams::new(df, lambda_hat.clone())?;
    Ok((0..n)
        .map(|_| vech(crate::dist::wishart_sample(&params, rng).matrix()))
        .collect())
}

/// Wishart goodness-of-fit: simulates `n` matrices from `W_p(df,
/// lambda_hat)`, half-vectorizes observed and simulated draws, and sums the
/// per-coordinate two-sample chi-squared statistics; the p-value comes from
/// the chi-squared distribution with the summed degrees of freedom.
///
/// `bins = None` uses `max(2, floor(sqrt(n)))` equiprobable bins.
pub fn gof_wishart(
    observed: &[DMatrix<f64>],
    df: f64,
    lambda_hat: &crate::dist::SpdMatrix,
    rng: &RngStream,
    bins: Option<usize>,
) -> Result<GofResult> {
    validate_gof_inputs(observed, df, lambda_hat)?;
    let n = observed.len();
    let k = bins.unwrap_or_else(|| default_bins(n));
    if k < 2 {
        return Err(Error::Domain("need at least 2 bins".into()));
    }
    let observed_vechs: Vec<Vec<f64>> = observed.iter().map(vech).collect();
    let mut sim_rng = rng.derive(0);
    let simulated = simulate_vechs(n, df, lambda_hat, &mut sim_rng)?;
    let (stat, total_df, skipped) = wishart_gof_statistic(&observed_vechs, &simulated, k)?;
    Ok(GofResult {
        method: "wishart-gof".into(),
        statistic: stat,
        p_value: chi2_sf(stat, total_df),
        df: Some(total_df),
        wishart_df: Some(df),
        bootstrap: None,
        bins: Some(k),
        seed: Some(rng.seed()),
        stream: Some(rng.stream_id()),
        skipped_coordinates: Some(skipped),
    })
}

/// Bootstrap variant: the observed statistic is ranked among `b_iters`
/// statistics recomputed on resampled observed matrices against fresh
/// simulations; the p-value is `(1 + #{T_b >= T_obs}) / (B + 1)`.
pub fn gof_wishart_bootstrap(
    observed: &[DMatrix<f64>],
    df: f64,
    lambda_hat: &crate::dist::SpdMatrix,
    b_iters: usize,
    rng: &RngStream,
    bins: Option<usize>,
) -> Result<GofResult> {
    validate_gof_inputs(observed, df, lambda_hat)?;
    if b_iters < 20 {
        return Err(Error::Domain(format!(
            "bootstrap needs at least 20 iterations, got {b_iters}"
        )));
    }
    let n = observed.len();
    let k = bins.unwrap_or_else(|| default_bins(n));
    if k < 2 {
        return Err(Error::Domain("need at least 2 bins".into()));
    }
    let observed_vechs: Vec<Vec<f64>> = observed.iter().map(vech).collect();

    let mut obs_rng = rng.derive(0);
    let simulated = simulate_vechs(n, df, lambda_hat, &mut obs_rng)?;
    let (t_obs, total_df, skipped) = wishart_gof_statistic(&observed_vechs, &simulated, k)?;

    let t_boot: Vec<Result<f64>> = parallel::map_indexed(b_iters, None, |b| {
        let mut brng = rng.derive(1 + b as u64);
        let resampled: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let idx = rand::RngExt::random_range(&mut brng, 0..n);
                observed_vechs[idx].clone()
            })
            .collect();
        let fresh = simulate_vechs(n, df, lambda_hat, &mut brng)?;
        Ok(wishart_gof_statistic(&resampled, &fresh, k)?.0)
    });
    let t_boot: Vec<f64> = t_boot.into_iter().collect::<Result<Vec<_>>>()?;
    let exceeding = t_boot.iter().filter(|&&t| t >= t_obs).count();
    let p_value = (1 + exceeding) as f64 / (b_iters + 1) as f64;

    Ok(GofResult {
        method: "wishart-gof-boot".into(),
        statistic: t_obs,
        p_value,
        df: Some(total_df),
        wishart_df: Some(df),
        bootstrap: Some(b_iters),
        bins: Some(k),
        seed: Some(rng.seed()),
        stream: Some(rng.stream_id()),
        skipped_coordinates: Some(skipped),
    })
}
