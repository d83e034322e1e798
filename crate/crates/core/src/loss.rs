//! Loss functions and Monte Carlo risk comparison of the ML and Bayes
//! estimators.
//!
//! The matrix loss is the entropy (Stein) loss
//! `L(B, Bhat) = tr(Bhat B^-1) - log|Bhat B^-1| - p`, nonnegative and zero
//! only at `Bhat = B`. The estimator risk averages this loss with the
//! *estimate* in the reference slot, i.e. `tr(B Bhat^-1) - log|B Bhat^-1| -
//! p` per replication: that is the direction under which the posterior mean
//! is the Bayes-optimal matrix estimate, and the one the closed-form
//! dominance statements refer to. Both the Monte Carlo gap and the printed
//! closed forms appear side by side in the reports so any discrepancy
//! between them stays visible.

use serde::{Deserialize, Serialize};

use crate::dist::{mvn_sample, wishart_sample, SpdMatrix, WishartParams};
use crate::error::{Error, Result};
use crate::estimation::{
    bayes_estimate, ml_estimate, sufficient_stats, Method, ModelParams, SufficientStats,
};
use crate::interval::{matrix_rows, InternalRep};
use crate::linalg::kahan_sum;
use crate::parallel;
use crate::rng::RngStream;

/// Squared Euclidean distance between a vector and its estimate.
pub fn l2_loss(mu: &nalgebra::DVector<f64>, mu_hat: &nalgebra::DVector<f64>) -> Result<f64> {
    if mu.len() != mu_hat.len() {
        return Err(Error::Dimension(format!(
            "vector lengths differ: {} vs {}",
            mu.len(),
            mu_hat.len()
        )));
    }
    Ok((mu - mu_hat).norm_squared())
}

/// Entropy (Stein) loss `tr(Bhat B^-1) - log|Bhat B^-1| - p`.
///
/// Uses triangular solves and factor log-determinants; no explicit inverse.
pub fn entropy_loss(b_true: &SpdMatrix, b_hat: &SpdMatrix) -> Result<f64> {
    let p = b_true.dim();
    if b_hat.dim() != p {
        return Err(Error::Dimension("loss arguments differ in dimension".into()));
    }
    let trace = b_true.inv_trace_product(b_hat.matrix());
    let logdet_ratio = b_hat.logdet() - b_true.logdet();
    Ok(trace - logdet_ratio - p as f64)
}

/// Which matrix parameter a risk report concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixParam {
    Sigma,
    Lambda,
}

impl MatrixParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixParam::Sigma => "Sigma",
            MatrixParam::Lambda => "Lambda",
        }
    }
}

/// Configuration echoed into every risk report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskConfig {
    pub n: usize,
    pub p: usize,
    pub m: f64,
    pub truth_mu: Vec<f64>,
    pub truth_sigma: Vec<Vec<f64>>,
    pub truth_lambda: Vec<Vec<f64>>,
    pub seed: u64,
    pub stream: u64,
}

impl RiskConfig {
    fn new(truth: &ModelParams, n: usize, rng: &RngStream) -> Self {
        RiskConfig {
            n,
            p: truth.p(),
            m: truth.m(),
            truth_mu: truth.mu().iter().copied().collect(),
            truth_sigma: matrix_rows(truth.sigma().matrix()),
            truth_lambda: matrix_rows(truth.lambda().matrix()),
            seed: rng.seed(),
            stream: rng.stream_id(),
        }
    }
}

/// Monte Carlo estimate of one estimator's risk for one matrix parameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskReport {
    pub estimator: String,
    pub parameter: MatrixParam,
    pub risk: f64,
    pub mc_se: f64,
    pub replications: usize,
    pub config: RiskConfig,
}

fn simulate_reps(truth: &ModelParams, n: usize, rng: &mut RngStream) -> Vec<InternalRep> {
    let params = WishartParams::new(truth.m(), truth.lambda().clone())
        .expect("ModelParams enforces m >= p");
    (0..n)
        .map(|_| {
            let theta1 = mvn_sample(truth.mu(), truth.sigma(), rng);
            let theta2 = wishart_sample(&params, rng);
            InternalRep::new(theta1, theta2.matrix().clone()).expect("simulated rep is valid")
        })
        .collect()
}

/// Per-replication risk contribution (estimate in the reference slot).
fn loss_of(
    stats: &SufficientStats,
    method: Method,
    parameter: MatrixParam,
    truth: &ModelParams,
) -> Result<f64> {
    let est = match method {
        Method::Ml => ml_estimate(stats, truth.m())?,
        Method::Bayes => bayes_estimate(stats, truth.m())?,
    };
    let hat_matrix = match parameter {
        MatrixParam::Sigma => &est.sigma_hat,
        MatrixParam::Lambda => &est.lambda_hat,
    };
    let hat = SpdMatrix::new(hat_matrix.clone()).map_err(|e| {
        Error::Estimation(format!(
            "{} estimate of {} is singular in a replication: {e}",
            method.as_str(),
            parameter.as_str()
        ))
    })?;
    let truth_matrix = match parameter {
        MatrixParam::Sigma => truth.sigma(),
        MatrixParam::Lambda => truth.lambda(),
    };
    entropy_loss(&hat, truth_matrix)
}

/// Mean and standard error of a slice, Kahan-compensated in index order.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = kahan_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let sd = (ss / (n - 1.0)).sqrt();
    (mean, sd / n.sqrt())
}

/// Estimates `E[loss]` for one estimator and parameter over `reps`
/// independent synthetic datasets drawn from the model.
pub fn mc_risk(
    estimator: Method,
    parameter: MatrixParam,
    truth: &ModelParams,
    n: usize,
    reps: usize,
    rng: &RngStream,
) -> Result<RiskReport> {
    if reps < 2 {
        return Err(Error::Domain("risk estimation needs at least 2 replications".into()));
    }
    check_preconditions(estimator, truth, n)?;
    let losses: Vec<Result<f64>> = parallel::map_indexed(reps, None, |r| {
        let mut stream = rng.derive(r as u64);
        let reps_data = simulate_reps(truth, n, &mut stream);
        let stats = sufficient_stats(&reps_data)?;
        loss_of(&stats, estimator, parameter, truth)
    });
    let losses: Vec<f64> = losses
        .into_iter()
        .collect::<Result<Vec<f64>>>()
        .map_err(|e| Error::Estimation(format!("replication failed: {e}")))?;
    let (risk, mc_se) = mean_and_se(&losses);
    Ok(RiskReport {
        estimator: estimator.as_str().to_string(),
        parameter,
        risk,
        mc_se,
        replications: reps,
        config: RiskConfig::new(truth, n, rng),
    })
}

fn check_preconditions(estimator: Method, truth: &ModelParams, n: usize) -> Result<()> {
    if estimator == Method::Bayes {
        let (nf, pf, m) = (n as f64, truth.p() as f64, truth.m());
        if nf <= pf {
            return Err(Error::Estimation(format!(
                "Bayes covariance risk needs n > p (n = {n}, p = {pf})"
            )));
        }
        if nf * m <= pf + 1.0 {
            return Err(Error::Estimation("Bayes scale risk needs n*m > p + 1".into()));
        }
    }
    Ok(())
}

/// Closed-form risk-difference expressions reported alongside the Monte
/// Carlo gap: `log(n / (n-1))` for the covariance and `n m / (n m - p - 1)`
/// for the scale.
pub fn risk_gap_closed_form(n: usize, m: f64, p: usize) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Domain("closed-form gap needs n >= 2".into()));
    }
    let (nf, pf) = (n as f64, p as f64);
    if nf * m <= pf + 1.0 {
        return Err(Error::Domain("closed-form gap needs n*m > p + 1".into()));
    }
    Ok(((nf / (nf - 1.0)).ln(), nf * m / (nf * m - pf - 1.0)))
}

/// Paired mean difference with its Monte Carlo standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapStat {
    pub mean: f64,
    pub mc_se: f64,
}

/// Side-by-side risk comparison of both estimators for both matrix
/// parameters, computed on shared synthetic data so the gaps are paired.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskComparison {
    pub reports: Vec<RiskReport>,
    /// ML risk minus Bayes risk for Sigma (positive favors Bayes).
    pub sigma_gap: GapStat,
    /// ML risk minus Bayes risk for Lambda.
    pub lambda_gap: GapStat,
    /// Closed-form expressions reported for comparison.
    pub closed_form_delta_sigma: f64,
    pub closed_form_delta_lambda: f64,
    pub config: RiskConfig,
}

/// Runs the full four-way comparison at once.
pub fn risk_comparison(
    truth: &ModelParams,
    n: usize,
    reps: usize,
    rng: &RngStream,
) -> Result<RiskComparison> {
    if reps < 2 {
        return Err(Error::Domain("risk estimation needs at least 2 replications".into()));
    }
    check_preconditions(Method::Bayes, truth, n)?;
    let per_rep: Vec<Result<[f64; 4]>> = parallel::map_indexed(reps, None, |r| {
        let mut stream = rng.derive(r as u64);
        let reps_data = simulate_reps(truth, n, &mut stream);
        let stats = sufficient_stats(&reps_data)?;
        Ok([
            loss_of(&stats, Method::Ml, MatrixParam::Sigma, truth)?,
            loss_of(&stats, Method::Bayes, MatrixParam::Sigma, truth)?,
            loss_of(&stats, Method::Ml, MatrixParam::Lambda, truth)?,
            loss_of(&stats, Method::Bayes, MatrixParam::Lambda, truth)?,
        ])
    });
    let per_rep: Vec<[f64; 4]> = per_rep
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Estimation(format!("replication failed: {e}")))?;

    let column = |k: usize| -> Vec<f64> { per_rep.iter().map(|row| row[k]).collect() };
    let config = RiskConfig::new(truth, n, rng);
    let mut reports = Vec::with_capacity(4);
    for (k, (estimator, parameter)) in [
        (Method::Ml, MatrixParam::Sigma),
        (Method::Bayes, MatrixParam::Sigma),
        (Method::Ml, MatrixParam::Lambda),
        (Method::Bayes, MatrixParam::Lambda),
    ]
    .iter()
    .enumerate()
    {
        let (risk, mc_se) = mean_and_se(&column(k));
        reports.push(RiskReport {
            estimator: estimator.as_str().to_string(),
            parameter: *parameter,
            risk,
            mc_se,
            replications: reps,
            config: config.clone(),
        });
    }
    let sigma_diffs: Vec<f64> = per_rep.iter().map(|row| row[0] - row[1]).collect();
    let lambda_diffs: Vec<f64> = per_rep.iter().map(|row| row[2] - row[3]).collect();
    let (sg, sg_se) = mean_and_se(&sigma_diffs);
    let (lg, lg_se) = mean_and_se(&lambda_diffs);
    let (ds, dl) = risk_gap_closed_form(n, truth.m(), truth.p())?;
    Ok(RiskComparison {
        reports,
        sigma_gap: GapStat { mean: sg, mc_se: sg_se },
        lambda_gap: GapStat { mean: lg, mc_se: lg_se },
        closed_form_delta_sigma: ds,
        closed_form_delta_lambda: dl,
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario_preset;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn spd(rows: &[Vec<f64>]) -> SpdMatrix {
        SpdMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn l2_loss_examples() {
        let a = DVector::from_vec(vec![1.0, 2.0]);
        assert_relative_eq!(l2_loss(&a, &a).unwrap(), 0.0);
        let zero = DVector::from_vec(vec![0.0, 0.0]);
        let b = DVector::from_vec(vec![3.0, 4.0]);
        assert_relative_eq!(l2_loss(&zero, &b).unwrap(), 25.0);
        // Invariance under a simultaneous permutation.
        let a_perm = DVector::from_vec(vec![2.0, 1.0]);
        let b_perm = DVector::from_vec(vec![4.0, 3.0]);
        assert_relative_eq!(l2_loss(&a, &b).unwrap(), l2_loss(&a_perm, &b_perm).unwrap());
        let short = DVector::from_vec(vec![1.0]);
        assert!(l2_loss(&a, &short).is_err());
    }

    #[test]
    fn entropy_loss_examples() {
        let b = spd(&[vec![2.0, 0.3], vec![0.3, 1.0]]);
        assert_relative_eq!(entropy_loss(&b, &b).unwrap(), 0.0, epsilon = 1e-12);
        // p = 1, B = 1, Bhat = 2: 2 - log 2 - 1.
        let one = SpdMatrix::scalar(1.0).unwrap();
        let two = SpdMatrix::scalar(2.0).unwrap();
        assert_relative_eq!(
            entropy_loss(&one, &two).unwrap(),
            1.0 - std::f64::consts::LN_2,
            epsilon = 1e-12
        );
        assert_relative_eq!(entropy_loss(&one, &two).unwrap(), 0.306853, epsilon = 1e-6);
        // Scaling identity: loss(B, cB) = p (c - log c - 1).
        for &c in &[0.5, 2.0, 3.7] {
            let scaled = b.scale(c).unwrap();
            assert_relative_eq!(
                entropy_loss(&b, &scaled).unwrap(),
                2.0 * (c - c.ln() - 1.0),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn entropy_loss_congruence_invariance() {
        let b = spd(&[vec![2.0, 0.3], vec![0.3, 1.0]]);
        let bh = spd(&[vec![1.5, -0.2], vec![-0.2, 2.5]]);
        let a = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.7, -0.3, 2.0]);
        let tb =
            SpdMatrix::new(crate::linalg::symmetrize(&(&a * b.matrix() * a.transpose()))).unwrap();
        let tbh =
            SpdMatrix::new(crate::linalg::symmetrize(&(&a * bh.matrix() * a.transpose()))).unwrap();
        assert_relative_eq!(
            entropy_loss(&tb, &tbh).unwrap(),
            entropy_loss(&b, &bh).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn closed_form_gap_values() {
        let (ds, dl) = risk_gap_closed_form(25, 3.0, 2).unwrap();
        assert_relative_eq!(ds, (25.0f64 / 24.0).ln(), epsilon = 1e-12);
        assert_relative_eq!(ds, 0.040822, epsilon = 1e-6);
        assert_relative_eq!(dl, 75.0 / 72.0, epsilon = 1e-12);
        // Monotone decay of delta_sigma with n.
        let mut last = f64::INFINITY;
        for n in [2usize, 5, 25, 100, 10_000] {
            let (d, _) = risk_gap_closed_form(n, 3.0, 1).unwrap();
            assert!(d < last && d > 0.0);
            last = d;
        }
        assert!(risk_gap_closed_form(1, 3.0, 1).is_err());
        assert!(risk_gap_closed_form(2, 1.0, 2).is_err()); // n*m = 2 <= p+1
    }

    #[test]
    fn mc_risk_minimal_replications() {
        let truth = scenario_preset(crate::sim::Scenario::II).unwrap();
        let rng = RngStream::new(1, 0);
        let report = mc_risk(Method::Ml, MatrixParam::Sigma, &truth, 25, 2, &rng).unwrap();
        assert!(report.risk.is_finite());
        assert!(report.mc_se.is_finite() && report.mc_se > 0.0);
        assert_eq!(report.replications, 2);
        assert!(mc_risk(Method::Ml, MatrixParam::Sigma, &truth, 25, 1, &rng).is_err());
        assert!(mc_risk(Method::Bayes, MatrixParam::Sigma, &truth, 2, 4, &rng).is_err());
    }

    #[test]
    fn mc_risk_is_reproducible_and_thread_invariant() {
        let truth = scenario_preset(crate::sim::Scenario::II).unwrap();
        let rng = RngStream::new(7, 3);
        let a = mc_risk(Method::Bayes, MatrixParam::Lambda, &truth, 25, 64, &rng).unwrap();
        std::env::set_var("INTERVAL_STATS_THREADS", "1");
        let b = mc_risk(Method::Bayes, MatrixParam::Lambda, &truth, 25, 64, &rng).unwrap();
        std::env::set_var("INTERVAL_STATS_THREADS", "3");
        let c = mc_risk(Method::Bayes, MatrixParam::Lambda, &truth, 25, 64, &rng).unwrap();
        std::env::remove_var("INTERVAL_STATS_THREADS");
        assert_eq!(a.risk.to_bits(), b.risk.to_bits());
        assert_eq!(b.risk.to_bits(), c.risk.to_bits());
        assert_eq!(b.mc_se.to_bits(), c.mc_se.to_bits());
    }

    #[test]
    fn bayes_dominates_ml_for_sigma_scenario_iii() {
        // Sign test over five independent paired runs at n = 25, p = 3.
        let truth = scenario_preset(crate::sim::Scenario::III).unwrap();
        for run in 0..5 {
            let rng = RngStream::new(1000 + run, 0);
            let cmp = risk_comparison(&truth, 25, 2000, &rng).unwrap();
            assert!(
                cmp.sigma_gap.mean > 0.0,
                "run {run}: gap {} (se {})",
                cmp.sigma_gap.mean,
                cmp.sigma_gap.mc_se
            );
        }
    }

    #[test]
    fn ml_sigma_risk_matches_chi_squared_quadrature() {
        // p = 1: the replication loss of the ML covariance reduces to
        // n/x + log x - log n - 1 with x ~ chi-squared(n - 1), independent
        // of the true variance. Integrate against the chi-squared density.
        let n = 20usize;
        let df = (n - 1) as f64;
        let log_norm = -0.5 * df * std::f64::consts::LN_2 - crate::specfun::ln_gamma(0.5 * df);
        let loss = |x: f64| n as f64 / x + x.ln() - (n as f64).ln() - 1.0;
        let integrand = |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                loss(x) * (log_norm + (0.5 * df - 1.0) * x.ln() - 0.5 * x).exp()
            }
        };
        let (lo, hi, steps) = (1e-9, 150.0, 150_001);
        let h = (hi - lo) / (steps - 1) as f64;
        let mut s = integrand(lo) + integrand(hi);
        for i in 1..steps - 1 {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(lo + i as f64 * h);
        }
        let oracle = s * h / 3.0;

        let truth = ModelParams::new(
            DVector::from_vec(vec![2.0]),
            SpdMatrix::scalar(5.0).unwrap(),
            SpdMatrix::scalar(2.0).unwrap(),
            2.0,
        )
        .unwrap();
        let report =
            mc_risk(Method::Ml, MatrixParam::Sigma, &truth, n, 4000, &RngStream::new(5, 1))
                .unwrap();
        assert!(
            (report.risk - oracle).abs() < 3.0 * report.mc_se,
            "mc {} vs quadrature {oracle} (se {})",
            report.risk,
            report.mc_se
        );
    }

    #[test]
    fn risk_report_serializes_with_config() {
        let truth = scenario_preset(crate::sim::Scenario::I).unwrap();
        let rng = RngStream::new(2, 2);
        let report = mc_risk(Method::Ml, MatrixParam::Lambda, &truth, 10, 8, &rng).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        let back: RiskReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.config.n, 10);
        assert_eq!(back.config.seed, 2);
        assert_eq!(back.estimator, "ML");
    }
}
