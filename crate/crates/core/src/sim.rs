//! Monte Carlo harness comparing the ML and Bayes estimators.
//!
//! Three preset scenarios cover dimensions one to three; `Custom` accepts
//! any [`ModelParams`]. Each replication draws `n` internal means from
//! `N_p(mu, Sigma)` and `n` internal spreads from `W_p(m, Lambda)`, applies
//! the requested estimators, and the report aggregates per-parameter means
//! and standard deviations across replications.
//!
//! Scenario I is univariate and draws its spreads from an exponential with
//! mean `lambda` (the univariate spread model), estimating `lambda` by the
//! univariate reduction `sum(theta2) / n` for both methods; the
//! general-formula Bayes value, scaled by `n m / (n m - p - 1)`, is reported
//! as an extra `lambda_general` row since the two conventions differ.
//!
//! Replication `r` always draws from the stream derived as `(seed, r)`, so
//! reports are bit-identical for a fixed configuration regardless of worker
//! count, and adding replications never perturbs earlier ones.

use std::str::FromStr;

use nalgebra::DVector;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::dist::{mvn_sample, wishart_sample, SpdMatrix, WishartParams};
use crate::error::{Error, Result};
use crate::estimation::{bayes_estimate, ml_estimate, sufficient_stats, ModelParams};
use crate::interval::InternalRep;
use crate::linalg::kahan_sum;
use crate::parallel;
use crate::rng::RngStream;

/// Simulation scenario tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    I,
    II,
    III,
    Custom,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::I => "I",
            Scenario::II => "II",
            Scenario::III => "III",
            Scenario::Custom => "custom",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Scenario::I),
            "II" | "2" => Ok(Scenario::II),
            "III" | "3" => Ok(Scenario::III),
            other => Err(Error::Domain(format!(
                "unknown scenario {other:?}: expected I, II, or III"
            ))),
        }
    }
}

/// Ground-truth parameters for the preset scenarios.
///
/// I:   p = 1, mu = 2, sigma^2 = 5, lambda = 2, m = 2
/// II:  p = 2, mu = (2, 4), Sigma = [[4, 3], [3, 9]], m = 3,
///      Lambda = [[2, 1], [1, 5]]
/// III: p = 3, mu = (2, 4, 6),
///      Sigma = [[1, 1.4, 0.6], [1.4, 4, 1.5], [0.6, 1.5, 9]], m = 3,
///      Lambda = [[2, 1, 1], [1, 5, 2], [1, 2, 3]]
pub fn scenario_preset(tag: Scenario) -> Result<ModelParams> {
    match tag {
        Scenario::I => ModelParams::new(
            DVector::from_vec(vec![2.0]),
            SpdMatrix::scalar(5.0)?,
            SpdMatrix::scalar(2.0)?,
            2.0,
        ),
        Scenario::II => ModelParams::new(
            DVector::from_vec(vec![2.0, 4.0]),
            SpdMatrix::from_rows(&[vec![4.0, 3.0], vec![3.0, 9.0]])?,
            SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 5.0]])?,
            3.0,
        ),
        Scenario::III => ModelParams::new(
            DVector::from_vec(vec![2.0, 4.0, 6.0]),
            SpdMatrix::from_rows(&[
                vec![1.0, 1.4, 0.6],
                vec![1.4, 4.0, 1.5],
                vec![0.6, 1.5, 9.0],
            ])?,
            SpdMatrix::from_rows(&[
                vec![2.0, 1.0, 1.0],
                vec![1.0, 5.0, 2.0],
                vec![1.0, 2.0, 3.0],
            ])?,
            3.0,
        ),
        Scenario::Custom => Err(Error::Domain(
            "custom scenarios carry their own parameters; no preset exists".into(),
        )),
    }
}

/// Which estimators a simulation run applies.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimatorSet {
    pub ml: bool,
    pub bayes: bool,
}

impl Default for EstimatorSet {
    fn default() -> Self {
        EstimatorSet { ml: true, bayes: true }
    }
}

/// Full description of one simulation run.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    pub truth: ModelParams,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub estimators: EstimatorSet,
}

impl SimulationConfig {
    /// Preset-scenario configuration with both estimators.
    pub fn preset(scenario: Scenario, n: usize, reps: usize, seed: u64) -> Result<Self> {
        Ok(SimulationConfig {
            scenario,
            truth: scenario_preset(scenario)?,
            n,
            reps,
            seed,
            estimators: EstimatorSet::default(),
        })
    }

    /// Custom-truth configuration with both estimators.
    pub fn custom(truth: ModelParams, n: usize, reps: usize, seed: u64) -> Self {
        SimulationConfig {
            scenario: Scenario::Custom,
            truth,
            n,
            reps,
            seed,
            estimators: EstimatorSet::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Domain("need at least one replication".into()));
        }
        if self.n == 0 {
            return Err(Error::Domain("need a positive sample size".into()));
        }
        let (n, p, m) = (self.n as f64, self.truth.p() as f64, self.truth.m());
        if self.estimators.bayes && (n <= p || n * m <= p + 1.0) {
            return Err(Error::Domain(format!(
                "Bayes estimators need n > p and n*m > p + 1 (n = {n}, p = {p}, m = {m})"
            )));
        }
        if !self.estimators.ml && !self.estimators.bayes {
            return Err(Error::Domain("no estimator requested".into()));
        }
        Ok(())
    }
}

/// One aggregated row of the simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub parameter: String,
    pub estimator: String,
    pub mean: f64,
    /// Absent when a single replication leaves the spread undefined.
    pub sd: Option<f64>,
}

/// Aggregated simulation results in table shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub m: f64,
    pub sd_defined: bool,
    pub rows: Vec<ReportRow>,
}

/// Parameter labels in report order for dimension `p`: means, variances,
/// covariances (upper triangle by rows), then scale entries (upper triangle
/// by rows).
fn parameter_names(p: usize) -> (Vec<String>, Vec<String>) {
    if p == 1 {
        return (
            vec!["mu".into(), "sigma2".into()],
            vec!["lambda".into()],
        );
    }
    let mut normal_side: Vec<String> = (1..=p).map(|j| format!("mu_{j}")).collect();
    normal_side.extend((1..=p).map(|j| format!("sigma2_{j}")));
    for j in 1..=p {
        for k in (j + 1)..=p {
            normal_side.push(format!("sigma_{j}{k}"));
        }
    }
    let mut lambda_side = Vec::new();
    for j in 1..=p {
        for k in j..=p {
            lambda_side.push(format!("lambda_{j}{k}"));
        }
    }
    (normal_side, lambda_side)
}

/// Extracts the report-ordered values from estimate matrices.
fn extract_values(
    mu: &DVector<f64>,
    sigma: &nalgebra::DMatrix<f64>,
    lambda: &nalgebra::DMatrix<f64>,
) -> Vec<f64> {
    let p = mu.len();
    if p == 1 {
        return vec![mu[0], sigma[(0, 0)], lambda[(0, 0)]];
    }
    let mut v: Vec<f64> = mu.iter().copied().collect();
    v.extend((0..p).map(|j| sigma[(j, j)]));
    for j in 0..p {
        for k in (j + 1)..p {
            v.push(sigma[(j, k)]);
        }
    }
    for j in 0..p {
        for k in j..p {
            v.push(lambda[(j, k)]);
        }
    }
    v
}

/// Runs the simulation described by `config`.
pub fn run_scenario(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let truth = &config.truth;
    let p = truth.p();
    let m = truth.m();
    let n = config.n;
    let univariate_exponential = config.scenario == Scenario::I;
    let root = RngStream::new(config.seed, 0);

    // Per replication: one value vector per estimator, in parameter order.
    let per_rep: Vec<Result<Vec<Vec<f64>>>> = parallel::map_indexed(config.reps, None, |r| {
        let mut rng = root.derive(r as u64);
        let wishart = if univariate_exponential {
            None
        } else {
            Some(WishartParams::new(m, truth.lambda().clone())?)
        };
        let exponential = if univariate_exponential {
            // Mean-lambda exponential: rate 1 / lambda.
            Some(Exp::new(1.0 / truth.lambda().matrix()[(0, 0)]).expect("positive rate"))
        } else {
            None
        };
        let reps_data: Vec<InternalRep> = (0..n)
            .map(|_| {
                let theta1 = mvn_sample(truth.mu(), truth.sigma(), &mut rng);
                let theta2 = match (&wishart, &exponential) {
                    (Some(w), _) => wishart_sample(w, &mut rng).matrix().clone(),
                    (None, Some(e)) => {
                        nalgebra::DMatrix::from_element(1, 1, e.sample(&mut rng))
                    }
                    _ => unreachable!(),
                };
                InternalRep::new(theta1, theta2).expect("simulated rep is valid")
            })
            .collect();
        let stats = sufficient_stats(&reps_data)?;

        let mut out = Vec::new();
        if config.estimators.ml {
            let est = ml_estimate(&stats, m)?;
            let mut values = if univariate_exponential {
                // Univariate reduction: lambda_hat = sum(theta2) / n.
                vec![
                    est.mu_hat[0],
                    est.sigma_hat[(0, 0)],
                    stats.theta2_sum()[(0, 0)] / n as f64,
                ]
            } else {
                extract_values(&est.mu_hat, &est.sigma_hat, &est.lambda_hat)
            };
            if univariate_exponential {
                values.push(f64::NAN); // no general-formula ML row
            }
            out.push(values);
        }
        if config.estimators.bayes {
            let est = bayes_estimate(&stats, m)?;
            let values = if univariate_exponential {
                let reduction = stats.theta2_sum()[(0, 0)] / n as f64;
                let general = reduction * (n as f64 * m) / (n as f64 * m - 2.0);
                vec![est.mu_hat[0], est.sigma_hat[(0, 0)], reduction, general]
            } else {
                extract_values(&est.mu_hat, &est.sigma_hat, &est.lambda_hat)
            };
            out.push(values);
        }
        Ok(out)
    });
    let per_rep: Vec<Vec<Vec<f64>>> = per_rep.into_iter().collect::<Result<Vec<_>>>()?;

    let (normal_names, lambda_names) = parameter_names(p);
    let mut names: Vec<String> = normal_names;
    names.extend(lambda_names);
    if univariate_exponential {
        names.push("lambda_general".into());
    }

    let mut estimators = Vec::new();
    if config.estimators.ml {
        estimators.push("ML");
    }
    if config.estimators.bayes {
        estimators.push("Bayes");
    }

    let mut rows = Vec::new();
    for (param_idx, name) in names.iter().enumerate() {
        for (est_idx, est_name) in estimators.iter().enumerate() {
            let values: Vec<f64> = per_rep.iter().map(|rep| rep[est_idx][param_idx]).collect();
            if values.iter().any(|v| v.is_nan()) {
                continue; // row not defined for this estimator
            }
            let count = values.len() as f64;
            let mean = kahan_sum(values.iter().copied()) / count;
            let sd = if values.len() > 1 {
                Some(
                    (kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)))
                        / (count - 1.0))
                        .sqrt(),
                )
            } else {
                None
            };
            rows.push(ReportRow {
                parameter: name.clone(),
                estimator: est_name.to_string(),
                mean,
                sd,
            });
        }
    }

    Ok(SimulationReport {
        scenario: config.scenario.as_str().to_string(),
        n,
        reps: config.reps,
        seed: config.seed,
        m,
        sd_defined: config.reps > 1,
        rows,
    })
}

/// Output format for [`emit_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Json,
    Csv,
    Text,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(TableFormat::Json),
            "csv" => Ok(TableFormat::Csv),
            "text" => Ok(TableFormat::Text),
            other => Err(Error::Domain(format!(
                "unknown format {other:?}: expected json, csv, or text"
            ))),
        }
    }
}

/// Serializes a report. Column order is fixed as
/// (parameter, estimator, mean, sd).
pub fn emit_table(report: &SimulationReport, format: TableFormat) -> Result<String> {
    match format {
        TableFormat::Json => serde_json::to_string_pretty(report)
            .map_err(|e| Error::Domain(format!("serialization failed: {e}"))),
        TableFormat::Csv => {
            let mut out = String::from("parameter,estimator,mean,sd\n");
            for row in &report.rows {
                let sd = row.sd.map_or(String::new(), |s| s.to_string());
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    row.parameter, row.estimator, row.mean, sd
                ));
            }
            Ok(out)
        }
        TableFormat::Text => {
            let mut out = format!(
                "Scenario {} (n = {}, reps = {}, seed = {}, m = {})\n",
                report.scenario, report.n, report.reps, report.seed, report.m
            );
            out.push_str(&format!(
                "{:<16}{:<28}{:<28}\n",
                "parameter", "MLE", "Bayesian"
            ));
            let mut seen = Vec::new();
            for row in &report.rows {
                if !seen.contains(&row.parameter) {
                    seen.push(row.parameter.clone());
                }
            }
            for param in seen {
                let cell = |est: &str| {
                    report
                        .rows
                        .iter()
                        .find(|r| r.parameter == param && r.estimator == est)
                        .map_or_else(
                            || format!("{:<28}", "-"),
                            |r| {
                                let sd = r
                                    .sd
                                    .map_or("n/a".to_string(), |s| format!("{s:.6}"));
                                format!("{:<28}", format!("{:.6} (SD: {sd})", r.mean))
                            },
                        )
                };
                out.push_str(&format!("{param:<16}{}{}\n", cell("ML"), cell("Bayes")));
            }
            Ok(out)
        }
    }
}
