//! Python bindings for the interval-valued inference library.
//!
//! The module mirrors the CLI surface: dataset ingestion and descriptive
//! statistics, ML/Bayes estimation, normality and Wishart goodness-of-fit
//! checks, the Monte Carlo simulation harness, and the entropy-loss risk
//! comparison. Reports come back as plain dicts/lists matching the JSON the
//! CLI prints.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList, PyModule};
use pyo3::IntoPyObjectExt;

use interval_stats_core::dist::SpdMatrix;
use interval_stats_core::estimation::{
    asymptotic_ci, bayes_estimate, boxcox, boxcox_optimal_kappa, ml_estimate, power_transform,
    sufficient_stats,
};
use interval_stats_core::gof::{gof_wishart, gof_wishart_bootstrap, mardia_test};
use interval_stats_core::interval::{
    describe_cov, describe_mean_var, matrix_rows, parse_dataset, serialize_dataset,
    IntervalDataset,
};
use interval_stats_core::loss::{entropy_loss as entropy_loss_impl, risk_comparison};
use interval_stats_core::sim::{
    emit_table, run_scenario, scenario_preset, Scenario, SimulationConfig, TableFormat,
};
use interval_stats_core::{datasets, Error, RngStream};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Domain(_) | Error::Dimension(_) => {
            PyValueError::new_err(e.to_string())
        }
        Error::NotPositiveDefinite(_) | Error::Estimation(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
    }
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    match value {
        serde_json::Value::Null => Ok(py.None()),
        serde_json::Value::Bool(b) => b.into_py_any(py),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        serde_json::Value::String(s) => s.into_py_any(py),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn parse_scenario(tag: &str) -> PyResult<Scenario> {
    tag.parse::<Scenario>().map_err(to_py_err)
}

/// An interval-valued dataset: `n` observations of `p` closed intervals.
#[pyclass(module = "interval_stats")]
struct Dataset {
    inner: IntervalDataset,
}

#[pymethods]
impl Dataset {
    /// Parses CSV text with header `a_1,b_1,...,a_p,b_p`.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Dataset { inner: parse_dataset(text).map_err(to_py_err)? })
    }

    /// Reads and parses a CSV file.
    #[staticmethod]
    fn from_path(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("cannot read {path}: {e}")))?;
        Self::from_csv(&text)
    }

    /// Loads a bundled dataset: `medical.csv` (59 x 3) or `cars.csv` (8 x 4).
    #[staticmethod]
    fn bundled(name: &str) -> PyResult<Self> {
        let text = datasets::bundled(name)
            .ok_or_else(|| PyValueError::new_err(format!("no bundled dataset named {name}")))?;
        Self::from_csv(text)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }

    fn to_csv(&self) -> String {
        serialize_dataset(&self.inner)
    }

    /// Midpoint vectors of the internal distributions, one row per
    /// observation.
    fn internal_means(&self) -> Vec<Vec<f64>> {
        self.inner
            .internal_reps()
            .iter()
            .map(|r| r.theta1().iter().copied().collect())
            .collect()
    }

    /// Spread matrices of the internal distributions, row-major.
    fn internal_spreads(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.internal_reps().iter().map(|r| matrix_rows(r.theta2())).collect()
    }

    /// Symbolic means, variances, and pairwise covariances.
    fn describe(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let p = self.inner.p();
        let mut variables = Vec::new();
        for j in 0..p {
            let (mean, variance) = describe_mean_var(&self.inner, j).map_err(to_py_err)?;
            variables.push(serde_json::json!({
                "name": self.inner.names()[j],
                "mean": mean,
                "variance": variance,
            }));
        }
        let mut covariances = Vec::new();
        for j in 0..p {
            for k in (j + 1)..p {
                covariances.push(serde_json::json!({
                    "var_a": self.inner.names()[j],
                    "var_b": self.inner.names()[k],
                    "covariance": describe_cov(&self.inner, j, k).map_err(to_py_err)?,
                }));
            }
        }
        json_to_py(
            py,
            &serde_json::json!({
                "n": self.inner.n(),
                "p": p,
                "variables": variables,
                "covariances": covariances,
            }),
        )
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, p={})", self.inner.n(), self.inner.p())
    }
}

/// ML and/or Bayes estimates of (mu, Sigma, Lambda).
///
/// `method` is `"ml"`, `"bayes"`, or `"both"`; `ci` optionally adds Wald
/// intervals at the given level for the mean and covariance parameters.
#[pyfunction]
#[pyo3(signature = (dataset, wishart_df, method = "both", ci = None))]
fn estimate(
    py: Python<'_>,
    dataset: &Dataset,
    wishart_df: f64,
    method: &str,
    ci: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let stats = sufficient_stats(&dataset.inner.internal_reps()).map_err(to_py_err)?;
    let mut estimates = Vec::new();
    match method {
        "ml" => estimates.push(ml_estimate(&stats, wishart_df).map_err(to_py_err)?),
        "bayes" => estimates.push(bayes_estimate(&stats, wishart_df).map_err(to_py_err)?),
        "both" => {
            estimates.push(ml_estimate(&stats, wishart_df).map_err(to_py_err)?);
            estimates.push(bayes_estimate(&stats, wishart_df).map_err(to_py_err)?);
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "method must be ml, bayes, or both, got {other:?}"
            )))
        }
    }
    let mut rendered = Vec::new();
    for est in &estimates {
        let mut value = est.to_json();
        if let Some(level) = ci {
            let intervals = asymptotic_ci(est, &stats, level).map_err(to_py_err)?;
            value["confidence_intervals"] = serde_json::json!(intervals
                .iter()
                .map(|iv| serde_json::json!({
                    "parameter": iv.name,
                    "estimate": iv.estimate,
                    "lower": iv.lower,
                    "upper": iv.upper,
                    "level": level,
                }))
                .collect::<Vec<_>>());
        }
        rendered.push(value);
    }
    json_to_py(py, &serde_json::json!({ "estimates": rendered }))
}

/// Mardia skewness/kurtosis normality tests on the internal means.
#[pyfunction]
fn mardia(py: Python<'_>, dataset: &Dataset) -> PyResult<Py<PyAny>> {
    let theta1s: Vec<nalgebra::DVector<f64>> = dataset
        .inner
        .internal_reps()
        .iter()
        .map(|r| r.theta1().clone())
        .collect();
    let (skew, kurt) = mardia_test(&theta1s).map_err(to_py_err)?;
    json_to_py(
        py,
        &serde_json::json!({
            "skewness": serde_json::to_value(&skew).expect("serializable"),
            "kurtosis": serde_json::to_value(&kurt).expect("serializable"),
        }),
    )
}

/// Wishart goodness-of-fit on the internal spreads. `bootstrap = 0` runs
/// the plain chi-squared variant.
#[pyfunction]
#[pyo3(signature = (dataset, wishart_df, bootstrap = 0, seed = 0, bins = None))]
fn wishart_gof(
    py: Python<'_>,
    dataset: &Dataset,
    wishart_df: f64,
    bootstrap: usize,
    seed: u64,
    bins: Option<usize>,
) -> PyResult<Py<PyAny>> {
    let reps = dataset.inner.internal_reps();
    let stats = sufficient_stats(&reps).map_err(to_py_err)?;
    let lambda_hat = SpdMatrix::new(ml_estimate(&stats, wishart_df).map_err(to_py_err)?.lambda_hat)
        .map_err(to_py_err)?;
    let observed: Vec<nalgebra::DMatrix<f64>> =
        reps.iter().map(|r| r.theta2().clone()).collect();
    let rng = RngStream::new(seed, 0);
    let result = if bootstrap == 0 {
        gof_wishart(&observed, wishart_df, &lambda_hat, &rng, bins)
    } else {
        gof_wishart_bootstrap(&observed, wishart_df, &lambda_hat, bootstrap, &rng, bins)
    }
    .map_err(to_py_err)?;
    json_to_py(py, &serde_json::to_value(&result).expect("serializable"))
}

/// Runs a preset simulation scenario (`"I"`, `"II"`, `"III"`) and returns
/// the aggregated table as a dict.
#[pyfunction]
#[pyo3(signature = (scenario, n, reps = 2000, seed = 0))]
fn simulate(py: Python<'_>, scenario: &str, n: usize, reps: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let config =
        SimulationConfig::preset(parse_scenario(scenario)?, n, reps, seed).map_err(to_py_err)?;
    let report = run_scenario(&config).map_err(to_py_err)?;
    json_to_py(py, &serde_json::to_value(&report).expect("serializable"))
}

/// Text rendering of a simulation run, mirroring the published tables.
#[pyfunction]
#[pyo3(signature = (scenario, n, reps = 2000, seed = 0))]
fn simulate_text(scenario: &str, n: usize, reps: usize, seed: u64) -> PyResult<String> {
    let config =
        SimulationConfig::preset(parse_scenario(scenario)?, n, reps, seed).map_err(to_py_err)?;
    let report = run_scenario(&config).map_err(to_py_err)?;
    emit_table(&report, TableFormat::Text).map_err(to_py_err)
}

/// Paired Monte Carlo risk comparison of the estimators under entropy loss,
/// with the closed-form gap expressions echoed alongside.
#[pyfunction]
#[pyo3(signature = (scenario, n, reps, seed = 0))]
fn risk(py: Python<'_>, scenario: &str, n: usize, reps: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let truth = scenario_preset(parse_scenario(scenario)?).map_err(to_py_err)?;
    let cmp = risk_comparison(&truth, n, reps, &RngStream::new(seed, 0)).map_err(to_py_err)?;
    json_to_py(py, &serde_json::to_value(&cmp).expect("serializable"))
}

/// Ground-truth parameters of a preset scenario.
#[pyfunction]
fn scenario_params(py: Python<'_>, scenario: &str) -> PyResult<Py<PyAny>> {
    let truth = scenario_preset(parse_scenario(scenario)?).map_err(to_py_err)?;
    json_to_py(
        py,
        &serde_json::json!({
            "mu": truth.mu().iter().copied().collect::<Vec<f64>>(),
            "sigma": matrix_rows(truth.sigma().matrix()),
            "lambda": matrix_rows(truth.lambda().matrix()),
            "m": truth.m(),
        }),
    )
}

/// Entropy (Stein) loss `tr(Bhat B^-1) - log|Bhat B^-1| - p` between two
/// symmetric positive-definite matrices given as row-major lists.
#[pyfunction]
fn stein_loss(b_true: Vec<Vec<f64>>, b_hat: Vec<Vec<f64>>) -> PyResult<f64> {
    let t = SpdMatrix::from_rows(&b_true).map_err(to_py_err)?;
    let h = SpdMatrix::from_rows(&b_hat).map_err(to_py_err)?;
    entropy_loss_impl(&t, &h).map_err(to_py_err)
}

/// Box-Cox transform `(v^k - 1) / k` (log at k = 0).
#[pyfunction]
fn boxcox_transform(value: f64, kappa: f64) -> PyResult<f64> {
    boxcox(value, kappa).map_err(to_py_err)
}

/// Power transform `v^k` (log at k = 0).
#[pyfunction]
fn power_transform_value(value: f64, kappa: f64) -> PyResult<f64> {
    power_transform(value, kappa).map_err(to_py_err)
}

/// Grid-searched Box-Cox exponent maximizing the profile normal
/// log-likelihood over (-3, 3) in steps of 0.01.
#[pyfunction]
fn optimal_boxcox_kappa(values: Vec<f64>) -> PyResult<f64> {
    boxcox_optimal_kappa(&values).map_err(to_py_err)
}

#[pymodule]
fn interval_stats(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(mardia, m)?)?;
    m.add_function(wrap_pyfunction!(wishart_gof, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_text, m)?)?;
    m.add_function(wrap_pyfunction!(risk, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_params, m)?)?;
    m.add_function(wrap_pyfunction!(stein_loss, m)?)?;
    m.add_function(wrap_pyfunction!(boxcox_transform, m)?)?;
    m.add_function(wrap_pyfunction!(power_transform_value, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_boxcox_kappa, m)?)?;
    Ok(())
}
