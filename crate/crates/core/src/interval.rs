//! Interval-valued datasets and their internal-distribution summaries.
//!
//! An observation is a hyper-rectangle in R^p given by per-coordinate closed
//! intervals `[a_j, b_j]`. Assuming values are uniformly spread inside each
//! rectangle (perfectly coupled across coordinates, so the spread matrix is
//! rank one), every observation maps one-to-one to the mean vector and
//! spread matrix of its internal distribution:
//!
//! ```text
//! theta1_j  = (a_j + b_j) / 2
//! theta2_jk = (b_j - a_j)(b_k - a_k) / 12
//! ```
//!
//! The module also provides the classical symbolic descriptive statistics
//! (per-variable mean/variance and pairwise covariance) for such datasets.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A closed interval `[lower, upper]` with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    /// Creates `[lower, upper]`; degenerate point intervals (`lower == upper`)
    /// are allowed.
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !lower.is_finite() || !upper.is_finite() {
            return Err(Error::Domain(format!(
                "interval endpoints must be finite, got [{lower}, {upper}]"
            )));
        }
        if lower > upper {
            return Err(Error::Domain(format!(
                "interval lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Interval { lower, upper })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// Midpoint `(a + b) / 2`.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Width `b - a`.
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// True when the interval collapses to a single point.
    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }
}

/// One observation: an ordered list of `p >= 1` intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalObservation {
    coords: Vec<Interval>,
}

impl IntervalObservation {
    pub fn new(coords: Vec<Interval>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("observation needs at least one coordinate".into()));
        }
        Ok(IntervalObservation { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Interval] {
        &self.coords
    }
}

/// A sample of `n` interval observations sharing the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDataset {
    observations: Vec<IntervalObservation>,
    names: Vec<String>,
}

impl IntervalDataset {
    /// Builds a dataset, labelling variables `x1..xp` unless names are given.
    pub fn new(observations: Vec<IntervalObservation>, names: Option<Vec<String>>) -> Result<Self> {
        let n = observations.len();
        if n == 0 {
            return Err(Error::Domain("dataset needs at least one observation".into()));
        }
        let p = observations[0].dim();
        for (i, obs) in observations.iter().enumerate() {
            if obs.dim() != p {
                return Err(Error::Dimension(format!(
                    "observation {} has {} coordinates, expected {p}",
                    i + 1,
                    obs.dim()
                )));
            }
        }
        let names = match names {
            Some(names) => {
                if names.len() != p {
                    return Err(Error::Dimension(format!(
                        "{} variable names for {p} variables",
                        names.len()
                    )));
                }
                names
            }
            None => (1..=p).map(|j| format!("x{j}")).collect(),
        };
        Ok(IntervalDataset { observations, names })
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn p(&self) -> usize {
        self.observations[0].dim()
    }

    pub fn observations(&self) -> &[IntervalObservation] {
        &self.observations
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Internal-distribution parameters for every observation.
    pub fn internal_reps(&self) -> Vec<InternalRep> {
        self.observations.iter().map(InternalRep::from_observation).collect()
    }
}

/// Mean vector and spread matrix of one observation's internal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalRep {
    theta1: DVector<f64>,
    theta2: DMatrix<f64>,
}

impl InternalRep {
    pub fn from_observation(obs: &IntervalObservation) -> Self {
        InternalRep {
            theta1: internal_mean(obs),
            theta2: internal_spread(obs),
        }
    }

    /// Wraps precomputed parameters; `theta2` must be square and symmetric
    /// with nonnegative diagonal, matching `theta1`'s length.
    pub fn new(theta1: DVector<f64>, theta2: DMatrix<f64>) -> Result<Self> {
        let p = theta1.len();
        if theta2.nrows() != p || theta2.ncols() != p {
            return Err(Error::Dimension(format!(
                "theta2 is {}x{}, expected {p}x{p}",
                theta2.nrows(),
                theta2.ncols()
            )));
        }
        if crate::linalg::relative_asymmetry(&theta2) > 1e-10 {
            return Err(Error::Domain("theta2 must be symmetric".into()));
        }
        if (0..p).any(|j| theta2[(j, j)] < 0.0) {
            return Err(Error::Domain("theta2 diagonal must be nonnegative".into()));
        }
        Ok(InternalRep { theta1, theta2 })
    }

    pub fn theta1(&self) -> &DVector<f64> {
        &self.theta1
    }

    pub fn theta2(&self) -> &DMatrix<f64> {
        &self.theta2
    }

    pub fn dim(&self) -> usize {
        self.theta1.len()
    }

    /// JSON view with `theta1` as an array and `theta2` as row-major rows.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "theta1": self.theta1.iter().copied().collect::<Vec<f64>>(),
            "theta2": matrix_rows(&self.theta2),
        })
    }
}

/// Row-major nested-array view of a matrix, the wire format for reports.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Midpoint vector of the internal distribution.
pub fn internal_mean(obs: &IntervalObservation) -> DVector<f64> {
    DVector::from_iterator(obs.dim(), obs.coords().iter().map(Interval::midpoint))
}

/// Spread matrix of the internal distribution: `w w^T / 12` where `w` is the
/// width vector, i.e. entry (j, k) is `(b_j - a_j)(b_k - a_k) / 12`.
pub fn internal_spread(obs: &IntervalObservation) -> DMatrix<f64> {
    let p = obs.dim();
    let w: Vec<f64> = obs.coords().iter().map(Interval::width).collect();
    DMatrix::from_fn(p, p, |j, k| w[j] * w[k] / 12.0)
}

/// Per-variable symbolic sample mean and variance under the uniform
/// internal-distribution assumption (`j` is zero-based).
///
/// ```text
/// mean     = (2n)^-1 sum (a + b)
/// variance = (3n)^-1 sum (a^2 + ab + b^2) - mean^2
/// ```
pub fn describe_mean_var(data: &IntervalDataset, j: usize) -> Result<(f64, f64)> {
    check_var_index(data, j)?;
    let n = data.n() as f64;
    let mut sum_ab = 0.0;
    let mut sum_sq = 0.0;
    for obs in data.observations() {
        let iv = obs.coords()[j];
        let (a, b) = (iv.lower(), iv.upper());
        sum_ab += a + b;
        sum_sq += a * a + a * b + b * b;
    }
    let mean = sum_ab / (2.0 * n);
    let variance = sum_sq / (3.0 * n) - mean * mean;
    // Guard against cancellation pushing a degenerate variance below zero.
    Ok((mean, variance.max(0.0)))
}

/// Symbolic sample covariance between variables `j` and `k` (zero-based,
/// `j != k`): the symmetric mixed-product form
///
/// ```text
/// (6n)^-1 sum [ 2(a_j - m_j)(a_k - m_k) + (a_j - m_j)(b_k - m_k)
///             + (b_j - m_j)(a_k - m_k) + 2(b_j - m_j)(b_k - m_k) ]
/// ```
///
/// where `m_j`, `m_k` are the symbolic means.
pub fn describe_cov(data: &IntervalDataset, j: usize, k: usize) -> Result<f64> {
    check_var_index(data, j)?;
    check_var_index(data, k)?;
    if j == k {
        return Err(Error::Domain(
            "describe_cov requires two distinct variables; use describe_mean_var for a variance"
                .into(),
        ));
    }
    let (mean_j, _) = describe_mean_var(data, j)?;
    let (mean_k, _) = describe_mean_var(data, k)?;
    let n = data.n() as f64;
    let mut sum = 0.0;
    for obs in data.observations() {
        let (aj, bj) = {
            let iv = obs.coords()[j];
            (iv.lower() - mean_j, iv.upper() - mean_j)
        };
        let (ak, bk) = {
            let iv = obs.coords()[k];
            (iv.lower() - mean_k, iv.upper() - mean_k)
        };
        sum += 2.0 * aj * ak + aj * bk + bj * ak + 2.0 * bj * bk;
    }
    Ok(sum / (6.0 * n))
}

fn check_var_index(data: &IntervalDataset, j: usize) -> Result<()> {
    if j >= data.p() {
        return Err(Error::Domain(format!(
            "variable index {} out of range (p = {})",
            j + 1,
            data.p()
        )));
    }
    Ok(())
}

/// Parses the CSV wire format: header `a_1,b_1,...,a_p,b_p`, one numeric row
/// per observation. Errors name the offending row and variable.
pub fn parse_dataset(text: &str) -> Result<IntervalDataset> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input: expected a header row".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || !cols.len().is_multiple_of(2) {
        return Err(Error::Parse(format!(
            "header must contain an even number of columns (a_k, b_k pairs), got {}",
            cols.len()
        )));
    }
    let p = cols.len() / 2;
    for (j, pair) in cols.chunks(2).enumerate() {
        let (ea, eb) = (format!("a_{}", j + 1), format!("b_{}", j + 1));
        if pair[0] != ea || pair[1] != eb {
            return Err(Error::Parse(format!(
                "header columns {},{} must be {ea},{eb}, got {},{}",
                2 * j + 1,
                2 * j + 2,
                pair[0],
                pair[1]
            )));
        }
    }

    let mut observations = Vec::new();
    for (row_idx, (_, line)) in lines.enumerate() {
        let row = row_idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 * p {
            return Err(Error::Parse(format!(
                "row {row} has {} columns, expected {}",
                fields.len(),
                2 * p
            )));
        }
        let mut coords = Vec::with_capacity(p);
        for j in 0..p {
            let var = j + 1;
            let a: f64 = fields[2 * j].parse().map_err(|_| {
                Error::Parse(format!(
                    "malformed number {:?} at row {row}, var {var}",
                    fields[2 * j]
                ))
            })?;
            let b: f64 = fields[2 * j + 1].parse().map_err(|_| {
                Error::Parse(format!(
                    "malformed number {:?} at row {row}, var {var}",
                    fields[2 * j + 1]
                ))
            })?;
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Parse(format!(
                    "non-finite endpoint at row {row}, var {var}"
                )));
            }
            if a > b {
                return Err(Error::Parse(format!("lower > upper at row {row}, var {var}")));
            }
            coords.push(Interval::new(a, b).expect("validated endpoints"));
        }
        observations.push(IntervalObservation::new(coords).expect("p >= 1"));
    }
    IntervalDataset::new(observations, None)
}

/// Serializes a dataset back to the CSV wire format. Numbers print in the
/// shortest representation that reparses to the identical f64, so
/// parse -> serialize -> parse is lossless.
pub fn serialize_dataset(data: &IntervalDataset) -> String {
    let p = data.p();
    let header: Vec<String> = (1..=p).flat_map(|j| [format!("a_{j}"), format!("b_{j}")]).collect();
    let mut out = header.join(",");
    out.push('\n');
    for obs in data.observations() {
        let row: Vec<String> = obs
            .coords()
            .iter()
            .flat_map(|iv| [iv.lower().to_string(), iv.upper().to_string()])
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
