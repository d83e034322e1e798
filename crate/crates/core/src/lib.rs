//! Frequentist and Bayesian inference for multivariate interval-valued data.
//!
//! Observations are hyper-rectangles in R^p. Each one maps to the mean
//! vector and spread matrix of its internal distribution; the means follow a
//! multivariate normal and the spreads a Wishart distribution, which yields
//! closed-form maximum-likelihood and Bayes estimators for the model
//! parameters (mu, Sigma, Lambda). The crate covers:
//!
//! - dataset ingestion and symbolic descriptive statistics ([`interval`])
//! - the matrix distributions behind the model ([`dist`])
//! - ML/Bayes estimation, Fisher information, Wald intervals, and Gibbs
//!   full-conditional samplers ([`estimation`])
//! - entropy-loss risk comparison of the two estimator families ([`loss`])
//! - Mardia's normality test and Wishart goodness-of-fit checks ([`gof`])
//! - a Monte Carlo harness for the estimator comparison tables ([`sim`])

pub mod datasets;
pub mod dist;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod interval;
pub mod linalg;
pub mod loss;
pub mod parallel;
pub mod rng;
pub mod sim;
mod specfun;

pub use error::{Error, Result};
pub use rng::RngStream;
