//! Binary and ordinal probit/logit regression.
//!
//! * [`distributions`]: normal and logistic kernels, truncated-normal draws
//! * [`data`]: CSV ingestion, schema-driven encoding, simulation
//! * [`likelihood`]: log-likelihood with analytic score and Hessian
//! * [`estimation`]: Newton–Raphson maximum likelihood, LR test, McFadden R², hit-rate
//! * [`effects`]: average covariate effects, odds ratios, cumulative odds
//! * [`bayes`]: Albert–Chib Gibbs sampling for probit models
//! * [`cli`]: the `ordchoice` command line

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod cli;
pub mod data;
pub mod distributions;
pub mod effects;
pub mod error;
pub mod estimation;
pub mod likelihood;

pub use error::{Error, Result};
