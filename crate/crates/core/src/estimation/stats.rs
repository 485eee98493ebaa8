use nalgebra::DMatrix;
use statrs::function::gamma::gamma_ur;

use crate::data::Dataset;
use crate::distributions::phi_cdf;
use crate::error::{Error, Result};
use crate::likelihood::{log_interval_prob, ModelSpec, ParamVector};

/// Likelihood-ratio statistic `−2(ln L₀ − ln L_fit)` and its upper-tail
/// chi-square p-value with `df` degrees of freedom.
pub fn lr_test(loglik_0: f64, loglik_fit: f64, df: usize) -> Result<(f64, f64)> {
    if df == 0 {
        return Err(Error::domain(
            "likelihood-ratio test needs at least one restriction",
        ));
    }
    if !(loglik_fit >= loglik_0 - 1e-8) {
        return Err(Error::domain(format!(
            "fitted log-likelihood {loglik_fit} is below the restricted {loglik_0}"
        )));
    }
    let stat = (-2.0 * (loglik_0 - loglik_fit)).max(0.0);
    Ok((stat, chi_square_upper_tail(stat, df)))
}

pub fn chi_square_upper_tail(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        gamma_ur(0.5 * df as f64, 0.5 * x)
    }
}

/// McFadden's likelihood-ratio index `1 − ln L_fit / ln L₀`.
pub fn mcfadden_r2(loglik_0: f64, loglik_fit: f64) -> Result<f64> {
    if !(loglik_0 < 0.0) {
        return Err(Error::domain(format!(
            "restricted log-likelihood must be negative, got {loglik_0}"
        )));
    }
    Ok(1.0 - loglik_fit / loglik_0)
}

/// Two-sided normal p-value for a z statistic.
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_nan() {
        f64::NAN
    } else {
        2.0 * phi_cdf(-z.abs())
    }
}

/// `n × J` matrix of cell probabilities for the rows of `x_new`.
pub fn predict_prob(
    spec: &ModelSpec,
    params: &ParamVector,
    x_new: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    spec.check_params(params)?;
    if x_new.ncols() != spec.n_covariates {
        return Err(Error::domain(format!(
            "design has {} columns, model expects {}",
            x_new.ncols(),
            spec.n_covariates
        )));
    }
    let gamma = params.cutpoints();
    let eta = x_new * &params.beta;
    let j = spec.n_categories;
    Ok(DMatrix::from_fn(x_new.nrows(), j, |i, c| {
        log_interval_prob(spec.link, gamma[c] - eta[i], gamma[c + 1] - eta[i]).exp()
    }))
}

/// Percentage of observations whose observed category has the highest
/// predicted probability; ties go to the lowest category.
pub fn hit_rate(spec: &ModelSpec, params: &ParamVector, data: &Dataset) -> Result<f64> {
    spec.check_data(data)?;
    if data.n() == 0 {
        return Err(Error::domain("hit rate of an empty dataset"));
    }
    let probs = predict_prob(spec, params, data.x())?;
    let hits = data
        .y()
        .iter()
        .enumerate()
        .filter(|&(i, &y)| predicted_category(probs.row(i).iter().copied()) == y)
        .count();
    Ok(100.0 * hits as f64 / data.n() as f64)
}

fn predicted_category(row: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, p) in row.enumerate() {
        if p > best.1 {
            best = (c, p);
        }
    }
    best.0 + 1
}
