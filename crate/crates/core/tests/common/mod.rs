#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ordchoice::data::{simulate_dataset, ColumnKind, Dataset};
use ordchoice::distributions::Link;
use ordchoice::likelihood::{loglik, Family, ModelSpec, ParamVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn spec(family: Family, link: Link, j: usize, k: usize) -> ModelSpec {
    ModelSpec::new(family, link, j, k, true).unwrap()
}

/// Random design with an intercept, standard-normal covariates and a response
/// drawn from the model at `params`.
pub fn random_instance(spec: &ModelSpec, params: &ParamVector, n: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    simulate_dataset(
        spec,
        params.beta.as_slice(),
        &params.interior_cutpoints(),
        n,
        &mut r,
    )
    .unwrap()
}

/// Uniform draws in `[-a, a]` for β and `[-1, 0.5]` for δ.
pub fn random_params(spec: &ModelSpec, a: f64, r: &mut ChaCha8Rng) -> ParamVector {
    let beta = (0..spec.n_covariates)
        .map(|_| r.random_range(-a..a))
        .collect();
    let delta = (0..spec.n_free_cutpoints())
        .map(|_| r.random_range(-1.0..0.5))
        .collect();
    ParamVector::new(beta, delta)
}

pub fn all_models() -> Vec<(Family, Link, usize)> {
    vec![
        (Family::Binary, Link::Probit, 2),
        (Family::Binary, Link::Logit, 2),
        (Family::Ordinal, Link::Probit, 4),
        (Family::Ordinal, Link::Logit, 4),
    ]
}

/// Central differences of the log-likelihood in the flat `(β, δ)` vector.
pub fn numeric_gradient(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    h: f64,
) -> DVector<f64> {
    let theta = params.flat();
    let k = spec.n_covariates;
    DVector::from_fn(theta.len(), |r, _| {
        let mut up = theta.clone();
        let mut dn = theta.clone();
        up[r] += h;
        dn[r] -= h;
        let lu = loglik(spec, &ParamVector::from_flat(&up, k), data).unwrap();
        let ld = loglik(spec, &ParamVector::from_flat(&dn, k), data).unwrap();
        (lu - ld) / (2.0 * h)
    })
}

/// Central differences of the analytic gradient.
pub fn numeric_hessian<F>(theta: &DVector<f64>, h: f64, grad: F) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let p = theta.len();
    let mut out = DMatrix::zeros(p, p);
    for c in 0..p {
        let mut up = theta.clone();
        let mut dn = theta.clone();
        up[c] += h;
        dn[c] -= h;
        let diff = (grad(&up) - grad(&dn)) / (2.0 * h);
        out.set_column(c, &diff);
    }
    (&out + out.transpose()) * 0.5
}

/// Largest elementwise error relative to the larger of the entry and `floor`.
pub fn max_rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Intercept plus `k - 1` covariates, response given directly.
pub fn dataset_from(y: Vec<usize>, covariates: &[Vec<f64>], j: usize) -> Dataset {
    let n = y.len();
    let k = covariates.len() + 1;
    let x = DMatrix::from_fn(n, k, |i, c| if c == 0 { 1.0 } else { covariates[c - 1][i] });
    let mut names = vec!["intercept".to_string()];
    let mut kinds = vec![ColumnKind::Intercept];
    for c in 1..k {
        names.push(format!("x{c}"));
        kinds.push(ColumnKind::Continuous);
    }
    Dataset::with_categories(y, x, names, kinds, j).unwrap()
}
