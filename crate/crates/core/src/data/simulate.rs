use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::dataset::{ColumnKind, Dataset};
use super::encode::INTERCEPT_NAME;
use super::schema::{Directive, SchemaConfig};
use super::table::RawTable;
use crate::error::{Error, Result};
use crate::likelihood::{ModelSpec, ParamVector};

/// Draws `n` observations from the latent-threshold model.
///
/// `cutpoints` holds the interior thresholds `(γ_2, …, γ_{J-1})`; `γ_1 = 0` is
/// implied. Non-intercept covariates are i.i.d. standard normal, drawn row by
/// row before that row's error term.
pub fn simulate_dataset<R: Rng + ?Sized>(
    spec: &ModelSpec,
    beta: &[f64],
    cutpoints: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if beta.len() != spec.n_covariates {
        return Err(Error::domain(format!(
            "expected {} coefficients, got {}",
            spec.n_covariates,
            beta.len()
        )));
    }
    if cutpoints.len() != spec.n_free_cutpoints() {
        return Err(Error::domain(format!(
            "expected {} interior cut-points, got {}",
            spec.n_free_cutpoints(),
            cutpoints.len()
        )));
    }
    let params = ParamVector::from_cutpoints(beta.to_vec(), cutpoints)?;
    let gamma = params.cutpoints();

    let k = spec.n_covariates;
    let first = usize::from(spec.intercept);
    let mut x = DMatrix::zeros(n, k);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mut xb = 0.0;
        for c in 0..k {
            let v = if c < first {
                1.0
            } else {
                rng.sample(StandardNormal)
            };
            x[(i, c)] = v;
            xb += v * beta[c];
        }
        let z = xb + spec.link.sample(rng);
        // y = j  ⇔  γ_{j-1} < z ≤ γ_j
        let j = gamma[1..]
            .iter()
            .position(|&g| z <= g)
            .unwrap_or(spec.n_categories - 1)
            + 1;
        y.push(j);
    }

    let mut names = Vec::with_capacity(k);
    let mut kinds = Vec::with_capacity(k);
    if spec.intercept {
        names.push(INTERCEPT_NAME.to_string());
        kinds.push(ColumnKind::Intercept);
    }
    for c in first..k {
        names.push(format!("x{c}"));
        kinds.push(ColumnKind::Continuous);
    }
    Dataset::with_categories(y, x, names, kinds, spec.n_categories)
}

/// Renders a dataset as a CSV-ready table plus the schema that reads it back.
///
/// The response goes in column `response`, written with the dataset's
/// labels; every non-intercept column is emitted as `continuous`.
pub fn to_raw_table(data: &Dataset, response: &str) -> Result<(RawTable, SchemaConfig)> {
    let first = usize::from(data.has_intercept());
    let mut columns = vec![response.to_string()];
    columns.extend(data.names()[first..].iter().cloned());
    let rows = (0..data.n())
        .map(|i| {
            let mut row = vec![data.labels()[data.y()[i] - 1].clone()];
            row.extend((first..data.k()).map(|c| data.x()[(i, c)].to_string()));
            row
        })
        .collect();
    let table = RawTable::new(columns, rows)?;
    let schema = SchemaConfig {
        response: response.to_string(),
        labels: data.labels().to_vec(),
        missing: Vec::new(),
        covariates: data.names()[first..]
            .iter()
            .map(|n| (n.clone(), Directive::Continuous))
            .collect(),
        intercept: data.has_intercept(),
    };
    schema.validate()?;
    Ok((table, schema))
}
