//! Covariate effects on category probabilities and odds utilities.
//!
//! Continuous covariates use the analytic derivative
//! `∂P(y=j)/∂x_l = −β_l [f(γ_j − x'β) − f(γ_{j-1} − x'β)]`; indicators use the
//! difference of predicted probabilities with the indicator switched on and
//! off. Both are averaged over every observation in the sample.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{ColumnKind, Dataset};
use crate::distributions::Link;
use crate::error::{Error, Result};
use crate::estimation::predict_prob;
use crate::likelihood::{Family, ModelSpec, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    Continuous,
    Indicator,
}

/// Effects of one covariate: one row per observation, one column per category.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateEffects {
    pub column: usize,
    pub kind: EffectKind,
    pub per_observation: DMatrix<f64>,
    pub average: DVector<f64>,
}

fn check_column(spec: &ModelSpec, params: &ParamVector, data: &Dataset, col: usize) -> Result<()> {
    spec.check_data(data)?;
    spec.check_params(params)?;
    if col >= data.k() {
        return Err(Error::domain(format!(
            "column {col} out of range (k = {})",
            data.k()
        )));
    }
    if data.kinds()[col] == ColumnKind::Intercept {
        return Err(Error::Kind("the intercept has no covariate effect".into()));
    }
    if data.n() == 0 {
        return Err(Error::domain(
            "covariate effects need at least one observation",
        ));
    }
    Ok(())
}

fn column_means(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows() as f64;
    DVector::from_iterator(
        m.ncols(),
        m.column_iter()
            .map(|c| c.iter().fold(0.0, |acc, v| acc + v) / n),
    )
}

/// Marginal effect of continuous column `l`.
pub fn ce_continuous(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    l: usize,
) -> Result<CovariateEffects> {
    check_column(spec, params, data, l)?;
    if !data.kinds()[l].is_continuous() {
        return Err(Error::Kind(format!(
            "`{}` is an indicator; use the discrete-change effect",
            data.names()[l]
        )));
    }
    let gamma = params.cutpoints();
    let eta = data.x() * &params.beta;
    let beta_l = params.beta[l];
    let j = spec.n_categories;
    let per_observation = DMatrix::from_fn(data.n(), j, |i, c| {
        let upper = spec.link.pdf(gamma[c + 1] - eta[i]);
        let lower = spec.link.pdf(gamma[c] - eta[i]);
        -beta_l * (upper - lower)
    });
    Ok(CovariateEffects {
        column: l,
        kind: EffectKind::Continuous,
        average: column_means(&per_observation),
        per_observation,
    })
}

/// Discrete change in each category probability when indicator `m` goes
/// from 0 to 1, other covariates held at their observed values.
pub fn ce_indicator(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    m: usize,
) -> Result<CovariateEffects> {
    check_column(spec, params, data, m)?;
    if data.x().column(m).iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::Kind(format!(
            "`{}` takes values other than 0 and 1",
            data.names()[m]
        )));
    }
    let mut on = data.x().clone();
    on.column_mut(m).fill(1.0);
    let mut off = data.x().clone();
    off.column_mut(m).fill(0.0);
    let per_observation = predict_prob(spec, params, &on)? - predict_prob(spec, params, &off)?;
    Ok(CovariateEffects {
        column: m,
        kind: EffectKind::Indicator,
        average: column_means(&per_observation),
        per_observation,
    })
}

/// Dispatches on the column kind recorded in the dataset.
pub fn covariate_effect(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    col: usize,
) -> Result<CovariateEffects> {
    match data.kinds().get(col) {
        Some(ColumnKind::Indicator) => ce_indicator(spec, params, data, col),
        _ => ce_continuous(spec, params, data, col),
    }
}

/// `exp(β_m)`: the odds ratio for a unit change in covariate `m` under a
/// logit link. For ordinal models this is the odds ratio of falling above
/// any given threshold.
pub fn odds_ratio_logit(spec: &ModelSpec, params: &ParamVector, m: usize) -> Result<f64> {
    if spec.link != Link::Logit {
        return Err(Error::Unsupported(
            "odds ratios are defined for the logit link only".into(),
        ));
    }
    params
        .beta
        .get(m)
        .map(|b| b.exp())
        .ok_or_else(|| Error::domain(format!("coefficient {m} out of range")))
}

/// Cumulative odds `P(y ≤ j | x) / P(y > j | x) = exp(γ_j − x'β)` for an
/// ordinal logit model.
pub fn cumulative_odds(spec: &ModelSpec, params: &ParamVector, x: &[f64], j: usize) -> Result<f64> {
    if spec.link != Link::Logit {
        return Err(Error::Unsupported(
            "cumulative odds are defined for the logit link only".into(),
        ));
    }
    if spec.family != Family::Ordinal {
        return Err(Error::Unsupported(
            "cumulative odds need an ordinal model".into(),
        ));
    }
    spec.check_params(params)?;
    if x.len() != spec.n_covariates {
        return Err(Error::domain(format!(
            "expected {} covariates, got {}",
            spec.n_covariates,
            x.len()
        )));
    }
    if j == 0 || j >= spec.n_categories {
        return Err(Error::domain(format!(
            "cumulative odds need 1 ≤ j ≤ {}, got {j}",
            spec.n_categories - 1
        )));
    }
    let xb: f64 = x.iter().zip(params.beta.iter()).map(|(a, b)| a * b).sum();
    Ok((params.cutpoints()[j] - xb).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectsRow {
    pub covariate: String,
    /// Display label, e.g. `age, 10 units` when scaled.
    pub label: String,
    pub kind: EffectKind,
    pub scale: f64,
    pub p_value: Option<f64>,
    /// Average effect on `P(y = j)` for `j = 1..=J`, multiplied by `scale`.
    pub effects: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectsTable {
    pub categories: Vec<String>,
    pub rows: Vec<EffectsRow>,
}

/// Average effects for `columns` in the given order. `scales` maps a column
/// name to a multiplier for continuous covariates.
pub fn effects_table(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    columns: &[usize],
    scales: &HashMap<String, f64>,
) -> Result<EffectsTable> {
    let mut rows = Vec::with_capacity(columns.len());
    for &c in columns {
        let eff = covariate_effect(spec, params, data, c)?;
        let name = data.names()[c].clone();
        let scale = scales.get(&name).copied().unwrap_or(1.0);
        if scale != 1.0 && eff.kind == EffectKind::Indicator {
            return Err(Error::Kind(format!(
                "`{name}` is an indicator and cannot be scaled"
            )));
        }
        let label = if scale != 1.0 {
            format!("{name}, {scale} units")
        } else {
            name.clone()
        };
        rows.push(EffectsRow {
            covariate: name,
            label,
            kind: eff.kind,
            scale,
            p_value: None,
            effects: eff.average.iter().map(|v| v * scale).collect(),
        });
    }
    Ok(EffectsTable {
        categories: data.labels().to_vec(),
        rows,
    })
}

impl EffectsTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes") + "\n"
    }

    /// One row per covariate, one column per category, four decimals.
    pub fn to_text(&self) -> String {
        let name_w = self
            .rows
            .iter()
            .map(|r| r.label.chars().count())
            .max()
            .unwrap_or(0)
            .max(10);
        let col_w = self
            .categories
            .iter()
            .map(|c| c.chars().count() + 5)
            .max()
            .unwrap_or(0)
            .max(12);
        let mut out = String::new();
        let _ = write!(out, "{:<name_w$}", "covariate");
        for c in &self.categories {
            let head = format!("dP({c})");
            let _ = write!(out, " {head:>col_w$}");
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "{}",
            "-".repeat(name_w + (col_w + 1) * self.categories.len())
        );
        for r in &self.rows {
            let _ = write!(out, "{:<name_w$}", r.label);
            for v in &r.effects {
                let _ = write!(out, " {v:>col_w$.4}");
            }
            out.push('\n');
        }
        out
    }
}
