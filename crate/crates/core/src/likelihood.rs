//! Log-likelihood, score and Hessian of the ordinal threshold model
//!
//! ```text
//! z_i = x_i'β + ε_i,   y_i = j  ⇔  γ_{j-1} < z_i ≤ γ_j
//! P(y_i = j) = F(γ_j − x_i'β) − F(γ_{j-1} − x_i'β)
//! ```
//!
//! with `γ_0 = −∞`, `γ_1 = 0`, `γ_J = +∞`. The binary model is the `J = 2`
//! case and is evaluated by the same code path. Interior cut-points are
//! parametrized by log-spacings `δ_j = ln(γ_j − γ_{j-1})`, `j = 2..J-1`, so any
//! real `δ` yields an ordered set of thresholds.
//!
//! Derivatives are taken with respect to the flat vector `θ = (β, δ)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distributions::{ln_1m_exp, Link};
use crate::error::{Error, Result};

/// Smallest log-probability reported for a single cell.
pub const LOG_PROB_FLOOR: f64 = -745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Binary,
    Ordinal,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Binary => "binary",
            Family::Ordinal => "ordinal",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binary" => Ok(Family::Binary),
            "ordinal" => Ok(Family::Ordinal),
            other => Err(Error::domain(format!("unknown model family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub link: Link,
    pub n_categories: usize,
    pub n_covariates: usize,
    pub intercept: bool,
}

impl ModelSpec {
    pub fn new(
        family: Family,
        link: Link,
        n_categories: usize,
        n_covariates: usize,
        intercept: bool,
    ) -> Result<Self> {
        match family {
            Family::Binary if n_categories != 2 => {
                return Err(Error::domain(format!(
                    "a binary model has exactly 2 categories, got {n_categories}"
                )))
            }
            Family::Ordinal if n_categories < 2 => {
                return Err(Error::domain(format!(
                    "an ordinal model needs at least 2 categories, got {n_categories}"
                )))
            }
            _ => {}
        }
        if intercept && n_covariates == 0 {
            return Err(Error::domain(
                "an intercept needs at least one design column",
            ));
        }
        Ok(ModelSpec {
            family,
            link,
            n_categories,
            n_covariates,
            intercept,
        })
    }

    pub fn binary(link: Link, n_covariates: usize, intercept: bool) -> Result<Self> {
        Self::new(Family::Binary, link, 2, n_covariates, intercept)
    }

    /// Ordinal model with `J` categories. `J = 2` is accepted and reproduces
    /// the binary model exactly.
    pub fn ordinal(
        link: Link,
        n_categories: usize,
        n_covariates: usize,
        intercept: bool,
    ) -> Result<Self> {
        Self::new(Family::Ordinal, link, n_categories, n_covariates, intercept)
    }

    /// Spec whose dimensions are read off the dataset.
    pub fn for_dataset(family: Family, link: Link, data: &Dataset) -> Result<Self> {
        Self::new(
            family,
            link,
            data.n_categories(),
            data.k(),
            data.has_intercept(),
        )
    }

    pub fn n_free_cutpoints(&self) -> usize {
        self.n_categories - 2
    }

    pub fn n_params(&self) -> usize {
        self.n_covariates + self.n_free_cutpoints()
    }

    pub(crate) fn check_data(&self, data: &Dataset) -> Result<()> {
        if data.n_categories() != self.n_categories {
            return Err(Error::domain(format!(
                "model has {} categories but the data has {}",
                self.n_categories,
                data.n_categories()
            )));
        }
        if data.k() != self.n_covariates {
            return Err(Error::domain(format!(
                "model has {} covariates but the design has {} columns",
                self.n_covariates,
                data.k()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.beta.len() != self.n_covariates || params.delta.len() != self.n_free_cutpoints() {
            return Err(Error::domain(format!(
                "expected {} coefficients and {} cut-point parameters, got {} and {}",
                self.n_covariates,
                self.n_free_cutpoints(),
                params.beta.len(),
                params.delta.len()
            )));
        }
        if params
            .beta
            .iter()
            .chain(params.delta.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::domain("parameters must be finite"));
        }
        Ok(())
    }
}

/// Coefficients `β` and cut-point log-spacings `δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub beta: DVector<f64>,
    pub delta: DVector<f64>,
}

impl ParamVector {
    pub fn new(beta: Vec<f64>, delta: Vec<f64>) -> Self {
        ParamVector {
            beta: DVector::from_vec(beta),
            delta: DVector::from_vec(delta),
        }
    }

    pub fn zeros(spec: &ModelSpec) -> Self {
        ParamVector {
            beta: DVector::zeros(spec.n_covariates),
            delta: DVector::zeros(spec.n_free_cutpoints()),
        }
    }

    /// Builds `δ` from interior cut-points `(γ_2, …, γ_{J-1})`, which must be
    /// positive and strictly increasing.
    pub fn from_cutpoints(beta: Vec<f64>, interior: &[f64]) -> Result<Self> {
        let mut prev = 0.0;
        let mut delta = Vec::with_capacity(interior.len());
        for &g in interior {
            if !(g > prev) || !g.is_finite() {
                return Err(Error::domain(format!(
                    "cut-points must be finite and strictly increase from γ₁ = 0, got {interior:?}"
                )));
            }
            delta.push((g - prev).ln());
            prev = g;
        }
        Ok(Self::new(beta, delta))
    }

    pub fn flat(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.beta.len() + self.delta.len(),
            self.beta.iter().chain(self.delta.iter()).copied(),
        )
    }

    pub fn from_flat(flat: &DVector<f64>, n_covariates: usize) -> Self {
        ParamVector {
            beta: flat.rows(0, n_covariates).into_owned(),
            delta: flat
                .rows(n_covariates, flat.len() - n_covariates)
                .into_owned(),
        }
    }

    /// Full threshold vector `(−∞, 0, γ_2, …, γ_{J-1}, +∞)`.
    pub fn cutpoints(&self) -> Vec<f64> {
        cutpoints_from_delta(self.delta.as_slice())
    }

    /// Interior thresholds `(γ_2, …, γ_{J-1})`.
    pub fn interior_cutpoints(&self) -> Vec<f64> {
        let all = self.cutpoints();
        all[2..all.len() - 1].to_vec()
    }
}

/// `(−∞, 0, γ_2, …, γ_{J-1}, +∞)` with `γ_j = γ_{j-1} + exp(δ_j)`; length `J + 1`.
pub fn cutpoints_from_delta(delta: &[f64]) -> Vec<f64> {
    let mut gamma = Vec::with_capacity(delta.len() + 3);
    gamma.push(f64::NEG_INFINITY);
    gamma.push(0.0);
    let mut acc = 0.0;
    for d in delta {
        acc += d.exp();
        gamma.push(acc);
    }
    gamma.push(f64::INFINITY);
    gamma
}

/// `ln[F(upper) − F(lower)]` without cancellation. Returns `−∞` only when the
/// interval is empty in floating point.
pub(crate) fn log_interval_prob(link: Link, lower: f64, upper: f64) -> f64 {
    // Mirror into the lower tail when the whole interval sits above zero.
    let (lower, upper) = if lower > 0.0 {
        (-upper, -lower)
    } else {
        (lower, upper)
    };
    if upper == f64::INFINITY {
        return link.log_cdf(-lower);
    }
    if lower == f64::NEG_INFINITY {
        return link.log_cdf(upper);
    }
    if upper <= 0.0 {
        let log_upper = link.log_cdf(upper);
        let log_lower = link.log_cdf(lower);
        return log_upper + ln_1m_exp(log_lower - log_upper);
    }
    // lower ≤ 0 < upper: both pieces are at most one half
    let p = (0.5 - link.cdf(lower)) + (0.5 - link.cdf(-upper));
    p.ln()
}

/// `ln P(y = j | x'β = xb)` for category `j ∈ 1..=J`; `gamma` is the full
/// threshold vector of length `J + 1`. Values below [`LOG_PROB_FLOOR`] are
/// clamped to it.
pub fn cell_logprob(spec: &ModelSpec, xb: f64, j: usize, gamma: &[f64]) -> Result<f64> {
    if j == 0 || j > spec.n_categories {
        return Err(Error::domain(format!(
            "category {j} outside 1..={}",
            spec.n_categories
        )));
    }
    if gamma.len() != spec.n_categories + 1 {
        return Err(Error::domain(format!(
            "expected {} thresholds, got {}",
            spec.n_categories + 1,
            gamma.len()
        )));
    }
    Ok(clamp_log_prob(log_interval_prob(
        spec.link,
        gamma[j - 1] - xb,
        gamma[j] - xb,
    ))
    .0)
}

#[inline]
fn clamp_log_prob(v: f64) -> (f64, bool) {
    if v >= LOG_PROB_FLOOR {
        (v, false)
    } else {
        (LOG_PROB_FLOOR, true)
    }
}

/// Log-likelihood together with the number of clamped cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLik {
    pub value: f64,
    pub clamp_count: usize,
}

pub fn loglik(spec: &ModelSpec, params: &ParamVector, data: &Dataset) -> Result<f64> {
    loglik_with_diagnostics(spec, params, data).map(|ll| ll.value)
}

pub fn loglik_with_diagnostics(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
) -> Result<LogLik> {
    spec.check_data(data)?;
    spec.check_params(params)?;
    let gamma = params.cutpoints();
    let eta = data.x() * &params.beta;
    let mut value = 0.0;
    let mut clamp_count = 0;
    for (i, &y) in data.y().iter().enumerate() {
        let raw = log_interval_prob(spec.link, gamma[y - 1] - eta[i], gamma[y] - eta[i]);
        let (v, clamped) = clamp_log_prob(raw);
        value += v;
        clamp_count += usize::from(clamped);
    }
    Ok(LogLik { value, clamp_count })
}

/// Log-likelihood from a precomputed linear index `η = Xβ`.
pub(crate) fn loglik_from_index(link: Link, eta: &[f64], y: &[usize], gamma: &[f64]) -> f64 {
    eta.iter()
        .zip(y)
        .map(|(&e, &j)| clamp_log_prob(log_interval_prob(link, gamma[j - 1] - e, gamma[j] - e)).0)
        .sum()
}

pub fn grad_loglik(spec: &ModelSpec, params: &ParamVector, data: &Dataset) -> Result<DVector<f64>> {
    Ok(evaluate(spec, params, data, Order::Gradient)?.gradient)
}

pub fn hess_loglik(spec: &ModelSpec, params: &ParamVector, data: &Dataset) -> Result<DMatrix<f64>> {
    Ok(evaluate(spec, params, data, Order::Hessian)?
        .hessian
        .expect("hessian requested"))
}

/// Per-observation score vectors, one row per observation.
pub fn score_contributions(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
) -> Result<DMatrix<f64>> {
    Ok(evaluate(spec, params, data, Order::Scores)?
        .scores
        .expect("scores requested"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    Gradient,
    Hessian,
    Scores,
}

#[derive(Debug, Clone)]
pub(crate) struct Evaluation {
    pub loglik: LogLik,
    pub gradient: DVector<f64>,
    pub hessian: Option<DMatrix<f64>>,
    pub scores: Option<DMatrix<f64>>,
}

/// First and second derivatives of `ln p` with respect to the two
/// threshold arguments `u = γ_j − η` and `l = γ_{j-1} − η`.
struct CellDerivs {
    log_p: f64,
    clamped: bool,
    /// `f(u)/p`
    a: f64,
    /// `f(l)/p`
    b: f64,
    d_uu: f64,
    d_ll: f64,
    d_ul: f64,
}

fn cell_derivs(link: Link, lower: f64, upper: f64) -> CellDerivs {
    let raw = log_interval_prob(link, lower, upper);
    let (log_p, clamped) = clamp_log_prob(raw);
    let ratio = |w: f64| {
        if w.is_infinite() || !raw.is_finite() {
            (0.0, 0.0)
        } else {
            let r = (link.log_pdf(w) - raw).exp();
            (r, r * link.pdf_slope_ratio(w))
        }
    };
    let (a, a_slope) = ratio(upper);
    let (b, b_slope) = ratio(lower);
    CellDerivs {
        log_p,
        clamped,
        a,
        b,
        d_uu: a_slope - a * a,
        d_ll: -b_slope - b * b,
        d_ul: a * b,
    }
}

pub(crate) fn evaluate(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &Dataset,
    order: Order,
) -> Result<Evaluation> {
    spec.check_data(data)?;
    spec.check_params(params)?;
    let k = spec.n_covariates;
    let p = spec.n_params();
    let n_cut = spec.n_categories;
    let gamma = params.cutpoints();
    let exp_delta: Vec<f64> = params.delta.iter().map(|d| d.exp()).collect();
    let eta = data.x() * &params.beta;
    let x = data.x();

    let mut value = 0.0;
    let mut clamp_count = 0;
    let mut gradient = vec![0.0; p];
    let mut hessian = (order == Order::Hessian).then(|| vec![0.0; p * p]);
    let mut scores = (order == Order::Scores).then(|| DMatrix::zeros(data.n(), p));
    let mut du = vec![0.0; p];
    let mut dl = vec![0.0; p];
    let mut gi = vec![0.0; p];

    for (i, &y) in data.y().iter().enumerate() {
        let upper = gamma[y] - eta[i];
        let lower = gamma[y - 1] - eta[i];
        let c = cell_derivs(spec.link, lower, upper);
        value += c.log_p;
        clamp_count += usize::from(c.clamped);

        // ∂u/∂θ and ∂l/∂θ: −x on β, cumulative exp(δ) on the cut-point block.
        threshold_jacobian(x, i, k, y, n_cut, &exp_delta, &mut du);
        threshold_jacobian(x, i, k, y - 1, n_cut, &exp_delta, &mut dl);

        for t in 0..p {
            gi[t] = c.a * du[t] - c.b * dl[t];
            gradient[t] += gi[t];
        }
        if let Some(s) = scores.as_mut() {
            for t in 0..p {
                s[(i, t)] = gi[t];
            }
        }
        if let Some(h) = hessian.as_mut() {
            for r in 0..p {
                let (ur, lr) = (du[r], dl[r]);
                let row_u = c.d_uu * ur + c.d_ul * lr;
                let row_l = c.d_ll * lr + c.d_ul * ur;
                if row_u == 0.0 && row_l == 0.0 {
                    continue;
                }
                for s in 0..=r {
                    h[r * p + s] += row_u * du[s] + row_l * dl[s];
                }
            }
            // curvature of γ in δ: ∂²γ_m/∂δ_r² = exp(δ_r) for r ≤ m
            for r in k..p {
                h[r * p + r] += c.a * du[r] - c.b * dl[r];
            }
        }
    }

    let hessian = hessian.map(|h| {
        let mut m = DMatrix::from_row_slice(p, p, &h);
        for r in 0..p {
            for s in 0..r {
                m[(s, r)] = m[(r, s)];
            }
        }
        m
    });
    Ok(Evaluation {
        loglik: LogLik { value, clamp_count },
        gradient: DVector::from_vec(gradient),
        hessian,
        scores,
    })
}

/// Fills `out` with `∂(γ_m − x_i'β)/∂θ`.
#[inline]
fn threshold_jacobian(
    x: &DMatrix<f64>,
    i: usize,
    k: usize,
    m: usize,
    n_categories: usize,
    exp_delta: &[f64],
    out: &mut [f64],
) {
    for (c, o) in out[..k].iter_mut().enumerate() {
        *o = -x[(i, c)];
    }
    // free thresholds are γ_2..γ_{J-1}; δ_r sits at out[k + r - 2]
    let free_upto = if (2..n_categories).contains(&m) { m } else { 1 };
    for (r, o) in out[k..].iter_mut().enumerate() {
        *o = if r + 2 <= free_upto {
            exp_delta[r]
        } else {
            0.0
        };
    }
}
