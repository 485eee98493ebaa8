//! Albert–Chib data augmentation for binary and ordinal probit.
//!
//! Each sweep draws the latent utilities `z_i ~ N(x_i'β, 1)` truncated to the
//! interval of the observed category, then `β | z` from its conjugate normal
//! full conditional. Ordinal models add a random-walk Metropolis–Hastings step
//! on the cut-point log-spacings `δ`, whose target is the prior times the
//! likelihood with `z` integrated out.

use std::fmt::Write as _;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::distributions::{trunc_norm_sample, Link};
use crate::error::{Error, Result};
use crate::estimation::start_values;
use crate::likelihood::{cutpoints_from_delta, loglik_from_index, ModelSpec};

pub const DEFAULT_BETA_VARIANCE: f64 = 100.0;
pub const DEFAULT_DELTA_VARIANCE: f64 = 25.0;
pub const DEFAULT_DRAWS: usize = 11_000;
pub const DEFAULT_BURN: usize = 1_000;
pub const DEFAULT_MH_STEP: f64 = 0.1;

/// `β ~ N(b₀, B₀)`, `δ_j ~ N(0, delta_variance)` independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub beta_mean: DVector<f64>,
    pub beta_cov: DMatrix<f64>,
    pub delta_variance: f64,
}

impl PriorSpec {
    /// Zero mean, covariance `100·I` for `β`; variance 25 for each `δ_j`.
    pub fn diffuse(k: usize) -> Self {
        PriorSpec {
            beta_mean: DVector::zeros(k),
            beta_cov: DMatrix::identity(k, k) * DEFAULT_BETA_VARIANCE,
            delta_variance: DEFAULT_DELTA_VARIANCE,
        }
    }

    fn validate(&self, k: usize) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        if self.beta_mean.len() != k || self.beta_cov.shape() != (k, k) {
            return Err(Error::domain(format!(
                "prior dimensions do not match {k} coefficients"
            )));
        }
        if !(self.delta_variance > 0.0) {
            return Err(Error::domain("cut-point prior variance must be positive"));
        }
        let asym = (&self.beta_cov - self.beta_cov.transpose()).amax();
        if asym > 1e-12 * self.beta_cov.amax().max(1.0) {
            return Err(Error::domain("prior covariance must be symmetric"));
        }
        Cholesky::new(self.beta_cov.clone())
            .ok_or_else(|| Error::domain("prior covariance must be positive definite"))
    }
}

/// Stored draws of one chain, burn-in included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDraws {
    pub names: Vec<String>,
    pub n_categories: usize,
    /// `S × k`
    pub beta: DMatrix<f64>,
    /// `S × (J − 2)` cut-point log-spacings.
    pub delta: DMatrix<f64>,
    pub acceptance_rate: f64,
    pub burn: usize,
    pub seed: Option<u64>,
    /// Latent utilities from the final sweep.
    pub latent_z: Option<Vec<f64>>,
}

impl ChainDraws {
    pub fn n_draws(&self) -> usize {
        self.beta.nrows()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// `S × (J − 2)` interior cut-points `γ_2, …, γ_{J-1}`.
    pub fn cutpoint_draws(&self) -> DMatrix<f64> {
        let s = self.delta.nrows();
        let m = self.delta.ncols();
        let mut out = DMatrix::zeros(s, m);
        for r in 0..s {
            let mut acc = 0.0;
            for c in 0..m {
                acc += self.delta[(r, c)].exp();
                out[(r, c)] = acc;
            }
        }
        out
    }

    /// One row per draw: `draw`, coefficients, `delta_j`, `cut_j`.
    pub fn to_csv(&self) -> String {
        let cuts = self.cutpoint_draws();
        let mut out = String::from("draw");
        for n in &self.names {
            out.push(',');
            out.push_str(&csv_field(n));
        }
        for j in 2..self.n_categories {
            let _ = write!(out, ",delta{j}");
        }
        for j in 2..self.n_categories {
            let _ = write!(out, ",cut{j}");
        }
        out.push('\n');
        for r in 0..self.n_draws() {
            let _ = write!(out, "{}", r + 1);
            for v in self
                .beta
                .row(r)
                .iter()
                .chain(self.delta.row(r).iter())
                .chain(cuts.row(r).iter())
            {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn check_run(draws: usize, burn: usize) -> Result<()> {
    if draws == 0 || burn >= draws {
        return Err(Error::domain(format!(
            "need draws > burn-in ≥ 0, got draws = {draws}, burn = {burn}"
        )));
    }
    Ok(())
}

/// Conjugate update for `β | z`.
struct BetaStep {
    chol: Cholesky<f64, nalgebra::Dyn>,
    /// lower factor of the posterior precision
    lower: DMatrix<f64>,
    prior_term: DVector<f64>,
}

impl BetaStep {
    fn new(data: &Dataset, prior: &PriorSpec) -> Result<Self> {
        let prior_chol = prior.validate(data.k())?;
        let prior_prec = prior_chol.inverse();
        let prior_term = &prior_prec * &prior.beta_mean;
        let precision = prior_prec + data.x().tr_mul(data.x());
        let chol = Cholesky::new(precision).ok_or_else(|| {
            Error::Numeric("posterior precision of β is not positive definite".into())
        })?;
        let lower = chol.l();
        Ok(BetaStep {
            chol,
            lower,
            prior_term,
        })
    }

    fn draw<R: Rng + ?Sized>(
        &self,
        x: &DMatrix<f64>,
        z: &DVector<f64>,
        rng: &mut R,
    ) -> DVector<f64> {
        let mean = self.chol.solve(&(&self.prior_term + x.tr_mul(z)));
        let eps = DVector::from_iterator(
            mean.len(),
            (0..mean.len()).map(|_| rng.sample(StandardNormal)),
        );
        let noise = self
            .lower
            .tr_solve_lower_triangular(&eps)
            .expect("cholesky factor has a positive diagonal");
        mean + noise
    }
}

/// Gibbs sampler for the binary probit model (`J = 2`).
pub fn gibbs_binary_probit<R: Rng + ?Sized>(
    data: &Dataset,
    prior: &PriorSpec,
    draws: usize,
    burn: usize,
    rng: &mut R,
) -> Result<ChainDraws> {
    check_run(draws, burn)?;
    if data.n_categories() != 2 {
        return Err(Error::domain(format!(
            "binary sampler needs 2 categories, got {}",
            data.n_categories()
        )));
    }
    let step = BetaStep::new(data, prior)?;
    let x = data.x();
    let k = data.k();
    let mut beta = DVector::zeros(k);
    let mut z = DVector::zeros(data.n());
    let mut out = DMatrix::zeros(draws, k);

    for s in 0..draws {
        let eta = x * &beta;
        for (i, &y) in data.y().iter().enumerate() {
            z[i] = if y == 2 {
                trunc_norm_sample(eta[i], 0.0, f64::INFINITY, rng)?
            } else {
                trunc_norm_sample(eta[i], f64::NEG_INFINITY, 0.0, rng)?
            };
        }
        beta = step.draw(x, &z, rng);
        out.row_mut(s).copy_from(&beta.transpose());
    }

    Ok(ChainDraws {
        names: data.names().to_vec(),
        n_categories: 2,
        beta: out,
        delta: DMatrix::zeros(draws, 0),
        acceptance_rate: 1.0,
        burn,
        seed: None,
        latent_z: Some(z.iter().copied().collect()),
    })
}

/// Gibbs sampler with a Metropolis–Hastings cut-point block for the ordinal
/// probit model (`J ≥ 3`).
pub fn gibbs_ordinal_probit<R: Rng + ?Sized>(
    data: &Dataset,
    prior: &PriorSpec,
    draws: usize,
    burn: usize,
    mh_step: f64,
    rng: &mut R,
) -> Result<ChainDraws> {
    check_run(draws, burn)?;
    if !(mh_step > 0.0) || !mh_step.is_finite() {
        return Err(Error::domain(format!(
            "mh_step must be positive, got {mh_step}"
        )));
    }
    let j = data.n_categories();
    if j < 3 {
        return Err(Error::domain(
            "ordinal sampler needs at least 3 categories; use gibbs_binary_probit for binary data",
        ));
    }
    let spec = ModelSpec::ordinal(Link::Probit, j, data.k(), data.has_intercept())?;
    let step = BetaStep::new(data, prior)?;
    let x = data.x();
    let y = data.y();
    let k = data.k();
    let m = j - 2;

    let start = start_values(&spec, data)?;
    let mut beta = start.beta;
    let mut delta = start.delta;
    let mut gamma = cutpoints_from_delta(delta.as_slice());
    let mut z = DVector::zeros(data.n());
    let mut out_beta = DMatrix::zeros(draws, k);
    let mut out_delta = DMatrix::zeros(draws, m);
    let mut accepted = 0usize;

    let log_prior = |d: &DVector<f64>| -0.5 * d.norm_squared() / prior.delta_variance;

    let mut eta = x * &beta;
    for s in 0..draws {
        for (i, &yi) in y.iter().enumerate() {
            z[i] = trunc_norm_sample(eta[i], gamma[yi - 1], gamma[yi], rng)?;
        }
        debug_assert!(y
            .iter()
            .zip(z.iter())
            .all(|(&yi, &zi)| gamma[yi - 1] < zi && zi <= gamma[yi]));

        beta = step.draw(x, &z, rng);
        eta = x * &beta;

        let proposal = DVector::from_iterator(
            m,
            delta
                .iter()
                .map(|d| d + mh_step * rng.sample::<f64, _>(StandardNormal)),
        );
        let proposal_gamma = cutpoints_from_delta(proposal.as_slice());
        let current =
            loglik_from_index(Link::Probit, eta.as_slice(), y, &gamma) + log_prior(&delta);
        let candidate = loglik_from_index(Link::Probit, eta.as_slice(), y, &proposal_gamma)
            + log_prior(&proposal);
        let u: f64 = rng.sample(Open01);
        if u.ln() < candidate - current {
            delta = proposal;
            gamma = proposal_gamma;
            accepted += 1;
        }
        debug_assert!(gamma.windows(2).all(|w| w[0] < w[1]));

        out_beta.row_mut(s).copy_from(&beta.transpose());
        out_delta.row_mut(s).copy_from(&delta.transpose());
    }

    Ok(ChainDraws {
        names: data.names().to_vec(),
        n_categories: j,
        beta: out_beta,
        delta: out_delta,
        acceptance_rate: accepted as f64 / draws as f64,
        burn,
        seed: None,
        latent_z: Some(z.iter().copied().collect()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub draws: usize,
    pub burn: usize,
    pub acceptance_rate: f64,
    pub seed: Option<u64>,
    pub params: Vec<ParamSummary>,
}

/// Minimum post-burn-in draws for [`posterior_summary`].
pub const MIN_SUMMARY_DRAWS: usize = 100;

/// Linear interpolation between order statistics (`h = (m − 1)·q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarize(name: String, values: impl Iterator<Item = f64>) -> ParamSummary {
    let mut v: Vec<f64> = values.collect();
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    v.sort_by(f64::total_cmp);
    ParamSummary {
        name,
        mean,
        sd: var.sqrt(),
        q025: quantile_sorted(&v, 0.025),
        q50: quantile_sorted(&v, 0.5),
        q975: quantile_sorted(&v, 0.975),
    }
}

/// Mean, sd and 2.5/50/97.5% quantiles of each coefficient and interior
/// cut-point over the post-burn-in draws.
pub fn posterior_summary(chain: &ChainDraws) -> Result<PosteriorSummary> {
    let s = chain.n_draws();
    let kept = s.saturating_sub(chain.burn);
    if kept < MIN_SUMMARY_DRAWS {
        return Err(Error::domain(format!(
            "posterior summary needs at least {MIN_SUMMARY_DRAWS} post-burn-in draws, have {kept}"
        )));
    }
    let cuts = chain.cutpoint_draws();
    let mut params = Vec::with_capacity(chain.beta.ncols() + cuts.ncols());
    for (c, name) in chain.names.iter().enumerate() {
        params.push(summarize(
            name.clone(),
            (chain.burn..s).map(|r| chain.beta[(r, c)]),
        ));
    }
    for c in 0..cuts.ncols() {
        params.push(summarize(
            format!("cut{}", c + 2),
            (chain.burn..s).map(|r| cuts[(r, c)]),
        ));
    }
    Ok(PosteriorSummary {
        draws: s,
        burn: chain.burn,
        acceptance_rate: chain.acceptance_rate,
        seed: chain.seed,
        params,
    })
}

impl PosteriorSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let w = self
            .params
            .iter()
            .map(|p| p.name.chars().count())
            .max()
            .unwrap_or(0)
            .max(12);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "posterior summary: {} draws, {} burn-in, cut-point acceptance {:.4}",
            self.draws, self.burn, self.acceptance_rate
        );
        let _ = writeln!(
            out,
            "{:<w$} {:>10} {:>10} {:>10} {:>10} {:>10}",
            "", "mean", "sd", "2.5%", "50%", "97.5%"
        );
        for p in &self.params {
            let _ = writeln!(
                out,
                "{:<w$} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                p.name, p.mean, p.sd, p.q025, p.q50, p.q975
            );
        }
        out
    }
}
