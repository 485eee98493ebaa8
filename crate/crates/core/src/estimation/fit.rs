use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::stats::{hit_rate, lr_test, mcfadden_r2};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{
    evaluate, loglik_with_diagnostics, Evaluation, ModelSpec, Order, ParamVector,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence requires `‖∇ℓ‖∞` below this.
    pub grad_tol: f64,
    /// Iteration stops once an accepted step moves no parameter further than this.
    pub step_tol: f64,
    /// First ridge tried when `−H` is not positive definite.
    pub ridge_start: f64,
    pub ridge_factor: f64,
    pub ridge_max: f64,
    pub max_halvings: usize,
    /// Largest Newton step, relative to `1 + |θ|∞`, still counted as converged.
    pub newton_step_tol: f64,
    /// `|β|` beyond which a still-improving fit is reported as separated.
    pub separation_bound: f64,
    pub verbose: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 100,
            grad_tol: 1e-8,
            step_tol: 1e-10,
            ridge_start: 1e-6,
            ridge_factor: 10.0,
            ridge_max: 1e12,
            max_halvings: 30,
            newton_step_tol: 1e-4,
            separation_bound: 30.0,
            verbose: false,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::domain("max_iter must be at least 1"));
        }
        for (name, v) in [
            ("grad_tol", self.grad_tol),
            ("step_tol", self.step_tol),
            ("ridge_start", self.ridge_start),
            ("newton_step_tol", self.newton_step_tol),
            ("separation_bound", self.separation_bound),
        ] {
            if !(v > 0.0) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.ridge_factor > 1.0) || !(self.ridge_max >= self.ridge_start) {
            return Err(Error::domain("ridge schedule must grow"));
        }
        Ok(())
    }
}

/// Maximum-likelihood fit with goodness-of-fit statistics.
///
/// `se` and `vcov` refer to `(β, γ_2, …, γ_{J-1})`: the cut-points themselves,
/// not their log-spacings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub params: ParamVector,
    pub coef_names: Vec<String>,
    pub se: DVector<f64>,
    pub vcov: DMatrix<f64>,
    pub n_obs: usize,
    pub loglik_fit: f64,
    pub loglik_0: f64,
    pub lr_stat: f64,
    pub lr_df: usize,
    pub lr_pvalue: f64,
    pub mcfadden_r2: f64,
    pub hit_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub gradient_norm: f64,
    pub clamp_count: usize,
}

impl FitResult {
    /// Estimates on the reporting scale: `β` followed by interior cut-points.
    pub fn estimates(&self) -> DVector<f64> {
        let cuts = self.params.interior_cutpoints();
        DVector::from_iterator(
            self.params.beta.len() + cuts.len(),
            self.params.beta.iter().copied().chain(cuts),
        )
    }

    /// Labels for [`FitResult::estimates`]: coefficient names then `cut2`, `cut3`, ….
    pub fn param_names(&self) -> Vec<String> {
        let mut names = self.coef_names.clone();
        names.extend((2..self.spec.n_categories).map(|j| format!("cut{j}")));
        names
    }
}

/// Outcome of the Newton iterations alone.
#[derive(Debug, Clone)]
pub(crate) struct Optimum {
    pub params: ParamVector,
    pub eval: Evaluation,
    pub iterations: usize,
    pub converged: bool,
    pub neg_hessian_chol: Option<Cholesky<f64, Dyn>>,
}

pub fn fit_ml(spec: &ModelSpec, data: &Dataset, opts: &FitOptions) -> Result<FitResult> {
    check_estimable(spec, data)?;
    let full = maximize(spec, data, opts)?;
    let null_data = data.intercept_only();
    let null_spec = ModelSpec::new(
        spec.family,
        spec.link,
        spec.n_categories,
        null_data.k(),
        spec.intercept,
    )?;
    let loglik_0 = if null_data.k() == data.k() {
        full.eval.loglik.value
    } else {
        maximize(&null_spec, &null_data, opts)?.eval.loglik.value
    };
    finish(spec, data, full, loglik_0)
}

/// Fit with the design reduced to the intercept (cut-points stay free).
pub fn fit_intercept_only(
    spec: &ModelSpec,
    data: &Dataset,
    opts: &FitOptions,
) -> Result<FitResult> {
    spec.check_data(data)?;
    let reduced = data.intercept_only();
    let reduced_spec = ModelSpec::new(
        spec.family,
        spec.link,
        spec.n_categories,
        reduced.k(),
        spec.intercept,
    )?;
    fit_ml(&reduced_spec, &reduced, opts)
}

fn check_estimable(spec: &ModelSpec, data: &Dataset) -> Result<()> {
    spec.check_data(data)?;
    for (c, &count) in data.category_counts().iter().enumerate() {
        if count == 0 {
            return Err(Error::MissingCategory {
                category: c + 1,
                label: data.labels()[c].clone(),
            });
        }
    }
    if data.n() <= spec.n_params() {
        return Err(Error::Estimation(format!(
            "{} observations cannot identify {} parameters",
            data.n(),
            spec.n_params()
        )));
    }
    Ok(())
}

fn finish(spec: &ModelSpec, data: &Dataset, opt: Optimum, loglik_0: f64) -> Result<FitResult> {
    let loglik_fit = opt.eval.loglik.value;
    let k = spec.n_covariates;
    let p = spec.n_params();

    let vcov_delta = match &opt.neg_hessian_chol {
        Some(chol) => Some(chol.inverse()),
        None => opt.eval.hessian.as_ref().and_then(|h| (-h).try_inverse()),
    }
    .unwrap_or_else(|| DMatrix::from_element(p, p, f64::NAN));
    // delta method onto the cut-point scale: ∂γ_m/∂δ_r = exp(δ_r) for r ≤ m
    let mut jac = DMatrix::identity(p, p);
    for m in 0..p - k {
        for r in 0..=m {
            jac[(k + m, k + r)] = opt.params.delta[r].exp();
        }
    }
    let mut vcov = &jac * vcov_delta * jac.transpose();
    vcov = (&vcov + vcov.transpose()) * 0.5;
    let se = DVector::from_iterator(
        p,
        (0..p).map(|i| {
            let v = vcov[(i, i)];
            if v >= 0.0 {
                v.sqrt()
            } else {
                f64::NAN
            }
        }),
    );

    let lr_df = k - usize::from(spec.intercept);
    let (lr_stat, lr_pvalue) = if lr_df == 0 {
        (0.0, 1.0)
    } else {
        lr_test(loglik_0, loglik_fit.max(loglik_0), lr_df)?
    };
    let mcfadden = mcfadden_r2(loglik_0, loglik_fit.max(loglik_0))?;
    let gradient_norm = opt.eval.gradient.amax();

    Ok(FitResult {
        spec: *spec,
        hit_rate: hit_rate(spec, &opt.params, data)?,
        params: opt.params,
        coef_names: data.names().to_vec(),
        se,
        vcov,
        n_obs: data.n(),
        loglik_fit,
        loglik_0,
        lr_stat,
        lr_df,
        lr_pvalue,
        mcfadden_r2: mcfadden,
        iterations: opt.iterations,
        converged: opt.converged,
        gradient_norm,
        clamp_count: opt.eval.loglik.clamp_count,
    })
}

/// Starting point: zero slopes, intercept and cut-points matched to the
/// empirical cumulative category shares.
pub(crate) fn start_values(spec: &ModelSpec, data: &Dataset) -> Result<ParamVector> {
    let mut params = ParamVector::zeros(spec);
    let n = data.n();
    let counts = data.category_counts();
    if n == 0 || counts.contains(&0) {
        return Ok(params);
    }
    let mut cumulative = Vec::with_capacity(counts.len() - 1);
    let mut acc = 0;
    for &c in &counts[..counts.len() - 1] {
        acc += c;
        cumulative.push(spec.link.quantile(acc as f64 / n as f64)?);
    }
    if spec.intercept {
        params.beta[0] = spec.link.quantile((n - counts[0]) as f64 / n as f64)?;
    }
    for r in 0..spec.n_free_cutpoints() {
        params.delta[r] = (cumulative[r + 1] - cumulative[r]).ln();
    }
    Ok(params)
}

fn negative_definite(h: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(-h)
}

/// Small gradient, negative definite Hessian, and a Newton step that has
/// shrunk too. The last condition keeps a diverging fit, whose gradient can
/// underflow the tolerance long before the slopes stop growing, iterating.
fn has_converged(
    eval: &Evaluation,
    theta: &DVector<f64>,
    opts: &FitOptions,
) -> Option<Cholesky<f64, Dyn>> {
    let hessian = eval.hessian.as_ref().expect("hessian evaluated");
    let chol = negative_definite(hessian)?;
    if !(eval.gradient.amax() < opts.grad_tol) {
        return None;
    }
    let step = chol.solve(&eval.gradient);
    let scale = 1.0 + if theta.is_empty() { 0.0 } else { theta.amax() };
    (step.amax() <= opts.newton_step_tol * scale).then_some(chol)
}

/// Solves `(M + τI) d = g` for the smallest τ on the ridge schedule that makes
/// `M + τI` positive definite.
fn ridge_solve(m: &DMatrix<f64>, g: &DVector<f64>, opts: &FitOptions) -> Option<DVector<f64>> {
    let p = m.nrows();
    let mut tau = 0.0;
    loop {
        let shifted = m + DMatrix::identity(p, p) * tau;
        if let Some(chol) = Cholesky::new(shifted) {
            let d = chol.solve(g);
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        tau = if tau == 0.0 {
            opts.ridge_start
        } else {
            tau * opts.ridge_factor
        };
        if tau > opts.ridge_max {
            return None;
        }
    }
}

/// Newton–Raphson with ridge, step halving and a BHHH fallback.
pub(crate) fn maximize(spec: &ModelSpec, data: &Dataset, opts: &FitOptions) -> Result<Optimum> {
    opts.validate()?;
    let k = spec.n_covariates;
    let mut params = start_values(spec, data)?;
    let mut eval = evaluate(spec, &params, data, Order::Hessian)?;
    let mut iterations = 0;

    if spec.n_params() == 0 {
        return Ok(Optimum {
            params,
            eval,
            iterations,
            converged: true,
            neg_hessian_chol: None,
        });
    }

    for _ in 0..opts.max_iter {
        let theta = params.flat();
        if has_converged(&eval, &theta, opts).is_some() {
            break;
        }
        let hessian = eval.hessian.as_ref().expect("hessian evaluated");
        let current = eval.loglik.value;

        let mut accepted = None;
        if let Some(dir) = ridge_solve(&(-hessian), &eval.gradient, opts) {
            accepted = line_search(spec, data, &theta, &dir, current, opts)?;
        }
        if accepted.is_none() {
            let scores = evaluate(spec, &params, data, Order::Scores)?
                .scores
                .expect("scores evaluated");
            let opg = scores.transpose() * &scores;
            if let Some(dir) = ridge_solve(&opg, &eval.gradient, opts) {
                accepted = line_search(spec, data, &theta, &dir, current, opts)?;
            }
        }
        let Some((next, next_ll)) = accepted else {
            if opts.verbose {
                eprintln!("iteration {iterations}: no ascent direction, stopping");
            }
            break;
        };
        iterations += 1;

        let next_params = ParamVector::from_flat(&next, k);
        if next_ll > current {
            if let Some((l, v)) = next_params
                .beta
                .iter()
                .enumerate()
                .find(|(_, v)| v.abs() > opts.separation_bound)
            {
                return Err(Error::Separation {
                    name: data.names()[l].clone(),
                    value: *v,
                });
            }
        }
        let moved = (&next - &theta).amax();
        params = next_params;
        eval = evaluate(spec, &params, data, Order::Hessian)?;
        if opts.verbose {
            eprintln!(
                "iteration {iterations}: loglik {:.10} |grad| {:.3e} step {:.3e}",
                eval.loglik.value,
                eval.gradient.amax(),
                moved
            );
        }
        if moved < opts.step_tol {
            break;
        }
    }

    let converged = has_converged(&eval, &params.flat(), opts).is_some();
    let hessian = eval.hessian.as_ref().expect("hessian evaluated");
    let neg_hessian_chol = negative_definite(hessian);
    Ok(Optimum {
        params,
        eval,
        iterations,
        converged,
        neg_hessian_chol,
    })
}

/// Halves the step until the log-likelihood does not decrease beyond rounding.
fn line_search(
    spec: &ModelSpec,
    data: &Dataset,
    theta: &DVector<f64>,
    dir: &DVector<f64>,
    current: f64,
    opts: &FitOptions,
) -> Result<Option<(DVector<f64>, f64)>> {
    // a summed log-likelihood is only known to about this much
    let slack = 64.0 * f64::EPSILON * (1.0 + current.abs());
    let mut t = 1.0;
    for _ in 0..=opts.max_halvings {
        let candidate = theta + dir * t;
        let params = ParamVector::from_flat(&candidate, spec.n_covariates);
        if params
            .beta
            .iter()
            .chain(params.delta.iter())
            .all(|v| v.is_finite())
        {
            let ll = loglik_with_diagnostics(spec, &params, data)?.value;
            if ll >= current - slack {
                if t == 1.0 && ll > current && params.beta.amax() > opts.separation_bound / 4.0 {
                    return expand(spec, data, theta, dir, candidate, ll, opts).map(Some);
                }
                return Ok(Some((candidate, ll)));
            }
        }
        t *= 0.5;
    }
    Ok(None)
}

/// Keeps doubling a full step while the log-likelihood rises. Only used once
/// a slope is already large, so a diverging fit reaches the separation bound
/// in a handful of iterations rather than creeping towards it.
fn expand(
    spec: &ModelSpec,
    data: &Dataset,
    theta: &DVector<f64>,
    dir: &DVector<f64>,
    mut best: DVector<f64>,
    mut best_ll: f64,
    opts: &FitOptions,
) -> Result<(DVector<f64>, f64)> {
    let mut t = 2.0;
    while t <= 1024.0 {
        let candidate = theta + dir * t;
        let params = ParamVector::from_flat(&candidate, spec.n_covariates);
        if !params
            .beta
            .iter()
            .chain(params.delta.iter())
            .all(|v| v.is_finite())
        {
            break;
        }
        let ll = loglik_with_diagnostics(spec, &params, data)?.value;
        if !(ll > best_ll) {
            break;
        }
        best = candidate;
        best_ll = ll;
        if params.beta.amax() > opts.separation_bound {
            break;
        }
        t *= 2.0;
    }
    Ok((best, best_ll))
}
