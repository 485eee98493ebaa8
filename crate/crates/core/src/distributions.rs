//! Probability kernels for the two link functions and a truncated-normal sampler.
//!
//! The normal cdf is evaluated as `erfc(-w / sqrt 2) / 2`, which keeps full
//! relative precision in the lower tail. Log-cdf values switch to the Mills-ratio
//! asymptotic series once `Φ(w)` would leave the normal floating-point range.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI, SQRT_2};

use libm::erfc;
use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this point `Φ(w)` is subnormal, so `log Φ` uses the asymptotic series.
const LOG_TAIL_SWITCH: f64 = -37.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Probit,
    Logit,
}

impl Link {
    pub fn name(self) -> &'static str {
        match self {
            Link::Probit => "probit",
            Link::Logit => "logit",
        }
    }

    /// Link cdf. Accepts `±∞`.
    #[inline]
    pub fn cdf(self, w: f64) -> f64 {
        match self {
            Link::Probit => phi_cdf(w),
            Link::Logit => lambda_cdf(w),
        }
    }

    #[inline]
    pub fn pdf(self, w: f64) -> f64 {
        match self {
            Link::Probit => phi_pdf(w),
            Link::Logit => lambda_pdf(w),
        }
    }

    /// `ln F(w)`, finite for every finite `w`.
    #[inline]
    pub fn log_cdf(self, w: f64) -> f64 {
        match self {
            Link::Probit => log_phi_cdf(w),
            Link::Logit => log_lambda_cdf(w),
        }
    }

    #[inline]
    pub fn log_pdf(self, w: f64) -> f64 {
        match self {
            Link::Probit => -0.5 * w * w - LN_SQRT_2PI,
            Link::Logit => log_lambda_cdf(w) + log_lambda_cdf(-w),
        }
    }

    /// `f'(w) / f(w)` for the link density.
    #[inline]
    pub fn pdf_slope_ratio(self, w: f64) -> f64 {
        match self {
            Link::Probit => -w,
            Link::Logit => 1.0 - 2.0 * lambda_cdf(w),
        }
    }

    /// Inverse cdf for `p` in (0, 1).
    pub fn quantile(self, p: f64) -> Result<f64> {
        match self {
            Link::Probit => norm_inv_cdf(p),
            Link::Logit => {
                check_probability(p)?;
                Ok((p / (1.0 - p)).ln())
            }
        }
    }

    /// Draws one error term from the link distribution.
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            Link::Probit => rng.sample(StandardNormal),
            Link::Logit => {
                let u: f64 = rng.sample(Open01);
                (u / (1.0 - u)).ln()
            }
        }
    }
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "probit" => Ok(Link::Probit),
            "logit" => Ok(Link::Logit),
            other => Err(Error::domain(format!("unknown link `{other}`"))),
        }
    }
}

fn check_finite(w: f64, what: &str) -> Result<()> {
    if w.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what} requires a finite argument, got {w}"
        )))
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "probability must lie in (0, 1), got {p}"
        )))
    }
}

/// Standard normal cdf `Φ(w)`.
pub fn norm_cdf(w: f64) -> Result<f64> {
    check_finite(w, "norm_cdf")?;
    Ok(phi_cdf(w))
}

/// Standard normal density `φ(w)`.
pub fn norm_pdf(w: f64) -> Result<f64> {
    check_finite(w, "norm_pdf")?;
    Ok(phi_pdf(w))
}

/// Logistic cdf `Λ(w) = exp(w) / (1 + exp(w))`.
pub fn logistic_cdf(w: f64) -> Result<f64> {
    check_finite(w, "logistic_cdf")?;
    Ok(lambda_cdf(w))
}

/// Logistic density `Λ(w)(1 − Λ(w))`.
pub fn logistic_pdf(w: f64) -> Result<f64> {
    check_finite(w, "logistic_pdf")?;
    Ok(lambda_pdf(w))
}

/// Standard normal quantile `Φ⁻¹(p)`.
pub fn norm_inv_cdf(p: f64) -> Result<f64> {
    check_probability(p)?;
    if p == 0.5 {
        return Ok(0.0);
    }
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    // One Newton step, taken on whichever tail carries the relative precision.
    let density = phi_pdf(x);
    if density > 0.0 {
        let step = if p < 0.5 {
            (phi_cdf(x) - p) / density
        } else {
            ((1.0 - p) - phi_cdf(-x)) / density
        };
        if step.is_finite() {
            return Ok(x - step);
        }
    }
    Ok(x)
}

#[inline]
pub(crate) fn phi_cdf(w: f64) -> f64 {
    if w == f64::INFINITY {
        1.0
    } else if w == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-w * FRAC_1_SQRT_2)
    }
}

#[inline]
pub(crate) fn phi_pdf(w: f64) -> f64 {
    if w.is_infinite() {
        0.0
    } else {
        INV_SQRT_2PI * (-0.5 * w * w).exp()
    }
}

pub(crate) fn log_phi_cdf(w: f64) -> f64 {
    if w == f64::INFINITY {
        0.0
    } else if w == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if w > 0.0 {
        (-phi_cdf(-w)).ln_1p()
    } else if w > LOG_TAIL_SWITCH {
        phi_cdf(w).ln()
    } else {
        // Φ(w) = φ(w)/|w| · (1 − 1/w² + 3/w⁴ − 15/w⁶ + …)
        let r = 1.0 / (w * w);
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..8 {
            term *= -((2 * k - 1) as f64) * r;
            series += term;
        }
        -0.5 * w * w - LN_SQRT_2PI - (-w).ln() + series.ln()
    }
}

#[inline]
pub(crate) fn lambda_cdf(w: f64) -> f64 {
    if w >= 0.0 {
        1.0 / (1.0 + (-w).exp())
    } else {
        let e = w.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn lambda_pdf(w: f64) -> f64 {
    if w.is_infinite() {
        return 0.0;
    }
    let e = (-w.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

#[inline]
pub(crate) fn log_lambda_cdf(w: f64) -> f64 {
    if w >= 0.0 {
        -(-w).exp().ln_1p()
    } else {
        w - w.exp().ln_1p()
    }
}

/// `ln(1 − exp(x))` for `x ≤ 0`.
#[inline]
pub(crate) fn ln_1m_exp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Draws from a unit-variance normal with mean `mean`, truncated to
/// `(lower, upper]`. Either bound may be infinite.
///
/// Uses the mixed rejection scheme of Robert (1995): normal rejection when the
/// interval straddles the mean widely, uniform rejection on short intervals and
/// translated-exponential rejection in the tails.
pub fn trunc_norm_sample<R: Rng + ?Sized>(
    mean: f64,
    lower: f64,
    upper: f64,
    rng: &mut R,
) -> Result<f64> {
    check_finite(mean, "trunc_norm_sample")?;
    if lower.is_nan() || upper.is_nan() || lower >= upper {
        return Err(Error::domain(format!(
            "truncation interval ({lower}, {upper}] is empty"
        )));
    }
    loop {
        let z = std_trunc_norm(lower - mean, upper - mean, rng);
        let x = mean + z;
        if x > lower && x <= upper {
            return Ok(x);
        }
    }
}

fn std_trunc_norm<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if b <= 0.0 {
        return -std_trunc_norm_upper(-b, -a, rng);
    }
    if a < 0.0 {
        if b - a >= (2.0 * PI).sqrt() {
            loop {
                let z: f64 = rng.sample(StandardNormal);
                if z > a && z <= b {
                    return z;
                }
            }
        }
        loop {
            let z = uniform_between(a, b, rng);
            let u: f64 = rng.sample(Open01);
            if u <= (-0.5 * z * z).exp() {
                return z;
            }
        }
    }
    std_trunc_norm_upper(a, b, rng)
}

/// Truncation to `[a, b]` with `a ≥ 0`.
fn std_trunc_norm_upper<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let root = (a * a + 4.0).sqrt();
    let alpha = 0.5 * (a + root);
    let uniform_width = 2.0 * 0.5f64.exp().sqrt() / (a + root) * ((a * a - a * root) / 4.0).exp();
    if b.is_finite() && b - a < uniform_width {
        loop {
            let z = uniform_between(a, b, rng);
            let u: f64 = rng.sample(Open01);
            if u <= (0.5 * (a * a - z * z)).exp() {
                return z;
            }
        }
    }
    loop {
        let e: f64 = rng.sample(Exp1);
        let z = a + e / alpha;
        if z > b {
            continue;
        }
        let u: f64 = rng.sample(Open01);
        let d = z - alpha;
        if u <= (-0.5 * d * d).exp() {
            return z;
        }
    }
}

#[inline]
fn uniform_between<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    a + (b - a) * u
}
