use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::fit::FitResult;
use super::stats::two_sided_p;

/// `**` for p < 0.05, `*` for p < 0.10.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub stars: String,
}

/// Serializable view of a [`FitResult`]; the text table is rendered from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: String,
    pub link: String,
    pub n_obs: usize,
    pub n_categories: usize,
    pub coefficients: Vec<CoefficientRow>,
    pub cutpoints: Vec<CoefficientRow>,
    pub loglik_fit: f64,
    pub loglik_0: f64,
    pub lr_stat: f64,
    pub lr_df: usize,
    pub lr_pvalue: f64,
    pub mcfadden_r2: f64,
    pub hit_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub clamp_count: usize,
}

impl FitReport {
    /// `names` labels the design columns; cut-points are labelled `cut2`, ….
    pub fn new(fit: &FitResult, names: &[String]) -> FitReport {
        let estimates = fit.estimates();
        let k = fit.spec.n_covariates;
        let row = |i: usize, name: String| {
            let estimate = estimates[i];
            let std_error = fit.se[i];
            let z = estimate / std_error;
            let p_value = two_sided_p(z);
            CoefficientRow {
                name,
                estimate,
                std_error,
                z,
                p_value,
                stars: significance_stars(p_value).to_string(),
            }
        };
        let coefficients = (0..k)
            .map(|i| {
                let name = names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
                row(i, name)
            })
            .collect();
        let cutpoints = (k..estimates.len())
            .map(|i| row(i, format!("cut{}", i - k + 2)))
            .collect();
        FitReport {
            family: fit.spec.family.to_string(),
            link: fit.spec.link.to_string(),
            n_obs: fit.n_obs,
            n_categories: fit.spec.n_categories,
            coefficients,
            cutpoints,
            loglik_fit: fit.loglik_fit,
            loglik_0: fit.loglik_0,
            lr_stat: fit.lr_stat,
            lr_df: fit.lr_df,
            lr_pvalue: fit.lr_pvalue,
            mcfadden_r2: fit.mcfadden_r2,
            hit_rate: fit.hit_rate,
            iterations: fit.iterations,
            converged: fit.converged,
            clamp_count: fit.clamp_count,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned plain-text table, numbers to four decimals.
    pub fn to_text(&self) -> String {
        let width = self
            .coefficients
            .iter()
            .chain(&self.cutpoints)
            .map(|r| r.name.chars().count())
            .max()
            .unwrap_or(0)
            .max(12);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} model: n = {}, J = {}",
            self.family, self.link, self.n_obs, self.n_categories
        );
        let rule = "-".repeat(width + 52);
        let _ = writeln!(out, "{rule}");
        let _ = writeln!(
            out,
            "{:<width$} {:>12} {:>12} {:>10} {:>10}  ",
            "", "estimate", "std.err", "z", "p"
        );
        let _ = writeln!(out, "{rule}");
        for r in self.coefficients.iter().chain(&self.cutpoints) {
            let _ = writeln!(
                out,
                "{:<width$} {:>12.4} {:>12.4} {:>10.4} {:>10.4}  {}",
                r.name, r.estimate, r.std_error, r.z, r.p_value, r.stars
            );
        }
        let _ = writeln!(out, "{rule}");
        let _ = writeln!(out, "{:<24}{:.4}", "log-likelihood", self.loglik_fit);
        let _ = writeln!(out, "{:<24}{:.4}", "log-likelihood (null)", self.loglik_0);
        let _ = writeln!(
            out,
            "{:<24}{:.4} (df = {}, p = {:.4})",
            "LR statistic", self.lr_stat, self.lr_df, self.lr_pvalue
        );
        let _ = writeln!(out, "{:<24}{:.4}", "McFadden R2", self.mcfadden_r2);
        let _ = writeln!(out, "{:<24}{:.4}", "hit-rate", self.hit_rate);
        let _ = writeln!(
            out,
            "{:<24}{} ({} iterations{})",
            "converged",
            if self.converged { "yes" } else { "no" },
            self.iterations,
            if self.clamp_count > 0 {
                format!(", {} clamped cells", self.clamp_count)
            } else {
                String::new()
            }
        );
        let _ = writeln!(out, "** p < 0.05, * p < 0.10");
        out
    }
}

/// Text table for a fit; see [`FitReport::to_text`].
pub fn summary_table(fit: &FitResult, names: &[String]) -> String {
    FitReport::new(fit, names).to_text()
}
