//! Schema files describing how a survey table becomes a [`Dataset`](super::Dataset).
//!
//! Line-oriented `key = value` text. Blank lines and lines starting with `#`
//! are ignored; list values are separated by `|`.
//!
//! ```text
//! response  = legal
//! labels    = oppose | medicinal | personal
//! missing   = don't know | refused
//! covariate.age    = continuous
//! covariate.income = log
//! covariate.region = categorical:northeast
//! covariate.party  = categorical:independent | democrat | republican
//! intercept = true
//! ```
//!
//! `labels` lists the response categories from lowest to highest. A
//! categorical directive names its base level after the colon; further
//! `|`-separated entries fix the non-base levels and their column order,
//! otherwise the levels seen in the retained rows are used in sorted order.
//! Covariates enter the design in the order they appear in the file.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Continuous,
    Log,
    Categorical {
        base: String,
        levels: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaConfig {
    pub response: String,
    pub labels: Vec<String>,
    pub missing: Vec<String>,
    pub covariates: Vec<(String, Directive)>,
    pub intercept: bool,
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split('|')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

impl SchemaConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut response = None;
        let mut labels = None;
        let mut missing = Vec::new();
        let mut covariates: Vec<(String, Directive)> = Vec::new();
        let mut intercept = true;
        let mut seen = HashSet::new();

        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Schema(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            match key {
                "response" => response = Some(value.to_string()),
                "labels" => labels = Some(split_list(value)),
                "missing" => missing = split_list(value),
                "intercept" => {
                    intercept = match value.to_ascii_lowercase().as_str() {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(err(format!(
                                "intercept must be true or false, got `{other}`"
                            )))
                        }
                    }
                }
                _ => {
                    let name = key
                        .strip_prefix("covariate.")
                        .filter(|n| !n.trim().is_empty())
                        .ok_or_else(|| err(format!("unknown key `{key}`")))?;
                    let directive = parse_directive(value).map_err(err)?;
                    covariates.push((name.trim().to_string(), directive));
                }
            }
        }

        let schema = SchemaConfig {
            response: response.ok_or_else(|| Error::Schema("missing `response` key".into()))?,
            labels: labels.ok_or_else(|| Error::Schema("missing `labels` key".into()))?,
            missing,
            covariates,
            intercept,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.response.is_empty() {
            return Err(Error::Schema("response column name is empty".into()));
        }
        if self.labels.len() < 2 {
            return Err(Error::Schema(format!(
                "need at least two response labels, got {}",
                self.labels.len()
            )));
        }
        let mut distinct = HashSet::new();
        if let Some(dup) = self.labels.iter().find(|l| !distinct.insert(l.as_str())) {
            return Err(Error::Schema(format!("response label `{dup}` is repeated")));
        }
        let mut names = HashSet::new();
        for (name, directive) in &self.covariates {
            if name == &self.response {
                return Err(Error::Schema(format!(
                    "`{name}` is both response and covariate"
                )));
            }
            if !names.insert(name.as_str()) {
                return Err(Error::Schema(format!("covariate `{name}` is listed twice")));
            }
            if let Directive::Categorical {
                base,
                levels: Some(levels),
            } = directive
            {
                let mut seen = HashSet::new();
                for l in levels {
                    if l == base || !seen.insert(l.as_str()) {
                        return Err(Error::Schema(format!(
                            "covariate `{name}`: level `{l}` repeats or equals the base"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes back to the file grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "response = {}", self.response);
        let _ = writeln!(out, "labels = {}", self.labels.join(" | "));
        if !self.missing.is_empty() {
            let _ = writeln!(out, "missing = {}", self.missing.join(" | "));
        }
        for (name, d) in &self.covariates {
            let v = match d {
                Directive::Continuous => "continuous".to_string(),
                Directive::Log => "log".to_string(),
                Directive::Categorical { base, levels: None } => format!("categorical:{base}"),
                Directive::Categorical {
                    base,
                    levels: Some(levels),
                } => format!("categorical:{base} | {}", levels.join(" | ")),
            };
            let _ = writeln!(out, "covariate.{name} = {v}");
        }
        let _ = writeln!(out, "intercept = {}", self.intercept);
        out
    }
}

impl std::str::FromStr for SchemaConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemaConfig::parse(s)
    }
}

fn parse_directive(value: &str) -> std::result::Result<Directive, String> {
    match value {
        "continuous" => Ok(Directive::Continuous),
        "log" => Ok(Directive::Log),
        _ => {
            let rest = value
                .strip_prefix("categorical:")
                .ok_or_else(|| format!("unknown covariate directive `{value}`"))?;
            let mut parts = split_list(rest).into_iter();
            let base = parts
                .next()
                .ok_or_else(|| "categorical directive needs a base label".to_string())?;
            let levels: Vec<String> = parts.collect();
            Ok(Directive::Categorical {
                base,
                levels: (!levels.is_empty()).then_some(levels),
            })
        }
    }
}
