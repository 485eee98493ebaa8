use std::collections::{BTreeSet, HashSet};

use nalgebra::DMatrix;
use serde::Serialize;

use super::dataset::{ColumnKind, Dataset};
use super::schema::{Directive, SchemaConfig};
use super::table::RawTable;
use crate::error::{Error, Result};

pub const INTERCEPT_NAME: &str = "intercept";

/// What [`build_dataset`] did to the raw table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodingReport {
    pub n_raw: usize,
    pub dropped: usize,
    pub n: usize,
    /// Raw row indices (0-based) that survived listwise deletion.
    pub kept_rows: Vec<usize>,
    pub warnings: Vec<String>,
}

enum Encoder {
    Numeric { log: bool },
    Dummies { base: String, levels: Vec<String> },
}

struct SourceColumn<'a> {
    name: &'a str,
    index: usize,
    encoder: Encoder,
}

/// Applies listwise deletion, log transforms and dummy expansion.
///
/// Empty cells count as missing alongside the schema's missing tokens. Row
/// numbers in errors are 1-based data records.
pub fn build_dataset(raw: &RawTable, schema: &SchemaConfig) -> Result<(Dataset, EncodingReport)> {
    schema.validate()?;
    let response_idx = raw
        .column_index(&schema.response)
        .ok_or_else(|| Error::Schema(format!("response column `{}` not found", schema.response)))?;

    let missing: HashSet<&str> = schema.missing.iter().map(String::as_str).collect();
    let is_missing = |cell: &str| {
        let c = cell.trim();
        c.is_empty() || missing.contains(c)
    };

    let mut kept_rows = Vec::new();
    for (r, row) in raw.rows().iter().enumerate() {
        let covariate_missing = schema
            .covariates
            .iter()
            .any(|(name, _)| raw.column_index(name).is_some_and(|c| is_missing(&row[c])));
        if !is_missing(&row[response_idx]) && !covariate_missing {
            kept_rows.push(r);
        }
    }

    let mut warnings = Vec::new();
    let mut sources = Vec::with_capacity(schema.covariates.len());
    for (name, directive) in &schema.covariates {
        let index = raw
            .column_index(name)
            .ok_or_else(|| Error::Schema(format!("covariate column `{name}` not found")))?;
        let encoder = match directive {
            Directive::Continuous => Encoder::Numeric { log: false },
            Directive::Log => Encoder::Numeric { log: true },
            Directive::Categorical { base, levels } => {
                let present_anywhere = raw
                    .rows()
                    .iter()
                    .any(|row| row[index].trim() == base.as_str());
                if !present_anywhere {
                    return Err(Error::Schema(format!(
                        "base level `{base}` of `{name}` does not occur in the column"
                    )));
                }
                let observed: BTreeSet<&str> = kept_rows
                    .iter()
                    .map(|&r| raw.rows()[r][index].trim())
                    .collect();
                let levels = match levels {
                    Some(declared) => {
                        for level in declared {
                            if !observed.contains(level.as_str()) {
                                warnings.push(format!(
                                    "level `{level}` of `{name}` does not occur in the retained data; its indicator is all zeros"
                                ));
                            }
                        }
                        declared.clone()
                    }
                    None => observed
                        .iter()
                        .filter(|l| **l != base.as_str())
                        .map(|l| l.to_string())
                        .collect(),
                };
                if !observed.contains(base.as_str()) {
                    warnings.push(format!(
                        "base level `{base}` of `{name}` does not occur in the retained data"
                    ));
                }
                Encoder::Dummies {
                    base: base.clone(),
                    levels,
                }
            }
        };
        sources.push(SourceColumn {
            name,
            index,
            encoder,
        });
    }

    let mut names = Vec::new();
    let mut kinds = Vec::new();
    if schema.intercept {
        names.push(INTERCEPT_NAME.to_string());
        kinds.push(ColumnKind::Intercept);
    }
    for s in &sources {
        match &s.encoder {
            Encoder::Numeric { log } => {
                names.push(s.name.to_string());
                kinds.push(if *log {
                    ColumnKind::LogContinuous
                } else {
                    ColumnKind::Continuous
                });
            }
            Encoder::Dummies { levels, .. } => {
                for l in levels {
                    names.push(format!("{}={}", s.name, l));
                    kinds.push(ColumnKind::Indicator);
                }
            }
        }
    }

    let n = kept_rows.len();
    let k = names.len();
    let mut x = DMatrix::zeros(n, k);
    let mut y = Vec::with_capacity(n);
    for (i, &r) in kept_rows.iter().enumerate() {
        let row = &raw.rows()[r];
        let label = row[response_idx].trim();
        let category = schema
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Data {
                row: r + 1,
                column: schema.response.clone(),
                message: format!("unknown response label `{label}`"),
            })?;
        y.push(category + 1);

        let mut c = 0;
        if schema.intercept {
            x[(i, 0)] = 1.0;
            c = 1;
        }
        for s in &sources {
            let cell = row[s.index].trim();
            let data_err = |message: String| Error::Data {
                row: r + 1,
                column: s.name.to_string(),
                message,
            };
            match &s.encoder {
                Encoder::Numeric { log } => {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| data_err(format!("`{cell}` is not a number")))?;
                    if !v.is_finite() {
                        return Err(data_err(format!("`{cell}` is not finite")));
                    }
                    x[(i, c)] = if *log {
                        if v <= 0.0 {
                            return Err(data_err(format!("cannot take the log of {v}")));
                        }
                        v.ln()
                    } else {
                        v
                    };
                    c += 1;
                }
                Encoder::Dummies { base, levels } => {
                    if cell != base {
                        let pos = levels
                            .iter()
                            .position(|l| l == cell)
                            .ok_or_else(|| data_err(format!("unknown level `{cell}`")))?;
                        x[(i, c + pos)] = 1.0;
                    }
                    c += levels.len();
                }
            }
        }
    }

    let dataset = Dataset::new(y, x, names, kinds, schema.labels.clone())?;
    let report = EncodingReport {
        n_raw: raw.n_raw(),
        dropped: raw.n_raw() - n,
        n,
        kept_rows,
        warnings,
    };
    Ok((dataset, report))
}
