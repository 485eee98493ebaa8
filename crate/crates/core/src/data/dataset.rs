use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a design-matrix column was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Intercept,
    Continuous,
    /// Natural log of a positive source column.
    LogContinuous,
    /// 0/1 dummy for one non-base level of a categorical column.
    Indicator,
}

impl ColumnKind {
    pub fn is_continuous(self) -> bool {
        matches!(self, ColumnKind::Continuous | ColumnKind::LogContinuous)
    }
}

/// Ordered response (categories `1..=J`) plus an `n × k` design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<usize>,
    x: DMatrix<f64>,
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    labels: Vec<String>,
}

impl Dataset {
    pub fn new(
        y: Vec<usize>,
        x: DMatrix<f64>,
        names: Vec<String>,
        kinds: Vec<ColumnKind>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let j = labels.len();
        if j < 2 {
            return Err(Error::domain("a response needs at least two categories"));
        }
        if x.nrows() != y.len() {
            return Err(Error::domain(format!(
                "design has {} rows but the response has {}",
                x.nrows(),
                y.len()
            )));
        }
        if names.len() != x.ncols() || kinds.len() != x.ncols() {
            return Err(Error::domain(format!(
                "design has {} columns but {} names and {} kinds were given",
                x.ncols(),
                names.len(),
                kinds.len()
            )));
        }
        if let Some((i, &v)) = y.iter().enumerate().find(|(_, &v)| v == 0 || v > j) {
            return Err(Error::domain(format!(
                "response value {v} at row {} is outside 1..={j}",
                i + 1
            )));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % x.nrows().max(1), pos / x.nrows().max(1));
            return Err(Error::domain(format!(
                "non-finite design entry at row {}, column `{}`",
                row + 1,
                names[col]
            )));
        }
        for (c, kind) in kinds.iter().enumerate() {
            if *kind == ColumnKind::Intercept {
                if c != 0 {
                    return Err(Error::domain("the intercept must be the first column"));
                }
                if x.column(0).iter().any(|&v| v != 1.0) {
                    return Err(Error::domain("intercept column must be all ones"));
                }
            }
        }
        Ok(Dataset {
            y,
            x,
            names,
            kinds,
            labels,
        })
    }

    /// Like [`Dataset::new`] with category labels `"1"`, …, `"J"`.
    pub fn with_categories(
        y: Vec<usize>,
        x: DMatrix<f64>,
        names: Vec<String>,
        kinds: Vec<ColumnKind>,
        n_categories: usize,
    ) -> Result<Self> {
        let labels = (1..=n_categories).map(|j| j.to_string()).collect();
        Self::new(y, x, names, kinds, labels)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn n_categories(&self) -> usize {
        self.labels.len()
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_intercept(&self) -> bool {
        self.kinds.first() == Some(&ColumnKind::Intercept)
    }

    /// Observation count per category, index 0 ↔ category 1.
    pub fn category_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_categories()];
        for &v in &self.y {
            counts[v - 1] += 1;
        }
        counts
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// The same response with the design reduced to the intercept column
    /// (or to no columns when the design has no intercept).
    pub fn intercept_only(&self) -> Dataset {
        let keep = usize::from(self.has_intercept());
        Dataset {
            y: self.y.clone(),
            x: self.x.columns(0, keep).into_owned(),
            names: self.names[..keep].to_vec(),
            kinds: self.kinds[..keep].to_vec(),
            labels: self.labels.clone(),
        }
    }

    /// Rows in the given order; indices may repeat.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            y: rows.iter().map(|&r| self.y[r]).collect(),
            x: self.x.select_rows(rows),
            names: self.names.clone(),
            kinds: self.kinds.clone(),
            labels: self.labels.clone(),
        }
    }
}
