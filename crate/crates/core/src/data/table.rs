use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Rectangular table of text cells with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawTable {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Parse {
                row: 0,
                message: "header has no columns".into(),
            });
        }
        if let Some((i, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != columns.len())
        {
            return Err(Error::Parse {
                row: i + 1,
                message: format!("expected {} cells, found {}", columns.len(), r.len()),
            });
        }
        Ok(RawTable { columns, rows })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn n_raw(&self) -> usize {
        self.rows.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// A table with only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> RawTable {
        RawTable {
            columns: self.columns.clone(),
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
        }
    }
}

/// Parses UTF-8 CSV with a mandatory header row (RFC 4180 quoting).
pub fn parse_csv<R: Read>(reader: R) -> Result<RawTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(e, 0))?.clone();
    if header.is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: "empty input".into(),
        });
    }
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(e, i + 1))?;
        if record.len() != columns.len() {
            return Err(Error::Parse {
                row: i + 1,
                message: format!("expected {} cells, found {}", columns.len(), record.len()),
            });
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(RawTable { columns, rows })
}

pub fn parse_csv_str(text: &str) -> Result<RawTable> {
    parse_csv(text.as_bytes())
}

fn csv_error(e: csv::Error, row: usize) -> Error {
    Error::Parse {
        row,
        message: e.to_string(),
    }
}

pub fn write_csv<W: Write>(table: &RawTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Parse {
        row: 0,
        message: format!("write failed: {e}"),
    };
    w.write_record(&table.columns).map_err(io)?;
    for r in &table.rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse {
        row: 0,
        message: format!("write failed: {e}"),
    })
}

pub fn to_csv_string(table: &RawTable) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(table, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse {
        row: 0,
        message: e.to_string(),
    })
}
