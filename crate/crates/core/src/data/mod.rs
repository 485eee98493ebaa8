//! Survey-table ingestion, encoding, and synthetic data.

mod dataset;
mod encode;
mod schema;
mod simulate;
mod table;

pub use dataset::{ColumnKind, Dataset};
pub use encode::{build_dataset, EncodingReport, INTERCEPT_NAME};
pub use schema::{Directive, SchemaConfig};
pub use simulate::{simulate_dataset, to_raw_table};
pub use table::{parse_csv, parse_csv_str, to_csv_string, write_csv, RawTable};
