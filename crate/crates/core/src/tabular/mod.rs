//! Mixed-type tabular data: schema, CSV ingestion, numeric encoding,
//! moments, record distance, outlier selection and artificial data.

pub mod builtin;
mod distance;
mod gaussian;
mod io;
mod moments;
mod outliers;
mod schema;
mod table;

pub use distance::DistanceMetric;
pub use gaussian::{sample_gaussian_mixture, ClassSpec, MixtureSpec, LABEL_COLUMN};
pub use io::{load_csv, read_csv, save_csv, write_csv};
pub use moments::{
    encode_numeric, encode_record_into, frobenius_diff, moments, moments_of_matrix, MomentSummary,
};
pub use outliers::{
    empirical_quantile, outlier_scores, select_outliers, DEFAULT_OUTLIER_COUNT,
    DEFAULT_OUTLIER_QUANTILE,
};
pub use schema::{ColumnKind, ColumnSpec, Schema};
pub use table::{Cell, Record, Table};
