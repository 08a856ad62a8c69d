//! Canned experiments: distribution preservation on Gaussian data and the
//! linkage-attack / utility sweep on labelled tabular data.

pub mod fig3;
pub mod linkage;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::empirical_quantile;

pub use fig3::{run_fig3, write_fig3, Fig3Config, Fig3Result, Fig3Row, Fig3Summary};
pub use linkage::{
    run_linkage, write_linkage, DataSource, GeneratorKind, GeneratorSpec, LinkageConfig,
    LinkageResult, LinkageSummary, PgRow, TargetSpec, UtilityRow,
};

/// First quartile, median and third quartile (linear interpolation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// All NaN for an empty slice.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self {
                q1: f64::NAN,
                median: f64::NAN,
                q3: f64::NAN,
            };
        }
        Self {
            q1: empirical_quantile(values, 0.25),
            median: empirical_quantile(values, 0.5),
            q3: empirical_quantile(values, 0.75),
        }
    }
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles() {
        let q = Quartiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((q.q1, q.median, q.q3), (2.0, 3.0, 4.0));
        assert!(Quartiles::of(&[]).median.is_nan());
    }
}
