use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tabular::{encode_numeric, ColumnKind, DistanceMetric, Record, Schema, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    /// Mean, median and variance per continuous column; category
    /// frequencies per categorical column.
    Naive,
    /// Ten equal-width bins per continuous column over the reference
    /// range; category frequencies per categorical column.
    Histogram,
    /// Strict upper triangle of the Pearson correlation matrix of the
    /// one-hot encoding.
    Correlation,
}

pub const HISTOGRAM_BINS: usize = 10;

/// Turns a synthetic table into a fixed-length feature vector. Histogram
/// ranges come from the reference table given at construction.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    feature_set: FeatureSet,
    schema: Schema,
    ranges: Vec<(f64, f64)>,
}

impl FeatureExtractor {
    pub fn new(reference: &Table, feature_set: FeatureSet) -> Result<Self> {
        reference.ensure_non_empty()?;
        let ranges = (0..reference.schema().len())
            .map(|j| match reference.schema().column(j).kind {
                ColumnKind::Continuous => {
                    let col = reference.numeric_column(j);
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi)
                }
                ColumnKind::Categorical => (0.0, 0.0),
            })
            .collect();
        Ok(Self {
            feature_set,
            schema: reference.schema().clone(),
            ranges,
        })
    }

    pub fn feature_set(&self) -> FeatureSet {
        self.feature_set
    }

    pub fn extract(&self, table: &Table) -> Result<Vec<f64>> {
        table.ensure_non_empty()?;
        match self.feature_set {
            FeatureSet::Naive => Ok(self.marginal(table, false)),
            FeatureSet::Histogram => Ok(self.marginal(table, true)),
            FeatureSet::Correlation => correlation_features(table),
        }
    }

    fn marginal(&self, table: &Table, histogram: bool) -> Vec<f64> {
        let n = table.n_rows() as f64;
        let mut out = Vec::new();
        for (j, spec) in self.schema.columns().iter().enumerate() {
            match spec.kind {
                ColumnKind::Continuous if histogram => {
                    let (lo, hi) = self.ranges[j];
                    let width = hi - lo;
                    let mut counts = [0.0; HISTOGRAM_BINS];
                    for v in table.numeric_column(j) {
                        let b = if width > 0.0 {
                            (((v - lo) / width * HISTOGRAM_BINS as f64).floor().max(0.0) as usize)
                                .min(HISTOGRAM_BINS - 1)
                        } else {
                            0
                        };
                        counts[b] += 1.0;
                    }
                    out.extend(counts.iter().map(|c| c / n));
                }
                ColumnKind::Continuous => {
                    let mut col = table.numeric_column(j);
                    let mean = col.iter().sum::<f64>() / n;
                    let var = if col.len() > 1 {
                        col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
                    } else {
                        0.0
                    };
                    col.sort_by(f64::total_cmp);
                    let m = col.len();
                    let median = if m % 2 == 1 {
                        col[m / 2]
                    } else {
                        (col[m / 2 - 1] + col[m / 2]) / 2.0
                    };
                    out.extend([mean, median, var]);
                }
                ColumnKind::Categorical => {
                    let mut freq = vec![0.0; spec.categories.len()];
                    for row in table.rows() {
                        freq[row[j].cat()] += 1.0;
                    }
                    out.extend(freq.iter().map(|c| c / n));
                }
            }
        }
        out
    }
}

/// Features of `table` with histogram ranges taken from the table itself.
pub fn extract_features(table: &Table, feature_set: FeatureSet) -> Result<Vec<f64>> {
    FeatureExtractor::new(table, feature_set)?.extract(table)
}

/// Upper-triangle Pearson correlations of the one-hot encoding, with 0 for
/// any pair involving a constant column.
pub fn correlation_features(table: &Table) -> Result<Vec<f64>> {
    let x = encode_numeric(table)?;
    let (n, d) = x.shape();
    let means: Vec<f64> = (0..d).map(|j| x.column(j).sum() / n as f64).collect();
    let centered = x.map_with_location(|_, j, v| v - means[j]);
    let gram = centered.transpose() * &centered;
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for a in 0..d {
        for b in a + 1..d {
            let denom = (gram[(a, a)] * gram[(b, b)]).sqrt();
            out.push(if denom > 0.0 { gram[(a, b)] / denom } else { 0.0 });
        }
    }
    Ok(out)
}

/// How close the synthetic table comes to the target record: the fraction
/// of rows identical to it and the smallest scaled distance to it.
pub fn target_proximity(table: &Table, target: &Record, metric: &DistanceMetric) -> [f64; 2] {
    let mut exact = 0usize;
    let mut nearest = f64::INFINITY;
    for row in table.rows() {
        if row == target {
            exact += 1;
        }
        nearest = nearest.min(metric.distance(row, target));
    }
    [exact as f64 / table.n_rows() as f64, nearest]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{Cell, ColumnSpec};

    fn mixed() -> Table {
        let s = Schema::new(
            vec![
                ColumnSpec::continuous("a"),
                ColumnSpec::continuous("b"),
                ColumnSpec::categorical("c", ["x", "y", "z"]),
            ],
            None,
        )
        .unwrap();
        let rows = (0..6)
            .map(|i| vec![Cell::Num(i as f64), Cell::Num(2.0), Cell::Cat(i % 3)])
            .collect();
        Table::new(s, rows).unwrap()
    }

    #[test]
    fn naive_layout() {
        let f = extract_features(&mixed(), FeatureSet::Naive).unwrap();
        assert_eq!(f.len(), 9);
        assert_eq!(&f[..3], &[2.5, 2.5, 3.5]);
        assert_eq!(&f[3..6], &[2.0, 2.0, 0.0]);
        assert_eq!(&f[6..], &[1.0 / 3.0; 3]);
    }

    #[test]
    fn histogram_layout() {
        let f = extract_features(&mixed(), FeatureSet::Histogram).unwrap();
        assert_eq!(f.len(), 2 * HISTOGRAM_BINS + 3);
        assert!((f[..HISTOGRAM_BINS].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // constant column: all mass in the first bin
        assert_eq!(f[HISTOGRAM_BINS], 1.0);
    }

    #[test]
    fn constant_column_correlations_are_zero() {
        let f = correlation_features(&mixed()).unwrap();
        // encoded dim 5 -> 10 pairs; pairs with column b are indices 0, 4, 5, 6
        assert_eq!(f.len(), 10);
        for i in [0, 4, 5, 6] {
            assert_eq!(f[i], 0.0);
        }
    }

    #[test]
    fn proximity_sees_exact_copies() {
        let t = mixed();
        let m = DistanceMetric::fit(&t);
        let p = target_proximity(&t, t.row(2), &m);
        assert_eq!(p, [1.0 / 6.0, 0.0]);
    }
}
