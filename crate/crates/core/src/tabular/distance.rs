use serde::{Deserialize, Serialize};

use crate::tabular::table::{Cell, Record, Table};

/// Mixed-type record distance used for neighbor search (SMOTENC rule).
///
/// Squared distance is the sum of squared scale-normalized continuous
/// differences plus `categorical_penalty²` for every categorical column on
/// which the two records disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMetric {
    /// Standard deviation per column of the source table, indexed by column
    /// position. Always positive; zero-variance and categorical columns hold 1.
    pub continuous_scales: Vec<f64>,
    pub categorical_penalty: f64,
}

impl DistanceMetric {
    pub fn fit(table: &Table) -> Self {
        let schema = table.schema();
        let mut scales = vec![1.0; schema.len()];
        let mut stds = Vec::new();
        for j in schema.continuous_indices() {
            let sd = sample_std(&table.numeric_column(j));
            stds.push(sd);
            if sd > 0.0 && sd.is_finite() {
                scales[j] = sd;
            }
        }
        let categorical_penalty = if stds.is_empty() { 1.0 } else { median(&mut stds) };
        Self {
            continuous_scales: scales,
            categorical_penalty,
        }
    }

    pub fn distance_sq(&self, a: &Record, b: &Record) -> f64 {
        let pen = self.categorical_penalty * self.categorical_penalty;
        a.iter()
            .zip(b)
            .zip(&self.continuous_scales)
            .map(|((x, y), s)| match (x, y) {
                (Cell::Num(x), Cell::Num(y)) => {
                    let d = (x - y) / s;
                    d * d
                }
                (Cell::Cat(x), Cell::Cat(y)) if x == y => 0.0,
                _ => pen,
            })
            .sum()
    }

    pub fn distance(&self, a: &Record, b: &Record) -> f64 {
        self.distance_sq(a, b).sqrt()
    }
}

pub(crate) fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

pub(crate) fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{ColumnSpec, Schema};

    #[test]
    fn zero_variance_gets_unit_scale() {
        let s = Schema::new(
            vec![
                ColumnSpec::continuous("a"),
                ColumnSpec::continuous("b"),
                ColumnSpec::categorical("c", ["x", "y"]),
            ],
            None,
        )
        .unwrap();
        let t = Table::new(
            s,
            vec![
                vec![Cell::Num(0.0), Cell::Num(5.0), Cell::Cat(0)],
                vec![Cell::Num(2.0), Cell::Num(5.0), Cell::Cat(1)],
            ],
        )
        .unwrap();
        let m = DistanceMetric::fit(&t);
        assert!((m.continuous_scales[0] - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(m.continuous_scales[1], 1.0);
        // median of stds {sqrt 2, 0}
        assert!((m.categorical_penalty - 2f64.sqrt() / 2.0).abs() < 1e-12);
        let d2 = m.distance_sq(t.row(0), t.row(1));
        assert!((d2 - (2.0 + 0.5)).abs() < 1e-12);
    }
}
