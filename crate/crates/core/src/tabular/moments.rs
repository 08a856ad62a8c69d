use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tabular::schema::Schema;
use crate::tabular::table::{Cell, Record, Table};

/// Numeric embedding of a table: continuous columns as-is, categorical
/// columns one-hot in declared category order. Shape `n × encoded_dim`.
pub fn encode_numeric(table: &Table) -> Result<DMatrix<f64>> {
    table.ensure_non_empty()?;
    let schema = table.schema();
    let d = schema.encoded_dim();
    let mut m = DMatrix::zeros(table.n_rows(), d);
    let mut buf = vec![0.0; d];
    for (i, row) in table.rows().iter().enumerate() {
        encode_record_into(schema, row, &mut buf);
        for (j, v) in buf.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

/// Writes the encoding of one record into `out` (length `encoded_dim`).
pub fn encode_record_into(schema: &Schema, record: &Record, out: &mut [f64]) {
    let mut j = 0;
    for (spec, cell) in schema.columns().iter().zip(record) {
        match cell {
            Cell::Num(v) => {
                out[j] = *v;
                j += 1;
            }
            Cell::Cat(c) => {
                let w = spec.categories.len();
                out[j..j + w].fill(0.0);
                out[j + c] = 1.0;
                j += w;
            }
        }
    }
}

/// Mean vector and unbiased covariance of a table's numeric encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub n: usize,
    pub encoded_dim: usize,
}

impl MomentSummary {
    /// Builds a summary from known moments, e.g. population parameters.
    pub fn from_parts(mean: DVector<f64>, covariance: DMatrix<f64>, n: usize) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: covariance.nrows(),
            });
        }
        Ok(Self {
            mean,
            covariance,
            n,
            encoded_dim: d,
        })
    }

    pub fn trace(&self) -> f64 {
        self.covariance.trace()
    }

    /// Elementwise average of several summaries over the same encoding.
    pub fn average(items: &[MomentSummary]) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyTable)?;
        let mut mean = DVector::zeros(first.encoded_dim);
        let mut cov = DMatrix::zeros(first.encoded_dim, first.encoded_dim);
        for m in items {
            if m.encoded_dim != first.encoded_dim {
                return Err(Error::DimensionMismatch {
                    left: first.encoded_dim,
                    right: m.encoded_dim,
                });
            }
            mean += &m.mean;
            cov += &m.covariance;
        }
        let k = items.len() as f64;
        Self::from_parts(mean / k, cov / k, first.n)
    }
}

pub fn moments(table: &Table) -> Result<MomentSummary> {
    table.ensure_rows(2)?;
    let x = encode_numeric(table)?;
    Ok(moments_of_matrix(&x))
}

/// Moments of the rows of `x`. Requires at least two rows.
pub fn moments_of_matrix(x: &DMatrix<f64>) -> MomentSummary {
    let (n, d) = x.shape();
    debug_assert!(n >= 2);
    let mean = DVector::from_iterator(d, x.column_iter().map(|c| c.sum() / n as f64));
    let mut centered = x.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let mut cov = centered.transpose() * &centered / (n as f64 - 1.0);
    // exact symmetry; the product can differ in the last ulp
    for i in 0..d {
        for j in (i + 1)..d {
            let v = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    MomentSummary {
        mean,
        covariance: cov,
        n,
        encoded_dim: d,
    }
}

/// `(‖Δmean‖₂, ‖Δcov‖_F)` between two summaries.
pub fn frobenius_diff(a: &MomentSummary, b: &MomentSummary) -> Result<(f64, f64)> {
    if a.encoded_dim != b.encoded_dim {
        return Err(Error::DimensionMismatch {
            left: a.encoded_dim,
            right: b.encoded_dim,
        });
    }
    Ok(((&a.mean - &b.mean).norm(), (&a.covariance - &b.covariance).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{ColumnSpec, Schema};

    fn cont2(rows: &[(f64, f64)]) -> Table {
        let s = Schema::new(
            vec![ColumnSpec::continuous("a"), ColumnSpec::continuous("b")],
            None,
        )
        .unwrap();
        Table::new(
            s,
            rows.iter().map(|&(a, b)| vec![Cell::Num(a), Cell::Num(b)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn continuous_encoding_is_identity() {
        let t = cont2(&[(1.5, -2.0), (3.0, 4.0)]);
        let m = encode_numeric(&t).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(0, 0)], 1.5);
        assert_eq!(m[(1, 1)], 4.0);
    }

    #[test]
    fn one_hot_encoding() {
        let s = Schema::new(vec![ColumnSpec::categorical("c", ["p", "q", "r"])], None).unwrap();
        let t = Table::new(s, vec![vec![Cell::Cat(1)]]).unwrap();
        let m = encode_numeric(&t).unwrap();
        assert_eq!(m.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_point_moments() {
        let m = moments(&cont2(&[(0.0, 0.0), (2.0, 2.0)])).unwrap();
        assert_eq!(m.mean.as_slice(), &[1.0, 1.0]);
        assert_eq!(m.covariance, DMatrix::from_row_slice(2, 2, &[2.0, 2.0, 2.0, 2.0]));
        assert_eq!(m.trace(), 4.0);
    }

    #[test]
    fn single_row_is_insufficient() {
        let err = moments(&cont2(&[(0.0, 0.0)])).unwrap_err();
        assert!(matches!(err, Error::InsufficientRows { needed: 2, got: 1 }));
    }

    #[test]
    fn frobenius_cases() {
        let a = moments(&cont2(&[(0.0, 0.0), (2.0, 2.0)])).unwrap();
        assert_eq!(frobenius_diff(&a, &a).unwrap(), (0.0, 0.0));
        let b = moments(&cont2(&[(3.0, 4.0), (5.0, 6.0)])).unwrap();
        // means (1,1) vs (4,5): 3-4-5 triangle; covariances equal
        assert_eq!(frobenius_diff(&a, &b).unwrap(), (5.0, 0.0));

        let s = Schema::new(vec![ColumnSpec::continuous("a")], None).unwrap();
        let c = moments(
            &Table::new(s, vec![vec![Cell::Num(0.0)], vec![Cell::Num(1.0)]]).unwrap(),
        )
        .unwrap();
        assert!(matches!(frobenius_diff(&a, &c), Err(Error::DimensionMismatch { .. })));
    }
}
