use nalgebra::{Cholesky, DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::moments::MomentSummary;
use crate::tabular::schema::{ColumnSpec, Schema};
use crate::tabular::table::{Cell, Table};

pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub label: String,
    pub mean: Vec<f64>,
    /// Row-major covariance matrix.
    pub covariance: Vec<Vec<f64>>,
    pub size: usize,
}

/// Per-class Gaussian components of an artificial labelled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub classes: Vec<ClassSpec>,
}

impl MixtureSpec {
    /// Two-class benchmark: class `a` is standard normal, class `b` is shifted
    /// by 3 along the first `max(2, dim / 2)` axes and has mild correlation
    /// between adjacent features.
    pub fn two_class(dim: usize, size_per_class: usize) -> Self {
        let informative = dim.min(2.max(dim / 2));
        let identity: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let banded: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| match i.abs_diff(j) {
                        0 => 1.0,
                        1 => 0.3,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        Self {
            classes: vec![
                ClassSpec {
                    label: "a".into(),
                    mean: vec![0.0; dim],
                    covariance: identity,
                    size: size_per_class,
                },
                ClassSpec {
                    label: "b".into(),
                    mean: (0..dim).map(|i| if i < informative { 3.0 } else { 0.0 }).collect(),
                    covariance: banded,
                    size: size_per_class,
                },
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.classes.first().map_or(0, |c| c.mean.len())
    }

    pub fn schema(&self) -> Result<Schema> {
        let mut cols: Vec<ColumnSpec> = (0..self.dim())
            .map(|i| ColumnSpec::continuous(format!("x{i}")))
            .collect();
        cols.push(ColumnSpec::categorical(
            LABEL_COLUMN,
            self.classes.iter().map(|c| c.label.clone()),
        ));
        Schema::new(cols, Some(LABEL_COLUMN.into()))
    }

    fn validate(&self) -> Result<Vec<DMatrix<f64>>> {
        let d = self.dim();
        if self.classes.is_empty() || d == 0 {
            return Err(Error::InvalidParameter("mixture needs at least one class and dimension".into()));
        }
        let mut factors = Vec::with_capacity(self.classes.len());
        for c in &self.classes {
            if c.mean.len() != d || c.covariance.len() != d || c.covariance.iter().any(|r| r.len() != d) {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: c.mean.len(),
                });
            }
            if c.size < 2 {
                return Err(Error::InvalidParameter(format!(
                    "class `{}` needs at least 2 samples",
                    c.label
                )));
            }
            let m = DMatrix::from_fn(d, d, |i, j| c.covariance[i][j]);
            if (&m - m.transpose()).amax() > 1e-9 || m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCovariance);
            }
            let chol = Cholesky::new(m).ok_or(Error::InvalidCovariance)?;
            factors.push(chol.l());
        }
        Ok(factors)
    }

    /// Population moments of the full encoding (features then label one-hot),
    /// with class weights proportional to the configured sizes.
    pub fn population_moments(&self) -> Result<MomentSummary> {
        self.validate()?;
        let d = self.dim();
        let k = self.classes.len();
        let total: usize = self.classes.iter().map(|c| c.size).sum();
        let dim = d + k;
        let mut mean = DVector::zeros(dim);
        let mut second = DMatrix::zeros(dim, dim);
        for (ci, c) in self.classes.iter().enumerate() {
            let w = c.size as f64 / total as f64;
            let mut v = DVector::zeros(dim);
            for i in 0..d {
                v[i] = c.mean[i];
            }
            v[d + ci] = 1.0;
            mean += w * &v;
            let mut m2 = &v * v.transpose();
            for i in 0..d {
                for j in 0..d {
                    m2[(i, j)] += c.covariance[i][j];
                }
            }
            second += w * m2;
        }
        let cov = second - &mean * mean.transpose();
        MomentSummary::from_parts(mean, cov, total)
    }
}

/// Draws every class in order, `size` records each. Class `c` uses its own
/// RNG substream so changing one class never perturbs another.
pub fn sample_gaussian_mixture(spec: &MixtureSpec, seed: u64) -> Result<Table> {
    let factors = spec.validate()?;
    let schema = spec.schema()?;
    let d = spec.dim();
    let mut rows = Vec::with_capacity(spec.classes.iter().map(|c| c.size).sum());
    for (ci, (class, l)) in spec.classes.iter().zip(&factors).enumerate() {
        let mut rng = seed::stream(seed, "gaussian-mixture", ci as u64);
        let mean = DVector::from_column_slice(&class.mean);
        for _ in 0..class.size {
            let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let x = &mean + l * z;
            let mut row: Vec<Cell> = x.iter().map(|&v| Cell::Num(v)).collect();
            row.push(Cell::Cat(ci));
            rows.push(row);
        }
    }
    Table::new(schema, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indefinite_covariance_rejected() {
        let spec = MixtureSpec {
            classes: vec![ClassSpec {
                label: "a".into(),
                mean: vec![0.0, 0.0],
                covariance: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
                size: 10,
            }],
        };
        assert!(matches!(sample_gaussian_mixture(&spec, 1), Err(Error::InvalidCovariance)));
    }

    #[test]
    fn deterministic() {
        let spec = MixtureSpec::two_class(2, 50);
        assert_eq!(
            sample_gaussian_mixture(&spec, 9).unwrap(),
            sample_gaussian_mixture(&spec, 9).unwrap()
        );
        assert_ne!(
            sample_gaussian_mixture(&spec, 9).unwrap(),
            sample_gaussian_mixture(&spec, 10).unwrap()
        );
    }

    #[test]
    fn population_moments_of_single_class() {
        let spec = MixtureSpec {
            classes: vec![ClassSpec {
                label: "a".into(),
                mean: vec![1.0, -1.0],
                covariance: vec![vec![2.0, 0.5], vec![0.5, 1.0]],
                size: 10,
            }],
        };
        let m = spec.population_moments().unwrap();
        assert_eq!(m.mean.as_slice(), &[1.0, -1.0, 1.0]);
        assert!((m.covariance[(0, 1)] - 0.5).abs() < 1e-12);
        assert!(m.covariance[(2, 2)].abs() < 1e-12);
    }
}
