use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::utility::{DenseForest, FeatureSubset, ForestConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistinguisherKind {
    LogisticRegression,
    RandomForest,
}

/// Indices of the `k` features with the largest absolute Pearson
/// correlation with the binary labels, in ascending index order. Constant
/// features score 0; ties keep the lower index.
pub fn select_by_correlation(x: &[Vec<f64>], y: &[bool], k: usize) -> Vec<usize> {
    let n = x.len() as f64;
    let p = x.first().map_or(0, Vec::len);
    let ym = y.iter().filter(|&&b| b).count() as f64 / n;
    let mut scores: Vec<(f64, usize)> = (0..p)
        .map(|j| {
            let xm = x.iter().map(|r| r[j]).sum::<f64>() / n;
            let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
            for (r, &b) in x.iter().zip(y) {
                let dx = r[j] - xm;
                let dy = f64::from(u8::from(b)) - ym;
                sxy += dx * dy;
                sxx += dx * dx;
                syy += dy * dy;
            }
            let denom = (sxx * syy).sqrt();
            (if denom > 0.0 { (sxy / denom).abs() } else { 0.0 }, j)
        })
        .collect();
    scores.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut keep: Vec<usize> = scores.iter().take(k).map(|s| s.1).collect();
    keep.sort_unstable();
    keep
}

/// L2-regularized logistic regression on standardized features, fit by
/// full-batch gradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    means: Vec<f64>,
    scales: Vec<f64>,
    weights: Vec<f64>,
    bias: f64,
}

pub const LOGISTIC_L2: f64 = 1e-2;
pub const LOGISTIC_ITERATIONS: usize = 500;

impl LogisticRegression {
    pub fn fit(x: &[Vec<f64>], y: &[bool]) -> Self {
        let n = x.len() as f64;
        let p = x.first().map_or(0, Vec::len);
        let means: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scales: Vec<f64> = (0..p)
            .map(|j| {
                let v = x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                if v > 0.0 {
                    v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let z: Vec<Vec<f64>> = x
            .iter()
            .map(|r| (0..p).map(|j| (r[j] - means[j]) / scales[j]).collect())
            .collect();
        // the loss gradient is Lipschitz with constant at most (p + 1) / 4 + λ
        let step = 1.0 / ((p as f64 + 1.0) / 4.0 + LOGISTIC_L2);
        let mut w = vec![0.0; p];
        let mut b = 0.0;
        for _ in 0..LOGISTIC_ITERATIONS {
            let mut gw = vec![0.0; p];
            let mut gb = 0.0;
            for (zi, &yi) in z.iter().zip(y) {
                let err = sigmoid(dot(&w, zi) + b) - f64::from(u8::from(yi));
                for (g, v) in gw.iter_mut().zip(zi) {
                    *g += err * v;
                }
                gb += err;
            }
            for (wj, g) in w.iter_mut().zip(&gw) {
                *wj -= step * (g / n + LOGISTIC_L2 * *wj);
            }
            b -= step * gb / n;
        }
        Self {
            means,
            scales,
            weights: w,
            bias: b,
        }
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(&self.means)
            .zip(&self.scales)
            .zip(&self.weights)
            .map(|(((v, m), s), w)| w * (v - m) / s)
            .sum();
        sigmoid(s + self.bias)
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.probability(x) > 0.5
    }
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Number of trees in the forest distinguisher.
pub const DISTINGUISHER_TREES: usize = 100;

/// A trained "was the target in the training data" classifier.
#[derive(Debug, Clone)]
pub enum Distinguisher {
    Logistic { keep: Vec<usize>, model: LogisticRegression },
    Forest { keep: Vec<usize>, model: DenseForest },
}

impl Distinguisher {
    /// Selects `max_features` features by label correlation, then trains.
    pub fn train(
        kind: DistinguisherKind,
        x: &[Vec<f64>],
        y: &[bool],
        max_features: usize,
        seed: u64,
    ) -> Result<Self> {
        let keep = select_by_correlation(x, y, max_features);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| project(r, &keep)).collect();
        Ok(match kind {
            DistinguisherKind::LogisticRegression => Distinguisher::Logistic {
                model: LogisticRegression::fit(&xs, y),
                keep,
            },
            DistinguisherKind::RandomForest => {
                let cfg = ForestConfig {
                    n_trees: DISTINGUISHER_TREES,
                    max_depth: 8,
                    min_leaf: 1,
                    features_per_split: FeatureSubset::Sqrt,
                    seed,
                };
                let labels: Vec<usize> = y.iter().map(|&b| usize::from(b)).collect();
                Distinguisher::Forest {
                    model: DenseForest::fit(&xs, &labels, 2, &cfg)?,
                    keep,
                }
            }
        })
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        match self {
            Distinguisher::Logistic { keep, model } => model.predict(&project(x, keep)),
            Distinguisher::Forest { keep, model } => model.predict(&project(x, keep)) == 1,
        }
    }
}

fn project(x: &[f64], keep: &[usize]) -> Vec<f64> {
    keep.iter().map(|&j| x[j]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection_prefers_informative_feature() {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i * 7 % 5) as f64, 1.0, if i % 2 == 0 { 3.0 } else { -1.0 }])
            .collect();
        let y: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
        assert_eq!(select_by_correlation(&x, &y, 1), vec![2]);
        assert_eq!(select_by_correlation(&x, &y, 5), vec![0, 1, 2]);
    }

    #[test]
    fn logistic_separates_shifted_groups() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![if i < 20 { i as f64 * 0.1 } else { 5.0 + i as f64 * 0.1 }])
            .collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let m = LogisticRegression::fit(&x, &y);
        let correct = x.iter().zip(&y).filter(|(r, &l)| m.predict(r) == l).count();
        assert_eq!(correct, 40);
    }
}
