//! Random forest: bagged CART trees with Gini splits.
//!
//! Trees work on dense real feature vectors. Tables are one-hot encoded
//! first, so a split at 0.5 on a category indicator is the one-vs-rest
//! categorical split. Tree `t` draws its bootstrap sample and per-node
//! feature subsets from substream `(seed, "tree", t)`; bootstrap draws are
//! row positions, so the model depends on training-row order.

use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, StreamRng};
use crate::tabular::{encode_record_into, Schema, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSubset {
    /// `ceil(sqrt(p))` candidate features per node.
    Sqrt,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: FeatureSubset,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            features_per_split: FeatureSubset::Sqrt,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_leaf == 0 {
            return Err(Error::InvalidParameter(
                "n_trees, max_depth and min_leaf must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Size-weighted Gini impurity of the two children.
    pub impurity: f64,
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Best threshold split of `rows` over `features`: the lowest weighted child
/// Gini among midpoints of consecutive distinct values with at least
/// `min_leaf` rows per side. Ties keep the earlier feature in `features`,
/// then the lower threshold. Rows go left when `x <= threshold`.
pub fn best_split(
    x: &[Vec<f64>],
    y: &[usize],
    rows: &[usize],
    features: &[usize],
    n_classes: usize,
    min_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    let mut best: Option<Split> = None;
    let mut sorted = rows.to_vec();
    let mut total = vec![0usize; n_classes];
    for &r in rows {
        total[y[r]] += 1;
    }
    for &f in features {
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left = vec![0usize; n_classes];
        let mut right = total.clone();
        for i in 0..n - 1 {
            let c = y[sorted[i]];
            left[c] += 1;
            right[c] -= 1;
            let (lo, hi) = (x[sorted[i]][f], x[sorted[i + 1]][f]);
            if lo == hi || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let nl = (i + 1) as f64;
            let nr = (n - i - 1) as f64;
            let impurity = (nl * gini(&left) + nr * gini(&right)) / n as f64;
            if best.is_none_or(|b| impurity < b.impurity) {
                best = Some(Split {
                    feature: f,
                    threshold: lo + (hi - lo) / 2.0,
                    impurity,
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(c) => return c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

fn majority(counts: &[usize]) -> usize {
    // first maximum, so ties go to the lowest class
    let mut best = 0;
    for (c, &k) in counts.iter().enumerate() {
        if k > counts[best] {
            best = c;
        }
    }
    best
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    cfg: &'a ForestConfig,
    mtry: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: &[usize], depth: usize, rng: &mut StreamRng) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &r in rows {
            counts[self.y[r]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(majority(&counts)));
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.cfg.max_depth || rows.len() < 2 * self.cfg.min_leaf {
            return id;
        }
        let p = self.x[0].len();
        let mut features = index::sample(rng, p, self.mtry).into_vec();
        features.sort_unstable();
        let Some(split) = best_split(self.x, self.y, rows, &features, self.n_classes, self.cfg.min_leaf)
        else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(&l, depth + 1, rng);
        let right = self.grow(&r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Forest over dense feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseForest {
    trees: Vec<Tree>,
    n_classes: usize,
}

impl DenseForest {
    /// Trains on rows of `x` with labels `y < n_classes`.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &ForestConfig) -> Result<Self> {
        cfg.validate()?;
        if x.is_empty() {
            return Err(Error::EmptyTable);
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        let p = x[0].len();
        if p == 0 {
            return Err(Error::InvalidParameter("no features to split on".into()));
        }
        let mtry = match cfg.features_per_split {
            FeatureSubset::Sqrt => ((p as f64).sqrt().ceil() as usize).clamp(1, p),
            FeatureSubset::All => p,
        };
        let n = x.len();
        let trees = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::stream(cfg.seed, "tree", t as u64);
                let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let mut b = TreeBuilder {
                    x,
                    y,
                    n_classes,
                    cfg,
                    mtry,
                    nodes: Vec::new(),
                };
                b.grow(&sample, 0, &mut rng);
                Tree { nodes: b.nodes }
            })
            .collect();
        Ok(Self { trees, n_classes })
    }

    /// Votes per class.
    pub fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut v = vec![0; self.n_classes];
        for t in &self.trees {
            v[t.predict(x)] += 1;
        }
        v
    }

    /// Majority vote, ties to the lowest class.
    pub fn predict(&self, x: &[f64]) -> usize {
        majority(&self.votes(x))
    }
}

/// One-hot features of every column except the label.
pub fn label_features(table: &Table) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let schema = table.schema();
    let label = schema.label_index().ok_or(Error::NoLabelColumn)?;
    let mut buf = vec![0.0; schema.encoded_dim()];
    let (lo, hi) = encoded_span(schema, label);
    let mut xs = Vec::with_capacity(table.n_rows());
    let mut ys = Vec::with_capacity(table.n_rows());
    for row in table.rows() {
        encode_record_into(schema, row, &mut buf);
        let mut x = buf[..lo].to_vec();
        x.extend_from_slice(&buf[hi..]);
        xs.push(x);
        ys.push(row[label].cat());
    }
    Ok((xs, ys))
}

/// Encoded positions `[lo, hi)` occupied by column `col`.
fn encoded_span(schema: &Schema, col: usize) -> (usize, usize) {
    let lo: usize = schema.columns()[..col].iter().map(|c| c.encoded_width()).sum();
    (lo, lo + schema.column(col).encoded_width())
}

/// Forest trained on a labelled table.
#[derive(Debug, Clone)]
pub struct ForestModel {
    schema: Arc<Schema>,
    forest: DenseForest,
}

impl ForestModel {
    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn predict(&self, table: &Table) -> Result<Vec<usize>> {
        if table.schema() != self.schema.as_ref() {
            return Err(Error::SchemaMismatch);
        }
        let (x, _) = label_features(table)?;
        Ok(x.par_iter().map(|r| self.forest.predict(r)).collect())
    }
}

pub fn train_forest(train: &Table, cfg: &ForestConfig) -> Result<ForestModel> {
    let (x, y) = label_features(train)?;
    let label = train.schema().label_index().ok_or(Error::NoLabelColumn)?;
    let n_classes = train.schema().column(label).categories.len();
    let mut present = vec![false; n_classes];
    for &c in &y {
        present[c] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(ForestModel {
        schema: train.shared_schema(),
        forest: DenseForest::fit(&x, &y, n_classes, cfg)?,
    })
}

/// Fraction of `test` rows whose predicted label is the true label.
pub fn evaluate_accuracy(model: &ForestModel, test: &Table) -> Result<f64> {
    test.ensure_non_empty()?;
    let pred = model.predict(test)?;
    let label = model.schema.label_index().ok_or(Error::NoLabelColumn)?;
    let hits = pred
        .iter()
        .zip(test.rows())
        .filter(|(p, row)| **p == row[label].cat())
        .count();
    Ok(hits as f64 / test.n_rows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 0]), 0.0);
        assert_eq!(gini(&[2, 2]), 0.5);
        assert_eq!(gini(&[]), 0.0);
    }

    #[test]
    fn best_split_separates_classes() {
        let x: Vec<Vec<f64>> = [1.0, 2.0, 3.0, 10.0, 11.0, 12.0].iter().map(|&v| vec![v]).collect();
        let y = vec![0, 0, 0, 1, 1, 1];
        let s = best_split(&x, &y, &[0, 1, 2, 3, 4, 5], &[0], 2, 1).unwrap();
        assert_eq!(s.threshold, 6.5);
        assert_eq!(s.impurity, 0.0);
    }

    #[test]
    fn min_leaf_limits_split_points() {
        let x: Vec<Vec<f64>> = [1.0, 2.0, 3.0].iter().map(|&v| vec![v]).collect();
        assert!(best_split(&x, &[0, 1, 1], &[0, 1, 2], &[0], 2, 2).is_none());
    }

    #[test]
    fn constant_feature_has_no_split() {
        let x = vec![vec![1.0]; 4];
        assert!(best_split(&x, &[0, 1, 0, 1], &[0, 1, 2, 3], &[0], 2, 1).is_none());
    }

    #[test]
    fn ties_go_to_lowest_class() {
        assert_eq!(majority(&[3, 3]), 0);
        assert_eq!(majority(&[1, 3, 3]), 1);
    }
}
