//! Utility of synthetic data: moment differences and downstream accuracy.

mod forest;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{frobenius_diff, moments, Table};

pub use forest::{
    best_split, evaluate_accuracy, gini, label_features, train_forest, DenseForest, FeatureSubset,
    ForestConfig, ForestModel, Split,
};

/// Default held-out fraction for [`train_test_split`].
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub mean_fnorm: f64,
    pub cov_fnorm: f64,
    pub accuracy_raw: f64,
    pub accuracy_synth: f64,
    /// `accuracy_raw - accuracy_synth`.
    pub accuracy_drop: f64,
}

/// Moment F-norms between `raw_train` and `synth_train`, and the accuracy on
/// `test` of forests trained on each with the same configuration.
pub fn utility_report(
    raw_train: &Table,
    synth_train: &Table,
    test: &Table,
    cfg: &ForestConfig,
) -> Result<UtilityReport> {
    if raw_train.schema() != synth_train.schema() || raw_train.schema() != test.schema() {
        return Err(Error::SchemaMismatch);
    }
    let (mean_fnorm, cov_fnorm) = frobenius_diff(&moments(raw_train)?, &moments(synth_train)?)?;
    let accuracy_raw = evaluate_accuracy(&train_forest(raw_train, cfg)?, test)?;
    let accuracy_synth = evaluate_accuracy(&train_forest(synth_train, cfg)?, test)?;
    Ok(UtilityReport {
        mean_fnorm,
        cov_fnorm,
        accuracy_raw,
        accuracy_synth,
        accuracy_drop: accuracy_raw - accuracy_synth,
    })
}

/// Shuffled split into `(train, test)` with `round(n * test_fraction)` test
/// rows.
pub fn train_test_split(table: &Table, test_fraction: f64, seed: u64) -> Result<(Table, Table)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let n = table.n_rows();
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test == n {
        return Err(Error::InsufficientRows { needed: 2, got: n });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::stream(seed, "split", 0));
    let (test, train) = idx.split_at(n_test);
    Ok((table.subset(train), table.subset(test)))
}

/// Accuracy on `test` of always predicting the most frequent label of
/// `train` (ties to the lowest class).
pub fn majority_baseline(train: &Table, test: &Table) -> Result<f64> {
    let label = train.schema().label_index().ok_or(Error::NoLabelColumn)?;
    test.ensure_non_empty()?;
    let mut counts = vec![0usize; train.schema().column(label).categories.len()];
    for row in train.rows() {
        counts[row[label].cat()] += 1;
    }
    let top = counts
        .iter()
        .enumerate()
        .fold(0, |best, (c, &k)| if k > counts[best] { c } else { best });
    let hits = test.rows().iter().filter(|r| r[label].cat() == top).count();
    Ok(hits as f64 / test.n_rows() as f64)
}
