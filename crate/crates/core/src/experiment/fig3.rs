//! Distribution-preservation experiment on the two-class Gaussian benchmark:
//! the original sample against Laplace DP, SMOTE, and SMOTE followed by
//! Laplace DP.
//!
//! Each method runs per class on the continuous features and the class
//! label is reattached, because the Laplace mechanism only handles
//! continuous columns. The Laplace stage calibrates to the raw sensitivity
//! of whatever table it receives, so after SMOTE it sees a contracted table
//! and adds less noise. The DP and SMOTE-DP arms share their noise seeds.
//! F-norms are measured against the benchmark's population moments and,
//! for reference, against the sample.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{laplace_mechanism, raw_sensitivity, NeighborMode, PrivacyBudget, SENSITIVITY_SAFETY_FACTOR};
use crate::error::{Error, Result};
use crate::experiment::{write_json, Quartiles};
use crate::pipeline::{Generator, SmoteGenerator};
use crate::seed;
use crate::tabular::{
    frobenius_diff, moments, sample_gaussian_mixture, save_csv, Cell, MixtureSpec, Schema, Table,
};

pub const METHODS: [&str; 4] = ["original", "dp", "smote", "smote-dp"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Fig3Config {
    pub dim: usize,
    pub n_per_class: usize,
    pub epsilon: f64,
    pub k: usize,
    pub seeds: Vec<u64>,
}

impl Default for Fig3Config {
    fn default() -> Self {
        Self {
            dim: 2,
            n_per_class: 200,
            epsilon: 5.0,
            k: 5,
            seeds: (0..20).collect(),
        }
    }
}

impl Fig3Config {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("fig3 needs at least one seed".into()));
        }
        if self.dim == 0 || self.k == 0 || self.n_per_class <= self.k {
            return Err(Error::InvalidConfig(
                "fig3 needs dim >= 1, k >= 1 and more than k rows per class".into(),
            ));
        }
        PrivacyBudget::new(self.epsilon)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub seed: u64,
    pub method: String,
    /// Against population moments.
    pub mean_fnorm: f64,
    pub cov_fnorm: f64,
    /// Against the original sample.
    pub mean_fnorm_sample: f64,
    pub cov_fnorm_sample: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Summary {
    pub method: String,
    pub mean_fnorm: Quartiles,
    pub cov_fnorm: Quartiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fig3Result {
    pub config: Fig3Config,
    pub rows: Vec<Fig3Row>,
    pub summary: Vec<Fig3Summary>,
}

impl Fig3Result {
    pub fn summary_of(&self, method: &str) -> Option<&Fig3Summary> {
        self.summary.iter().find(|s| s.method == method)
    }
}

/// Outputs of every method for one seed, in [`METHODS`] order.
pub fn fig3_tables(cfg: &Fig3Config, seed: u64) -> Result<Vec<Table>> {
    let spec = MixtureSpec::two_class(cfg.dim, cfg.n_per_class);
    let data = sample_gaussian_mixture(&spec, seed::derive_seed(seed, "fig3-data", 0))?;
    let budget = PrivacyBudget::new(cfg.epsilon)?;
    let schema = data.schema();
    let label = schema.label_index().ok_or(Error::NoLabelColumn)?;
    let feature_schema = Schema::new(
        schema.columns().iter().filter(|c| !c.is_categorical()).cloned().collect(),
        None,
    )?;
    let groups = data.label_groups().ok_or(Error::NoLabelColumn)?;

    let mut outputs = vec![Vec::new(); 3];
    for (class, rows) in groups.iter().enumerate() {
        let features = Table::new(
            feature_schema.clone(),
            rows.iter()
                .map(|&i| data.row(i).iter().take(label).copied().collect())
                .collect(),
        )?;
        let class_seed = seed::derive_seed(seed, "fig3-class", class as u64);
        let noise_seed = seed::derive_seed(class_seed, "noise", 0);
        let laplace = |t: &Table| -> Result<Table> {
            let sens = raw_sensitivity(t, t.n_rows(), noise_seed, NeighborMode::RemoveOne)?;
            laplace_mechanism(t, sens * SENSITIVITY_SAFETY_FACTOR, budget, noise_seed)
        };
        let smote = SmoteGenerator::new(cfg.k).fit_and_sample(
            &features,
            features.n_rows(),
            seed::derive_seed(class_seed, "smote", 0),
        )?;
        let per_method = [laplace(&features)?, laplace(&smote)?, smote];
        for (slot, t) in [0, 2, 1].into_iter().zip(per_method) {
            outputs[slot].extend(t.into_rows().into_iter().map(|mut r| {
                r.push(Cell::Cat(class));
                r
            }));
        }
    }
    let mut tables = vec![data.clone()];
    for rows in outputs {
        tables.push(data.with_rows(rows)?);
    }
    Ok(tables)
}

pub fn run_fig3(cfg: &Fig3Config) -> Result<Fig3Result> {
    cfg.validate()?;
    let population = MixtureSpec::two_class(cfg.dim, cfg.n_per_class).population_moments()?;
    let per_seed = cfg
        .seeds
        .par_iter()
        .map(|&s| {
            let tables = fig3_tables(cfg, s)?;
            let sample = moments(&tables[0])?;
            tables
                .iter()
                .zip(METHODS)
                .map(|(t, method)| {
                    let m = moments(t)?;
                    let (mean_fnorm, cov_fnorm) = frobenius_diff(&m, &population)?;
                    let (mean_fnorm_sample, cov_fnorm_sample) = frobenius_diff(&m, &sample)?;
                    Ok(Fig3Row {
                        seed: s,
                        method: method.into(),
                        mean_fnorm,
                        cov_fnorm,
                        mean_fnorm_sample,
                        cov_fnorm_sample,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Fig3Row> = per_seed.into_iter().flatten().collect();
    let summary = METHODS
        .iter()
        .map(|&method| {
            let pick = |f: fn(&Fig3Row) -> f64| -> Vec<f64> {
                rows.iter().filter(|r| r.method == method).map(f).collect()
            };
            Fig3Summary {
                method: method.into(),
                mean_fnorm: Quartiles::of(&pick(|r| r.mean_fnorm)),
                cov_fnorm: Quartiles::of(&pick(|r| r.cov_fnorm)),
            }
        })
        .collect();
    Ok(Fig3Result {
        config: cfg.clone(),
        rows,
        summary,
    })
}

/// Writes scatter CSVs for the first seed, per-seed F-norms, and the
/// median / IQR summary as CSV and JSON.
pub fn write_fig3(out_dir: &Path, result: &Fig3Result) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let first = result.config.seeds[0];
    for (t, method) in fig3_tables(&result.config, first)?.iter().zip(METHODS) {
        save_csv(out_dir.join(format!("scatter_{method}.csv")), t)?;
    }

    let path = out_dir.join("fnorms.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["seed", "method", "mean_fnorm", "cov_fnorm", "mean_fnorm_sample", "cov_fnorm_sample"])?;
    for r in &result.rows {
        w.write_record([
            r.seed.to_string(),
            r.method.clone(),
            r.mean_fnorm.to_string(),
            r.cov_fnorm.to_string(),
            r.mean_fnorm_sample.to_string(),
            r.cov_fnorm_sample.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "metric", "q1", "median", "q3"])?;
    for s in &result.summary {
        for (metric, q) in [("mean_fnorm", &s.mean_fnorm), ("cov_fnorm", &s.cov_fnorm)] {
            w.write_record([
                s.method.clone(),
                metric.into(),
                q.q1.to_string(),
                q.median.to_string(),
                q.q3.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    write_json(
        &out_dir.join("summary.json"),
        &serde_json::json!({ "config": result.config, "summary": result.summary }),
    )
}
