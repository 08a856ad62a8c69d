//! Shadow-model linkage attack and privacy gain.
//!
//! The adversary knows a reference pool and a target row. Each round draws
//! a training subset of the pool without the target ("out") and a copy with
//! one random row replaced by the target ("in"), runs the generator on both
//! and featurizes the outputs. A distinguisher trained on shadow rounds is
//! then scored on fresh test rounds:
//!
//! ```text
//! advantage = P(yes | in) - P(yes | out),  privacy gain = 1 - advantage
//! ```

mod distinguisher;
mod features;

use std::io::Write;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Generator;
use crate::seed;
use crate::tabular::{DistanceMetric, Table};

pub use distinguisher::{
    select_by_correlation, Distinguisher, DistinguisherKind, LogisticRegression,
    DISTINGUISHER_TREES, LOGISTIC_ITERATIONS, LOGISTIC_L2,
};
pub use features::{
    correlation_features, extract_features, target_proximity, FeatureExtractor, FeatureSet,
    HISTOGRAM_BINS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    /// Shadow rounds; each contributes one "in" and one "out" example.
    pub n_shadow_pairs: usize,
    pub n_test_pairs: usize,
    /// Rows in each publisher training set.
    pub train_subset_size: usize,
    /// Rows requested from the generator per round.
    pub synth_size: usize,
    pub feature_set: FeatureSet,
    pub distinguisher: DistinguisherKind,
    /// Features kept after ranking by correlation with the in/out label.
    pub max_features: usize,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            n_shadow_pairs: 50,
            n_test_pairs: 100,
            train_subset_size: 500,
            synth_size: 500,
            feature_set: FeatureSet::Naive,
            distinguisher: DistinguisherKind::LogisticRegression,
            max_features: 20,
            seed: 0,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_shadow_pairs == 0
            || self.n_test_pairs == 0
            || self.train_subset_size == 0
            || self.synth_size == 0
            || self.max_features == 0
        {
            return Err(Error::InvalidParameter("attack counts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyGainResult {
    pub target_index: usize,
    pub generator: String,
    /// Nominal ε of the generator; `None` when non-private.
    pub epsilon: Option<f64>,
    pub advantage: f64,
    pub privacy_gain: f64,
    pub n_test_pairs: usize,
    pub p_yes_in: f64,
    pub p_yes_out: f64,
    /// Two-standard-error half widths of `p_yes_in` and `p_yes_out`.
    pub err_in: f64,
    pub err_out: f64,
}

impl PrivacyGainResult {
    fn new(
        target_index: usize,
        generator: &dyn Generator,
        p_yes_in: f64,
        p_yes_out: f64,
        n_test_pairs: usize,
    ) -> Self {
        let advantage = p_yes_in - p_yes_out;
        let err = |p: f64| 2.0 * (p * (1.0 - p) / n_test_pairs as f64).sqrt();
        Self {
            target_index,
            generator: generator.name(),
            epsilon: generator.privacy().epsilon(),
            advantage,
            privacy_gain: 1.0 - advantage,
            n_test_pairs,
            p_yes_in,
            p_yes_out,
            err_in: err(p_yes_in),
            err_out: err(p_yes_out),
        }
    }
}

struct Game<'a> {
    pool: &'a Table,
    target: usize,
    generator: &'a dyn Generator,
    cfg: &'a AttackConfig,
    extractor: FeatureExtractor,
    metric: DistanceMetric,
}

impl Game<'_> {
    /// Feature vectors of the (out, in) synthetic tables of one round.
    fn round(&self, phase: &str, r: usize) -> Result<[Vec<f64>; 2]> {
        let n = self.pool.n_rows();
        let m = self.cfg.train_subset_size;
        let mut rng = seed::stream(self.cfg.seed, phase, r as u64);
        // sample from the pool minus the target by skipping over its index
        let mut subset: Vec<usize> = index::sample(&mut rng, n - 1, m)
            .into_iter()
            .map(|i| if i >= self.target { i + 1 } else { i })
            .collect();
        subset.sort_unstable();
        let out_table = self.pool.subset(&subset);
        let slot = rng.random_range(0..m);
        subset[slot] = self.target;
        let in_table = self.pool.subset(&subset);

        let gen_seed = |member: &str| seed::derive_seed(self.cfg.seed, &format!("{phase}-{member}"), r as u64);
        let mut feats = [Vec::new(), Vec::new()];
        for (slot, (table, member)) in [(out_table, "out"), (in_table, "in")].into_iter().enumerate() {
            let synth = self
                .generator
                .fit_and_sample(&table, self.cfg.synth_size, gen_seed(member))
                .map_err(|e| Error::generator(self.generator.name(), e))?;
            let mut f = self.extractor.extract(&synth)?;
            f.extend(target_proximity(&synth, self.pool.row(self.target), &self.metric));
            feats[slot] = f;
        }
        Ok(feats)
    }

    fn rounds(&self, phase: &str, count: usize) -> Result<Vec<[Vec<f64>; 2]>> {
        (0..count).into_par_iter().map(|r| self.round(phase, r)).collect()
    }
}

/// Plays the linkage game for one target against one generator.
pub fn run_linkage_game(
    reference_pool: &Table,
    target_index: usize,
    generator: &dyn Generator,
    cfg: &AttackConfig,
) -> Result<PrivacyGainResult> {
    cfg.validate()?;
    let n = reference_pool.n_rows();
    if target_index >= n {
        return Err(Error::InvalidParameter(format!(
            "target index {target_index} outside pool of {n} rows"
        )));
    }
    if cfg.train_subset_size >= n {
        return Err(Error::InsufficientPool(format!(
            "train subsets of {} rows need a pool larger than {n}",
            cfg.train_subset_size
        )));
    }
    let game = Game {
        pool: reference_pool,
        target: target_index,
        generator,
        cfg,
        extractor: FeatureExtractor::new(reference_pool, cfg.feature_set)?,
        metric: DistanceMetric::fit(reference_pool),
    };

    let shadow = game.rounds("shadow", cfg.n_shadow_pairs)?;
    let mut x = Vec::with_capacity(2 * shadow.len());
    let mut y = Vec::with_capacity(2 * shadow.len());
    for [out_f, in_f] in shadow {
        x.push(out_f);
        y.push(false);
        x.push(in_f);
        y.push(true);
    }
    let model = Distinguisher::train(
        cfg.distinguisher,
        &x,
        &y,
        cfg.max_features,
        seed::derive_seed(cfg.seed, "distinguisher", 0),
    )?;

    let test = game.rounds("test", cfg.n_test_pairs)?;
    let yes_in = test.iter().filter(|[_, f]| model.predict(f)).count();
    let yes_out = test.iter().filter(|[f, _]| model.predict(f)).count();
    let k = cfg.n_test_pairs as f64;
    Ok(PrivacyGainResult::new(
        target_index,
        generator,
        yes_in as f64 / k,
        yes_out as f64 / k,
        cfg.n_test_pairs,
    ))
}

/// Every (target, generator) game, targets outermost. The game seed depends
/// only on the target, so all generators face the same subsets.
pub fn attack_sweep(
    reference_pool: &Table,
    targets: &[usize],
    generators: &[&dyn Generator],
    cfg: &AttackConfig,
) -> Result<Vec<PrivacyGainResult>> {
    if targets.is_empty() {
        return Err(Error::InvalidParameter("attack sweep needs at least one target".into()));
    }
    let mut out = Vec::with_capacity(targets.len() * generators.len());
    for &t in targets {
        let game_cfg = AttackConfig {
            seed: seed::derive_seed(cfg.seed, "target", t as u64),
            ..*cfg
        };
        for g in generators {
            out.push(run_linkage_game(reference_pool, t, *g, &game_cfg)?);
        }
    }
    Ok(out)
}

pub const RESULT_CSV_HEADER: [&str; 10] = [
    "target",
    "generator",
    "epsilon",
    "advantage",
    "privacy_gain",
    "p_yes_in",
    "p_yes_out",
    "err_in",
    "err_out",
    "n_test_pairs",
];

/// Flat CSV, one row per result. Non-private rows leave `epsilon` empty.
pub fn write_results_csv<W: Write>(writer: W, results: &[PrivacyGainResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RESULT_CSV_HEADER)?;
    for r in results {
        w.write_record([
            r.target_index.to_string(),
            r.generator.clone(),
            r.epsilon.map(|e| e.to_string()).unwrap_or_default(),
            r.advantage.to_string(),
            r.privacy_gain.to_string(),
            r.p_yes_in.to_string(),
            r.p_yes_out.to_string(),
            r.err_in.to_string(),
            r.err_out.to_string(),
            r.n_test_pairs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn save_results_csv(path: impl AsRef<Path>, results: &[PrivacyGainResult]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results_csv(std::io::BufWriter::new(file), results)
}
