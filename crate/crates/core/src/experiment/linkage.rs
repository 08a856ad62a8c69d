//! Privacy-gain and utility sweep over a roster of generators.
//!
//! For every seed the data is split 80/20; the training part is both the
//! publisher's data and the adversary's reference pool, and the held-out
//! part scores downstream accuracy. Targets are the pool's strongest
//! outliers plus a random sample of the remaining rows.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::attack::{attack_sweep, AttackConfig};
use crate::dp::{estimate_sensitivity, PrivacyBudget, SensitivityEstimate};
use crate::error::{Error, Result};
use crate::experiment::{write_json, Quartiles};
use crate::pipeline::{
    effective_epsilon, BayesNetGenerator, EffectiveBudget, Generator, IdentityGenerator,
    LaplaceDpGenerator, SensitivitySource, SmoteDpGenerator, SmoteDpOptions, SmoteGenerator,
    DEFAULT_BINS, DEFAULT_DEGREE,
};
use crate::seed;
use crate::tabular::{builtin, load_csv, select_outliers, Schema, Table, DEFAULT_OUTLIER_QUANTILE};
use crate::utility::{train_test_split, utility_report, ForestConfig, DEFAULT_TEST_FRACTION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    /// `"german-credit"` for the bundled sample.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
}

impl DataSource {
    pub fn german_credit() -> Self {
        Self {
            builtin: Some("german-credit".into()),
            path: None,
            schema: None,
        }
    }

    pub fn load(&self) -> Result<Table> {
        match (&self.builtin, &self.path, &self.schema) {
            (Some(name), None, None) if name == "german-credit" => Ok(builtin::bundled_german_credit()),
            (Some(name), None, None) => Err(Error::InvalidConfig(format!("unknown builtin dataset `{name}`"))),
            (None, Some(path), Some(schema)) => load_csv(path, &Schema::load(schema)?),
            _ => Err(Error::InvalidConfig(
                "data needs either `builtin` or both `path` and `schema`".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Identity,
    Smote,
    Bayes,
    Privbayes,
    SmotePrivbayes,
    DpLaplace,
    SmoteDpLaplace,
}

impl GeneratorKind {
    pub fn is_private(self) -> bool {
        matches!(
            self,
            Self::Privbayes | Self::SmotePrivbayes | Self::DpLaplace | Self::SmoteDpLaplace
        )
    }

    pub fn uses_smote(self) -> bool {
        matches!(self, Self::Smote | Self::SmotePrivbayes | Self::SmoteDpLaplace)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// One generator per listed ε; must be empty for non-private kinds.
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_degree")]
    pub degree: i64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_k() -> usize {
    1
}

fn default_degree() -> i64 {
    DEFAULT_DEGREE
}

fn default_bins() -> usize {
    DEFAULT_BINS
}

/// A concrete generator built from a spec.
pub struct BuiltGenerator {
    pub kind: GeneratorKind,
    pub epsilon: Option<f64>,
    pub k: usize,
    pub generator: Box<dyn Generator>,
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Vec<BuiltGenerator>> {
        if self.kind.is_private() && self.epsilon.is_empty() {
            return Err(Error::InvalidConfig(format!("{:?} needs at least one epsilon", self.kind)));
        }
        if !self.kind.is_private() && !self.epsilon.is_empty() {
            return Err(Error::InvalidConfig(format!("{:?} takes no epsilon", self.kind)));
        }
        if self.kind.uses_smote() && self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let make = |eps: Option<f64>| -> Result<Box<dyn Generator>> {
            let budget = eps.map(PrivacyBudget::new).transpose()?;
            let bayes = BayesNetGenerator {
                budget,
                degree: self.degree,
                n_bins: self.bins,
            };
            let laplace = || {
                Ok::<_, Error>(LaplaceDpGenerator {
                    budget: budget.ok_or(Error::InvalidConfig("missing epsilon".into()))?,
                    sensitivity: SensitivitySource::EstimateFromInput { neighbor_samples: 50 },
                })
            };
            Ok(match self.kind {
                GeneratorKind::Identity => Box::new(IdentityGenerator),
                GeneratorKind::Smote => Box::new(SmoteGenerator::new(self.k)),
                GeneratorKind::Bayes | GeneratorKind::Privbayes => Box::new(bayes),
                GeneratorKind::SmotePrivbayes => Box::new(SmoteDpGenerator::new(self.k, bayes)),
                GeneratorKind::DpLaplace => Box::new(laplace()?),
                GeneratorKind::SmoteDpLaplace => Box::new(SmoteDpGenerator::new(self.k, laplace()?)),
            })
        };
        let eps: Vec<Option<f64>> = if self.kind.is_private() {
            self.epsilon.iter().map(|&e| Some(e)).collect()
        } else {
            vec![None]
        };
        eps.into_iter()
            .map(|e| {
                Ok(BuiltGenerator {
                    kind: self.kind,
                    epsilon: e,
                    k: self.k,
                    generator: make(e)?,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TargetSpec {
    pub outliers: usize,
    pub random: usize,
    pub outlier_quantile: f64,
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self {
            outliers: 5,
            random: 10,
            outlier_quantile: DEFAULT_OUTLIER_QUANTILE,
        }
    }
}

/// Configuration file for the linkage experiment (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkageConfig {
    pub data: DataSource,
    pub seeds: Vec<u64>,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub targets: TargetSpec,
    /// Its `seed` field is ignored; game seeds derive from `seeds`.
    #[serde(default)]
    pub attack: AttackConfig,
    /// Its `seed` field is ignored; forest seeds derive from `seeds`.
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub sensitivity: SmoteDpOptions,
}

fn default_test_fraction() -> f64 {
    DEFAULT_TEST_FRACTION
}

impl LinkageConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.generators.is_empty() {
            return Err(Error::InvalidConfig("at least one generator is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        if self.targets.outliers + self.targets.random == 0 {
            return Err(Error::InvalidConfig("at least one target is required".into()));
        }
        for g in &self.generators {
            g.build()?;
        }
        self.attack.validate()?;
        self.forest.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgRow {
    pub seed: u64,
    pub target: usize,
    pub target_kind: String,
    pub generator: String,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub effective_epsilon: Option<f64>,
    pub advantage: f64,
    pub privacy_gain: f64,
    pub p_yes_in: f64,
    pub p_yes_out: f64,
    pub err_in: f64,
    pub err_out: f64,
    pub n_test_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityRow {
    pub seed: u64,
    pub generator: String,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub effective_epsilon: Option<f64>,
    pub mean_fnorm: f64,
    pub cov_fnorm: f64,
    pub accuracy_raw: f64,
    pub accuracy_synth: f64,
    pub accuracy_drop: f64,
}

/// Per-generator medians across seeds and targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageSummary {
    pub generator: String,
    pub epsilon: Option<f64>,
    pub privacy_gain_outliers: Quartiles,
    pub privacy_gain_random: Quartiles,
    pub accuracy_drop: Quartiles,
    pub alpha: Option<Quartiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageResult {
    pub pg: Vec<PgRow>,
    pub utility: Vec<UtilityRow>,
    pub summary: Vec<LinkageSummary>,
}

impl LinkageResult {
    pub fn summary_of(&self, generator: &str, epsilon: Option<f64>) -> Option<&LinkageSummary> {
        self.summary
            .iter()
            .find(|s| s.generator == generator && s.epsilon == epsilon)
    }
}

/// Outlier targets first (highest score first), then random ones.
fn pick_targets(pool: &Table, spec: &TargetSpec, seed: u64) -> Result<Vec<(usize, &'static str)>> {
    let outliers = if spec.outliers > 0 {
        select_outliers(pool, spec.outlier_quantile, spec.outliers)?
    } else {
        Vec::new()
    };
    let rest: Vec<usize> = (0..pool.n_rows()).filter(|i| !outliers.contains(i)).collect();
    let take = spec.random.min(rest.len());
    let mut random: Vec<usize> = index::sample(&mut seed::stream(seed, "random-targets", 0), rest.len(), take)
        .into_iter()
        .map(|i| rest[i])
        .collect();
    random.sort_unstable();
    Ok(outliers
        .into_iter()
        .map(|t| (t, "outlier"))
        .chain(random.into_iter().map(|t| (t, "random")))
        .collect())
}

pub fn run_linkage(cfg: &LinkageConfig) -> Result<LinkageResult> {
    cfg.validate()?;
    let data = data_with_label(cfg.data.load()?)?;
    let built: Vec<BuiltGenerator> = cfg
        .generators
        .iter()
        .map(GeneratorSpec::build)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let gens: Vec<&dyn Generator> = built.iter().map(|b| b.generator.as_ref()).collect();

    let mut pg = Vec::new();
    let mut utility = Vec::new();
    for &s in &cfg.seeds {
        let (train, test) = train_test_split(&data, cfg.test_fraction, seed::derive_seed(s, "split", 0))?;
        let targets = pick_targets(&train, &cfg.targets, s)?;

        // measured contraction of each SMOTE stage, one estimate per k
        let mut estimates: BTreeMap<usize, SensitivityEstimate> = BTreeMap::new();
        let mut budgets: Vec<Option<EffectiveBudget>> = Vec::with_capacity(built.len());
        for b in &built {
            let eff = match (b.kind.uses_smote(), b.epsilon) {
                (true, Some(eps)) => {
                    if !estimates.contains_key(&b.k) {
                        let est = estimate_sensitivity(
                            &train,
                            &SmoteGenerator::new(b.k),
                            cfg.sensitivity.sensitivity_trials,
                            cfg.sensitivity.neighbor_samples,
                            seed::derive_seed(s, "alpha", b.k as u64),
                        )?;
                        estimates.insert(b.k, est);
                    }
                    Some(effective_epsilon(PrivacyBudget::new(eps)?, &estimates[&b.k])?)
                }
                _ => None,
            };
            budgets.push(eff);
        }

        let attack_cfg = AttackConfig {
            seed: seed::derive_seed(s, "attack", 0),
            ..cfg.attack
        };
        let target_idx: Vec<usize> = targets.iter().map(|t| t.0).collect();
        let results = attack_sweep(&train, &target_idx, &gens, &attack_cfg)?;
        for (i, r) in results.into_iter().enumerate() {
            let (t, kind) = targets[i / built.len()];
            let b = &budgets[i % built.len()];
            pg.push(PgRow {
                seed: s,
                target: t,
                target_kind: kind.into(),
                generator: r.generator,
                epsilon: r.epsilon,
                alpha: b.map(|e| e.alpha),
                effective_epsilon: b.map(|e| e.effective_epsilon),
                advantage: r.advantage,
                privacy_gain: r.privacy_gain,
                p_yes_in: r.p_yes_in,
                p_yes_out: r.p_yes_out,
                err_in: r.err_in,
                err_out: r.err_out,
                n_test_pairs: r.n_test_pairs,
            });
        }

        let forest = ForestConfig {
            seed: seed::derive_seed(s, "forest", 0),
            ..cfg.forest
        };
        for (b, eff) in built.iter().zip(&budgets) {
            let synth = b
                .generator
                .fit_and_sample(&train, train.n_rows(), seed::derive_seed(s, "utility-synth", 0))
                .map_err(|e| Error::generator(b.generator.name(), e))?;
            let u = utility_report(&train, &synth, &test, &forest)?;
            utility.push(UtilityRow {
                seed: s,
                generator: b.generator.name(),
                epsilon: b.epsilon,
                alpha: eff.map(|e| e.alpha),
                effective_epsilon: eff.map(|e| e.effective_epsilon),
                mean_fnorm: u.mean_fnorm,
                cov_fnorm: u.cov_fnorm,
                accuracy_raw: u.accuracy_raw,
                accuracy_synth: u.accuracy_synth,
                accuracy_drop: u.accuracy_drop,
            });
        }
    }

    let summary = built
        .iter()
        .map(|b| {
            let name = b.generator.name();
            let same = |g: &str, e: Option<f64>| g == name && e == b.epsilon;
            let pgs = |kind: &str| -> Vec<f64> {
                pg.iter()
                    .filter(|r| same(&r.generator, r.epsilon) && r.target_kind == kind)
                    .map(|r| r.privacy_gain)
                    .collect()
            };
            let rows: Vec<&UtilityRow> = utility.iter().filter(|r| same(&r.generator, r.epsilon)).collect();
            let drops: Vec<f64> = rows.iter().map(|r| r.accuracy_drop).collect();
            let alphas: Vec<f64> = rows.iter().filter_map(|r| r.alpha).collect();
            LinkageSummary {
                generator: name.clone(),
                epsilon: b.epsilon,
                privacy_gain_outliers: Quartiles::of(&pgs("outlier")),
                privacy_gain_random: Quartiles::of(&pgs("random")),
                accuracy_drop: Quartiles::of(&drops),
                alpha: (!alphas.is_empty()).then(|| Quartiles::of(&alphas)),
            }
        })
        .collect();
    Ok(LinkageResult { pg, utility, summary })
}

fn data_with_label(table: Table) -> Result<Table> {
    table.schema().label_index().ok_or(Error::NoLabelColumn)?;
    Ok(table)
}

/// Writes `pg.csv`, `utility.csv` and `summary.json` into `out_dir`.
pub fn write_linkage(out_dir: &Path, cfg: &LinkageConfig, result: &LinkageResult) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, rows) in [("pg.csv", serialize_rows(&result.pg)?), ("utility.csv", serialize_rows(&result.utility)?)] {
        let path = out_dir.join(name);
        std::fs::write(&path, rows).map_err(|e| Error::io(&path, e))?;
    }
    write_json(
        &out_dir.join("summary.json"),
        &serde_json::json!({ "config": cfg, "summary": result.summary }),
    )
}

fn serialize_rows<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidParameter(format!("csv buffer: {e}")))
}
