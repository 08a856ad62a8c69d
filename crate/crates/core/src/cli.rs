//! The `synthdp` command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::attack::{attack_sweep, save_results_csv, AttackConfig, DistinguisherKind, FeatureSet};
use crate::dp::{
    estimate_sensitivity_with_mode, fit_bayesnet, fit_dp_bayesnet, sample_bayesnet, BayesNetModel,
    NeighborMode, PrivacyBudget,
};
use crate::error::{Error, Result};
use crate::experiment::{self, write_json, DataSource, Fig3Config, GeneratorKind, GeneratorSpec, LinkageConfig};
use crate::pipeline::{
    smote_dp_generate, BayesNetGenerator, Generator, IdentityGenerator, LaplaceDpGenerator, Privacy,
    SensitivitySource, SmoteDpOptions, SmoteGenerator,
};
use crate::smote::SmoteConfig;
use crate::tabular::{builtin, load_csv, save_csv, select_outliers, Table, DEFAULT_OUTLIER_QUANTILE};
use crate::utility::{train_test_split, utility_report, FeatureSubset, ForestConfig, DEFAULT_TEST_FRACTION};

/// Environment variable capping worker threads (0 or unset = all cores).
pub const THREADS_ENV: &str = "SYNTHDP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "synthdp", version, about = "Differentially private synthetic tabular data with SMOTE pre-processing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic table.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Estimate raw and generator-output sensitivity.
    Sens(SensArgs),
    /// Membership attacks.
    #[command(subcommand)]
    Attack(AttackCommand),
    /// Train-on-synthetic, test-on-real utility report.
    Utility(UtilityArgs),
    /// Canned experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV (needs --schema).
    #[arg(long, requires = "schema", conflicts_with = "builtin")]
    pub data: Option<PathBuf>,
    /// Schema sidecar TOML for --data.
    #[arg(long, requires = "data")]
    pub schema: Option<PathBuf>,
    /// Bundled dataset instead of --data.
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinData>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BuiltinData {
    GermanCredit,
}

impl DataArgs {
    fn source(&self) -> Result<DataSource> {
        match (&self.data, &self.schema, self.builtin) {
            (Some(d), Some(s), None) => Ok(DataSource {
                builtin: None,
                path: Some(d.clone()),
                schema: Some(s.clone()),
            }),
            (None, None, Some(BuiltinData::GermanCredit)) => Ok(DataSource::german_credit()),
            _ => Err(Error::InvalidConfig("pass --data with --schema, or --builtin".into())),
        }
    }
}

/// `inf` selects the non-private variant where one exists.
fn parse_epsilon(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => {
            let e: f64 = s.parse().map_err(|_| format!("`{s}` is not a number or `inf`"))?;
            if e > 0.0 {
                Ok(e)
            } else {
                Err(format!("epsilon must be positive, got {e}"))
            }
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output directory for synthetic.csv and provenance.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Rows to generate (default: input row count).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// SMOTE on every class.
    Smote {
        #[command(flatten)]
        common: GenArgs,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// Laplace mechanism on a continuous-only table.
    DpLaplace {
        #[command(flatten)]
        common: GenArgs,
        #[arg(long, value_parser = parse_epsilon)]
        epsilon: f64,
        /// Fixed sensitivity; estimated from the input when omitted.
        #[arg(long)]
        sensitivity: Option<f64>,
    },
    /// Differentially private Bayesian network.
    DpBayes {
        #[command(flatten)]
        common: GenArgs,
        #[arg(long, value_parser = parse_epsilon)]
        epsilon: f64,
        #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
        degree: i64,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Bayesian network; non-private unless a finite --epsilon is given.
    Bayes {
        #[command(flatten)]
        common: GenArgs,
        #[arg(long, value_parser = parse_epsilon, default_value = "inf")]
        epsilon: f64,
        #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
        degree: i64,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// SMOTE followed by a DP generator, with measured alpha.
    SmoteDp {
        #[command(flatten)]
        common: GenArgs,
        #[arg(long, value_parser = parse_epsilon)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = DpStage::Bayes)]
        stage: DpStage,
        #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
        degree: i64,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Generator runs averaged per sensitivity evaluation.
        #[arg(long, default_value_t = 2)]
        trials: usize,
        /// Leave-one-out neighbors sampled for the sensitivity maximum.
        #[arg(long, default_value_t = 20)]
        neighbors: usize,
    },
    /// Sample from a saved Bayesian-network model.
    FromModel {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DpStage {
    Bayes,
    Laplace,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SensGenerator {
    Identity,
    Smote,
}

#[derive(Debug, Args)]
pub struct SensArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SensGenerator::Smote)]
    pub generator: SensGenerator,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub trials: usize,
    #[arg(long, default_value_t = 20)]
    pub neighbors: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::RemoveOne)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the estimate here as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    RemoveOne,
    ReplaceOne,
}

#[derive(Debug, Subcommand)]
pub enum AttackCommand {
    /// Shadow-model linkage game for one generator.
    Linkage(LinkageArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKindArg {
    Identity,
    Smote,
    Bayes,
    Privbayes,
    SmotePrivbayes,
    DpLaplace,
    SmoteDpLaplace,
}

impl From<GenKindArg> for GeneratorKind {
    fn from(k: GenKindArg) -> Self {
        match k {
            GenKindArg::Identity => GeneratorKind::Identity,
            GenKindArg::Smote => GeneratorKind::Smote,
            GenKindArg::Bayes => GeneratorKind::Bayes,
            GenKindArg::Privbayes => GeneratorKind::Privbayes,
            GenKindArg::SmotePrivbayes => GeneratorKind::SmotePrivbayes,
            GenKindArg::DpLaplace => GeneratorKind::DpLaplace,
            GenKindArg::SmoteDpLaplace => GeneratorKind::SmoteDpLaplace,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FeatureArg {
    Naive,
    Histogram,
    Correlation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistinguisherArg {
    Logistic,
    Forest,
}

#[derive(Debug, Args)]
pub struct LinkageArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum)]
    pub generator: GenKindArg,
    /// Required for private generators.
    #[arg(long, value_parser = parse_epsilon)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    pub degree: i64,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Explicit target rows (repeatable); otherwise outliers are used.
    #[arg(long = "target")]
    pub targets: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub outliers: usize,
    #[arg(long, default_value_t = 50)]
    pub shadow_pairs: usize,
    #[arg(long, default_value_t = 100)]
    pub test_pairs: usize,
    #[arg(long, default_value_t = 500)]
    pub subset_size: usize,
    #[arg(long, default_value_t = 500)]
    pub synth_size: usize,
    #[arg(long, value_enum, default_value_t = FeatureArg::Naive)]
    pub features: FeatureArg,
    #[arg(long, value_enum, default_value_t = DistinguisherArg::Logistic)]
    pub distinguisher: DistinguisherArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for results.csv and results.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct UtilityArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Synthetic training table (same schema as the data).
    #[arg(long)]
    pub synth: PathBuf,
    /// Held-out test table; otherwise a split of --data is used.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
    /// Try every feature at each split instead of sqrt(p).
    #[arg(long)]
    pub all_features: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report here as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// Distribution preservation on the two-class Gaussian benchmark.
    Fig3 {
        /// TOML with any of: dim, n_per_class, epsilon, k, seeds.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Overrides the configured seeds (comma separated).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Privacy gain and utility across a generator roster.
    Linkage {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Record written next to every generated table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub command: String,
    pub generator: String,
    pub privacy: Privacy,
    pub nominal_epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub effective_epsilon: Option<f64>,
    pub contraction_failed: Option<bool>,
    pub seed: u64,
    pub rows: usize,
    pub data: Option<DataSource>,
    pub parameters: serde_json::Value,
}

fn load_data(args: &DataArgs) -> Result<Table> {
    args.source()?.load()
}

fn budget(epsilon: f64) -> Result<PrivacyBudget> {
    PrivacyBudget::new(epsilon)
}

fn write_gen_output(out: &Path, table: &Table, provenance: &Provenance) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    save_csv(out.join("synthetic.csv"), table)?;
    write_json(&out.join("provenance.json"), provenance)
}

fn run_gen(cmd: &GenCommand) -> Result<()> {
    let (common, name) = match cmd {
        GenCommand::Smote { common, .. } => (common, "smote"),
        GenCommand::DpLaplace { common, .. } => (common, "dp-laplace"),
        GenCommand::DpBayes { common, .. } => (common, "dp-bayes"),
        GenCommand::Bayes { common, .. } => (common, "bayes"),
        GenCommand::SmoteDp { common, .. } => (common, "smote-dp"),
        GenCommand::FromModel { model, n, seed, out } => {
            let m = BayesNetModel::load(model)?;
            let table = sample_bayesnet(&m, *n, *seed)?;
            let prov = Provenance {
                command: "gen from-model".into(),
                generator: "bayes-model".into(),
                privacy: m.total_epsilon().map_or(Privacy::NonPrivate, Privacy::Dp),
                nominal_epsilon: m.total_epsilon(),
                alpha: None,
                effective_epsilon: None,
                contraction_failed: None,
                seed: *seed,
                rows: table.n_rows(),
                data: None,
                parameters: serde_json::json!({ "model": model, "n": n }),
            };
            return write_gen_output(out, &table, &prov);
        }
    };
    let source = common.data.source()?;
    let data = source.load()?;
    let n = common.n.unwrap_or(data.n_rows());
    let seed = common.seed;
    let mut prov = Provenance {
        command: format!("gen {name}"),
        generator: String::new(),
        privacy: Privacy::NonPrivate,
        nominal_epsilon: None,
        alpha: None,
        effective_epsilon: None,
        contraction_failed: None,
        seed,
        rows: n,
        data: Some(source),
        parameters: serde_json::Value::Null,
    };
    let mut model = None;
    let table = match cmd {
        GenCommand::Smote { k, .. } => {
            let g = SmoteGenerator::new(*k);
            prov.parameters = serde_json::json!({ "k": k, "n": n });
            prov.generator = g.name();
            g.fit_and_sample(&data, n, seed)?
        }
        GenCommand::DpLaplace {
            epsilon, sensitivity, ..
        } => {
            let g = LaplaceDpGenerator {
                budget: budget(*epsilon)?,
                sensitivity: match sensitivity {
                    Some(s) => SensitivitySource::Fixed(*s),
                    None => SensitivitySource::EstimateFromInput {
                        neighbor_samples: data.n_rows(),
                    },
                },
            };
            let sens = g.sensitivity_for(&data, seed)?;
            prov.parameters = serde_json::json!({ "epsilon": epsilon, "sensitivity": sens, "n": n });
            prov.generator = g.name();
            prov.privacy = g.privacy();
            prov.nominal_epsilon = Some(*epsilon);
            g.fit_and_sample(&data, n, seed)?
        }
        GenCommand::DpBayes {
            epsilon, degree, bins, ..
        }
        | GenCommand::Bayes {
            epsilon, degree, bins, ..
        } => {
            let private = epsilon.is_finite();
            if !private && matches!(cmd, GenCommand::DpBayes { .. }) {
                return Err(Error::InvalidBudget(*epsilon));
            }
            let fit_seed = crate::seed::derive_seed(seed, "bayes-fit", 0);
            let m = if private {
                fit_dp_bayesnet(&data, budget(*epsilon)?, *degree, *bins, fit_seed)?
            } else {
                fit_bayesnet(&data, *degree, *bins, fit_seed)?
            };
            prov.parameters = serde_json::json!({ "epsilon": if private { Some(*epsilon) } else { None }, "degree": degree, "bins": bins, "n": n });
            prov.generator = if private { "privbayes" } else { "bayes" }.into();
            if private {
                prov.privacy = Privacy::Dp(*epsilon);
                prov.nominal_epsilon = Some(*epsilon);
            }
            let t = sample_bayesnet(&m, n, crate::seed::derive_seed(seed, "bayes-draw", 0))?;
            model = Some(m);
            t
        }
        GenCommand::SmoteDp {
            epsilon,
            k,
            stage,
            degree,
            bins,
            trials,
            neighbors,
            ..
        } => {
            let b = budget(*epsilon)?;
            let inner: Box<dyn Generator> = match stage {
                DpStage::Bayes => Box::new(BayesNetGenerator {
                    budget: Some(b),
                    degree: *degree,
                    n_bins: *bins,
                }),
                DpStage::Laplace => Box::new(LaplaceDpGenerator {
                    budget: b,
                    sensitivity: SensitivitySource::EstimateFromInput {
                        neighbor_samples: data.n_rows(),
                    },
                }),
            };
            let smote_cfg = SmoteConfig::new(*k, data.n_rows(), crate::seed::derive_seed(seed, "smote-stage", 0));
            let opts = SmoteDpOptions {
                sensitivity_trials: *trials,
                neighbor_samples: *neighbors,
            };
            let (t, eff) = smote_dp_generate(&data, &smote_cfg, inner.as_ref(), n, seed, opts)?;
            prov.parameters = serde_json::json!({
                "epsilon": epsilon, "k": k, "stage": format!("{stage:?}").to_lowercase(),
                "degree": degree, "bins": bins, "trials": trials, "neighbors": neighbors, "n": n,
            });
            prov.generator = format!("smote-{}", inner.name());
            prov.privacy = inner.privacy();
            prov.nominal_epsilon = Some(eff.nominal_epsilon);
            prov.alpha = Some(eff.alpha);
            prov.effective_epsilon = Some(eff.effective_epsilon);
            prov.contraction_failed = Some(eff.contraction_failed);
            t
        }
        GenCommand::FromModel { .. } => unreachable!("handled above"),
    };
    write_gen_output(&common.out, &table, &prov)?;
    if let Some(m) = model {
        m.save(common.out.join("model.json"))?;
    }
    Ok(())
}

fn run_sens(args: &SensArgs) -> Result<()> {
    let data = load_data(&args.data)?;
    let mode = match args.mode {
        ModeArg::RemoveOne => NeighborMode::RemoveOne,
        ModeArg::ReplaceOne => NeighborMode::ReplaceOne,
    };
    let generator: Box<dyn Generator> = match args.generator {
        SensGenerator::Identity => Box::new(IdentityGenerator),
        SensGenerator::Smote => Box::new(SmoteGenerator::new(args.k)),
    };
    let est = estimate_sensitivity_with_mode(&data, generator.as_ref(), args.trials, args.neighbors, args.seed, mode)?;
    println!("{}", serde_json::to_string_pretty(&est)?);
    if let Some(out) = &args.out {
        write_json(out, &est)?;
    }
    Ok(())
}

fn run_attack(args: &LinkageArgs) -> Result<()> {
    let data = load_data(&args.data)?;
    let spec = GeneratorSpec {
        kind: args.generator.into(),
        epsilon: args.epsilon.into_iter().collect(),
        k: args.k,
        degree: args.degree,
        bins: args.bins,
    };
    let built = spec.build()?;
    let gens: Vec<&dyn Generator> = built.iter().map(|b| b.generator.as_ref()).collect();
    let targets = if args.targets.is_empty() {
        select_outliers(&data, DEFAULT_OUTLIER_QUANTILE, args.outliers)?
    } else {
        args.targets.clone()
    };
    let cfg = AttackConfig {
        n_shadow_pairs: args.shadow_pairs,
        n_test_pairs: args.test_pairs,
        train_subset_size: args.subset_size,
        synth_size: args.synth_size,
        feature_set: match args.features {
            FeatureArg::Naive => FeatureSet::Naive,
            FeatureArg::Histogram => FeatureSet::Histogram,
            FeatureArg::Correlation => FeatureSet::Correlation,
        },
        distinguisher: match args.distinguisher {
            DistinguisherArg::Logistic => DistinguisherKind::LogisticRegression,
            DistinguisherArg::Forest => DistinguisherKind::RandomForest,
        },
        seed: args.seed,
        ..AttackConfig::default()
    };
    let results = attack_sweep(&data, &targets, &gens, &cfg)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    save_results_csv(args.out.join("results.csv"), &results)?;
    write_json(
        &args.out.join("results.json"),
        &serde_json::json!({ "config": cfg, "generator": spec, "results": results }),
    )
}

fn run_utility(args: &UtilityArgs) -> Result<()> {
    let data = load_data(&args.data)?;
    let synth = load_csv(&args.synth, data.schema())?;
    let (train, test) = match &args.test {
        Some(p) => (data.clone(), load_csv(p, data.schema())?),
        None => train_test_split(&data, args.test_fraction, args.seed)?,
    };
    let cfg = ForestConfig {
        n_trees: args.trees,
        max_depth: args.depth,
        min_leaf: args.min_leaf,
        features_per_split: if args.all_features {
            FeatureSubset::All
        } else {
            FeatureSubset::Sqrt
        },
        seed: args.seed,
    };
    let report = utility_report(&train, &synth, &test, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(())
}

fn run_experiment(cmd: &ExperimentCommand) -> Result<()> {
    match cmd {
        ExperimentCommand::Fig3 { config, dim, seeds, out } => {
            let mut cfg: Fig3Config = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    toml::from_str(&text)?
                }
                None => Fig3Config::default(),
            };
            if let Some(d) = dim {
                cfg.dim = *d;
            }
            if let Some(s) = seeds {
                cfg.seeds = s.clone();
            }
            let result = experiment::run_fig3(&cfg)?;
            experiment::write_fig3(out, &result)
        }
        ExperimentCommand::Linkage { config, out } => {
            let cfg = LinkageConfig::load(config)?;
            let result = experiment::run_linkage(&cfg)?;
            experiment::write_linkage(out, &cfg, &result)
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(g) => run_gen(g),
        Command::Sens(a) => run_sens(a),
        Command::Attack(AttackCommand::Linkage(a)) => run_attack(a),
        Command::Utility(a) => run_utility(a),
        Command::Experiment(e) => run_experiment(e),
    }
}

/// Reads [`THREADS_ENV`]: `Some(n)` for a positive cap, `None` for auto.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::InvalidConfig(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        },
    }
}

/// Writes the bundled German-Credit-shaped sample and its schema.
pub fn write_bundled_data(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_csv(dir.join("german_credit_like.csv"), &builtin::bundled_german_credit())?;
    builtin::german_credit_schema().save(dir.join("german_credit_like.toml"))
}
