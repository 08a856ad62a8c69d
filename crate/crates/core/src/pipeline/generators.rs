use crate::dp::{
    fit_bayesnet, fit_dp_bayesnet, laplace_mechanism, raw_sensitivity, sample_bayesnet,
    NeighborMode, PrivacyBudget, SENSITIVITY_SAFETY_FACTOR,
};
use crate::error::{Error, Result};
use crate::pipeline::{Generator, Privacy};
use crate::seed;
use crate::smote::{self, SmoteConfig};
use crate::tabular::{DistanceMetric, Table};

/// Rows `i mod len` for `i < n`: the input itself when `n` equals its size.
fn cycle_rows(table: &Table, n: usize) -> Result<Table> {
    table.ensure_non_empty()?;
    if n == table.n_rows() {
        return Ok(table.clone());
    }
    let idx: Vec<usize> = (0..n).map(|i| i % table.n_rows()).collect();
    Ok(table.subset(&idx))
}

/// Publishes its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityGenerator;

impl Generator for IdentityGenerator {
    fn name(&self) -> String {
        "identity".into()
    }

    fn privacy(&self) -> Privacy {
        Privacy::NonPrivate
    }

    fn fit_and_sample(&self, table: &Table, n: usize, _seed: u64) -> Result<Table> {
        cycle_rows(table, n)
    }
}

/// Identity output that claims an ε-DP guarantee. A test double for wiring
/// checks; it provides no privacy.
#[derive(Debug, Clone, Copy)]
pub struct DpFlaggedIdentity {
    pub epsilon: f64,
}

impl Generator for DpFlaggedIdentity {
    fn name(&self) -> String {
        "identity-dp-flag".into()
    }

    fn privacy(&self) -> Privacy {
        Privacy::Dp(self.epsilon)
    }

    fn fit_and_sample(&self, table: &Table, n: usize, _seed: u64) -> Result<Table> {
        cycle_rows(table, n)
    }
}

/// SMOTE over every class, with the distance metric fit on the input.
#[derive(Debug, Clone, Copy)]
pub struct SmoteGenerator {
    pub k: usize,
    pub stratify_by_label: bool,
}

impl SmoteGenerator {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            stratify_by_label: true,
        }
    }
}

impl Generator for SmoteGenerator {
    fn name(&self) -> String {
        "smote".into()
    }

    fn privacy(&self) -> Privacy {
        Privacy::NonPrivate
    }

    fn fit_and_sample(&self, table: &Table, n: usize, seed: u64) -> Result<Table> {
        let cfg = SmoteConfig {
            stratify_by_label: self.stratify_by_label,
            ..SmoteConfig::new(self.k, n, seed)
        };
        smote::generate(table, &cfg, &DistanceMetric::fit(table))
    }
}

/// Where the Laplace generator gets its sensitivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensitivitySource {
    Fixed(f64),
    /// Raw-data sensitivity of the generator's own input, times the safety
    /// factor, using `neighbor_samples` remove-one neighbors.
    EstimateFromInput { neighbor_samples: usize },
}

/// Laplace mechanism on a continuous-only table.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceDpGenerator {
    pub budget: PrivacyBudget,
    pub sensitivity: SensitivitySource,
}

impl LaplaceDpGenerator {
    pub fn sensitivity_for(&self, table: &Table, seed: u64) -> Result<f64> {
        match self.sensitivity {
            SensitivitySource::Fixed(s) => Ok(s),
            SensitivitySource::EstimateFromInput { neighbor_samples } => {
                let raw = raw_sensitivity(
                    table,
                    neighbor_samples,
                    seed::derive_seed(seed, "laplace-sens", 0),
                    NeighborMode::RemoveOne,
                )?;
                Ok(raw * SENSITIVITY_SAFETY_FACTOR)
            }
        }
    }
}

impl Generator for LaplaceDpGenerator {
    fn name(&self) -> String {
        "dp-laplace".into()
    }

    fn privacy(&self) -> Privacy {
        Privacy::Dp(self.budget.epsilon())
    }

    fn fit_and_sample(&self, table: &Table, n: usize, seed: u64) -> Result<Table> {
        if let Some(c) = table.schema().columns().iter().find(|c| c.is_categorical()) {
            return Err(Error::CategoricalUnsupported(c.name.clone()));
        }
        let sens = self.sensitivity_for(table, seed)?;
        laplace_mechanism(&cycle_rows(table, n)?, sens, self.budget, seed)
    }
}

/// Bayesian-network synthesizer; `budget = None` is the non-private variant.
#[derive(Debug, Clone, Copy)]
pub struct BayesNetGenerator {
    pub budget: Option<PrivacyBudget>,
    pub degree: i64,
    pub n_bins: usize,
}

pub const DEFAULT_DEGREE: i64 = 2;
pub const DEFAULT_BINS: usize = 10;

impl BayesNetGenerator {
    pub fn private(budget: PrivacyBudget) -> Self {
        Self {
            budget: Some(budget),
            degree: DEFAULT_DEGREE,
            n_bins: DEFAULT_BINS,
        }
    }

    pub fn non_private() -> Self {
        Self {
            budget: None,
            degree: DEFAULT_DEGREE,
            n_bins: DEFAULT_BINS,
        }
    }
}

impl Generator for BayesNetGenerator {
    fn name(&self) -> String {
        match self.budget {
            Some(_) => "privbayes".into(),
            None => "bayes".into(),
        }
    }

    fn privacy(&self) -> Privacy {
        match self.budget {
            Some(b) => Privacy::Dp(b.epsilon()),
            None => Privacy::NonPrivate,
        }
    }

    fn fit_and_sample(&self, table: &Table, n: usize, seed: u64) -> Result<Table> {
        let fit_seed = seed::derive_seed(seed, "bayes-fit", 0);
        let model = match self.budget {
            Some(b) => fit_dp_bayesnet(table, b, self.degree, self.n_bins, fit_seed)?,
            None => fit_bayesnet(table, self.degree, self.n_bins, fit_seed)?,
        };
        sample_bayesnet(&model, n, seed::derive_seed(seed, "bayes-draw", 0))
    }
}

/// SMOTE followed by an inner generator that only ever sees the SMOTE
/// output. The SMOTE stage emits as many rows as the source has.
pub struct SmoteDpGenerator {
    pub k: usize,
    pub inner: Box<dyn Generator>,
}

impl SmoteDpGenerator {
    pub fn new(k: usize, inner: impl Generator + 'static) -> Self {
        Self {
            k,
            inner: Box::new(inner),
        }
    }
}

impl Generator for SmoteDpGenerator {
    fn name(&self) -> String {
        format!("smote-{}", self.inner.name())
    }

    fn privacy(&self) -> Privacy {
        self.inner.privacy()
    }

    fn fit_and_sample(&self, table: &Table, n: usize, seed: u64) -> Result<Table> {
        let xs = SmoteGenerator::new(self.k)
            .fit_and_sample(table, table.n_rows(), seed::derive_seed(seed, "smote-stage", 0))
            .map_err(|e| Error::generator("smote", e))?;
        self.inner
            .fit_and_sample(&xs, n, seed::derive_seed(seed, "dp-stage", 0))
            .map_err(|e| Error::generator(self.inner.name(), e))
    }
}
