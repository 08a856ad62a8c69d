use serde::{Deserialize, Serialize};

use crate::dp::{estimate_sensitivity, PrivacyBudget, SensitivityEstimate};
use crate::error::{Error, Result};
use crate::pipeline::{Generator, Privacy, SmoteGenerator};
use crate::seed;
use crate::smote::{self, NeighborIndex, SmoteConfig};
use crate::tabular::{moments, DistanceMetric, Table};

/// Nominal budget, measured contraction and the resulting effective budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveBudget {
    pub nominal_epsilon: f64,
    pub alpha: f64,
    pub effective_epsilon: f64,
    /// Set when the measured ratio exceeded 1 and `alpha` was clamped.
    pub contraction_failed: bool,
}

/// `α ε` with `α = Δf_s / Δf` clamped into `(0, 1]`.
pub fn effective_epsilon(nominal: PrivacyBudget, sens: &SensitivityEstimate) -> Result<EffectiveBudget> {
    if !(sens.delta_f > 0.0) {
        return Err(Error::ZeroRawSensitivity);
    }
    let ratio = sens.delta_f_s / sens.delta_f;
    let contraction_failed = ratio > 1.0;
    let alpha = ratio.clamp(f64::MIN_POSITIVE, 1.0);
    Ok(EffectiveBudget {
        nominal_epsilon: nominal.epsilon(),
        alpha,
        effective_epsilon: alpha * nominal.epsilon(),
        contraction_failed,
    })
}

/// Sensitivity-measurement settings used by [`smote_dp_generate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoteDpOptions {
    pub sensitivity_trials: usize,
    pub neighbor_samples: usize,
}

impl Default for SmoteDpOptions {
    fn default() -> Self {
        Self {
            sensitivity_trials: 2,
            neighbor_samples: 20,
        }
    }
}

/// Runs SMOTE on `table`, then `dp_generator` on the SMOTE output, and
/// measures the SMOTE stage's sensitivity ratio for the budget report.
pub fn smote_dp_generate(
    table: &Table,
    smote_cfg: &SmoteConfig,
    dp_generator: &dyn Generator,
    n_out: usize,
    seed: u64,
    opts: SmoteDpOptions,
) -> Result<(Table, EffectiveBudget)> {
    let nominal = match dp_generator.privacy() {
        Privacy::Dp(e) => PrivacyBudget::new(e)?,
        Privacy::NonPrivate => {
            return Err(Error::InvalidParameter(format!(
                "`{}` is not a DP generator",
                dp_generator.name()
            )))
        }
    };
    let xs = smote::generate(table, smote_cfg, &DistanceMetric::fit(table))
        .map_err(|e| Error::generator("smote", e))?;
    let released = dp_generator
        .fit_and_sample(&xs, n_out, seed::derive_seed(seed, "dp-stage", 0))
        .map_err(|e| Error::generator(dp_generator.name(), e))?;

    let smote_stage = SmoteGenerator {
        k: smote_cfg.k,
        stratify_by_label: smote_cfg.stratify_by_label,
    };
    let sens = estimate_sensitivity(
        table,
        &smote_stage,
        opts.sensitivity_trials,
        opts.neighbor_samples,
        seed::derive_seed(seed, "smote-dp-sens", 0),
    )?;
    Ok((released, effective_epsilon(nominal, &sens)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    /// `(trace of source covariance, trace of SMOTE covariance)` per seed.
    pub per_seed: Vec<(f64, f64)>,
    /// Fraction of seeds with a strictly smaller SMOTE trace.
    pub contraction_rate: f64,
}

/// Compares covariance traces of the source and of SMOTE output across
/// `n_seeds` seeds derived from `smote_cfg.seed`.
pub fn contraction_report(table: &Table, smote_cfg: &SmoteConfig, n_seeds: usize) -> Result<ContractionReport> {
    if n_seeds == 0 {
        return Err(Error::InvalidParameter("n_seeds must be at least 1".into()));
    }
    let source = moments(table)?.trace();
    let index = NeighborIndex::build(
        table,
        smote_cfg.k,
        &DistanceMetric::fit(table),
        smote_cfg.stratify_by_label,
    )?;
    let per_seed = (0..n_seeds)
        .map(|i| {
            let s = seed::derive_seed(smote_cfg.seed, "contraction", i as u64);
            let out = smote::generate_with_index(table, &index, smote_cfg.n_out, s)?;
            Ok((source, moments(&out)?.trace()))
        })
        .collect::<Result<Vec<_>>>()?;
    let contracted = per_seed.iter().filter(|(a, b)| b < a).count();
    Ok(ContractionReport {
        contraction_rate: contracted as f64 / n_seeds as f64,
        per_seed,
    })
}
