//! The generator contract, its implementations, and the SMOTE-DP
//! composition with effective-budget accounting.

mod composition;
mod generators;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tabular::Table;

pub use composition::{
    contraction_report, effective_epsilon, smote_dp_generate, ContractionReport, EffectiveBudget,
    SmoteDpOptions,
};
pub use generators::{
    BayesNetGenerator, DpFlaggedIdentity, IdentityGenerator, LaplaceDpGenerator,
    SensitivitySource, SmoteDpGenerator, SmoteGenerator, DEFAULT_BINS, DEFAULT_DEGREE,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Privacy {
    NonPrivate,
    Dp(f64),
}

impl Privacy {
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Privacy::NonPrivate => None,
            Privacy::Dp(e) => Some(*e),
        }
    }
}

/// A synthetic-data generator: trains on a table and emits `n` records with
/// the same schema.
pub trait Generator: Send + Sync {
    fn name(&self) -> String;

    fn privacy(&self) -> Privacy;

    fn fit_and_sample(&self, table: &Table, n: usize, seed: u64) -> Result<Table>;
}

impl<G: Generator + ?Sized> Generator for Box<G> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn privacy(&self) -> Privacy {
        (**self).privacy()
    }

    fn fit_and_sample(&self, table: &Table, n: usize, seed: u64) -> Result<Table> {
        (**self).fit_and_sample(table, n, seed)
    }
}
