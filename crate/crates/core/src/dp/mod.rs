//! Differential-privacy mechanisms and the DP Bayesian-network generator.

pub mod bayesnet;
mod laplace;
mod mechanism;
mod sensitivity;

pub use bayesnet::{
    fit_bayesnet, fit_dp_bayesnet, fit_dp_bayesnet_with_ledger, sample_bayesnet, AccessLedger,
    AccessPhase, AccessRecord, BayesNetModel,
};
pub use laplace::{laplace_sample, PrivacyBudget};
pub use mechanism::{laplace_mechanism, laplace_scale};
pub use sensitivity::{
    estimate_sensitivity, estimate_sensitivity_with_mode, neighbor_table, raw_sensitivity,
    sampled_neighbor_rows, sensitivity_query, NeighborMode, SensitivityEstimate,
    MIN_SENSITIVITY_ROWS, SENSITIVITY_SAFETY_FACTOR,
};
