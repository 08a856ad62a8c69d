//! Differentially private synthetic tabular data with a SMOTE
//! pre-processing stage, plus a linkage attack and utility metrics for
//! evaluating the released data.

pub mod attack;
pub mod cli;
pub mod dp;
pub mod error;
pub mod experiment;
pub mod pipeline;
pub mod seed;
pub mod smote;
pub mod tabular;
pub mod utility;

pub use error::{Error, Result};
