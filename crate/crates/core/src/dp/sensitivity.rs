//! Sensitivity of a generator's output moments.
//!
//! For neighboring datasets `X`, `X'` and generator outputs `S(X)`, `S(X')`
//! the per-pair quantity is
//!
//! ```text
//! q(X, X') = ‖μ_S(X) − μ_S(X')‖₂ + tr(Σ_S(X)) + tr(Σ_S(X'))
//! ```
//!
//! and the sensitivity is its maximum over neighbors. The expectation over
//! generator randomness is approximated by averaging output moments over
//! seeded trials, and the maximum is taken over a sample of neighbors.
//! Raw sensitivity `Δf` is the same estimator with the identity generator.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::Generator;
use crate::seed;
use crate::tabular::{moments, MomentSummary, Table};

/// Multiplier applied to an estimated sensitivity before it calibrates noise.
/// Compensates for the sampled maximum under-estimating the true supremum.
pub const SENSITIVITY_SAFETY_FACTOR: f64 = 1.1;

/// Smallest table the estimator accepts: each neighbor still needs two rows
/// for a covariance.
pub const MIN_SENSITIVITY_ROWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NeighborMode {
    /// `X'` is `X` with one row removed.
    #[default]
    RemoveOne,
    /// `X'` is `X` with one row overwritten by a copy of another row.
    ReplaceOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEstimate {
    /// Raw-data sensitivity `Δf`.
    pub delta_f: f64,
    /// Generator-output sensitivity `Δf_s`.
    pub delta_f_s: f64,
    /// `Δf_s / Δf`; 1 when `Δf` is zero.
    pub alpha: f64,
    pub trials: usize,
    pub neighbor_mode: NeighborMode,
}

impl SensitivityEstimate {
    pub fn new(delta_f: f64, delta_f_s: f64, trials: usize, neighbor_mode: NeighborMode) -> Self {
        let alpha = if delta_f > 0.0 { delta_f_s / delta_f } else { 1.0 };
        Self {
            delta_f,
            delta_f_s,
            alpha,
            trials,
            neighbor_mode,
        }
    }

    /// `Δf_s` scaled by [`SENSITIVITY_SAFETY_FACTOR`], for noise calibration.
    pub fn calibrated_delta_f_s(&self) -> f64 {
        self.delta_f_s * SENSITIVITY_SAFETY_FACTOR
    }
}

/// `q(a, b)` for two moment summaries over the same encoding.
pub fn sensitivity_query(a: &MomentSummary, b: &MomentSummary) -> f64 {
    (&a.mean - &b.mean).norm() + a.trace() + b.trace()
}

/// Builds the neighbor of `table` obtained by perturbing row `row`.
pub fn neighbor_table(table: &Table, row: usize, mode: NeighborMode, seed: u64) -> Table {
    match mode {
        NeighborMode::RemoveOne => table.without_row(row),
        NeighborMode::ReplaceOne => {
            let mut rng = seed::stream(seed, "sens-replace", row as u64);
            let mut src = rng.random_range(0..table.n_rows() - 1);
            if src >= row {
                src += 1;
            }
            let mut rows = table.rows().to_vec();
            rows[row] = table.row(src).clone();
            table.with_rows(rows).expect("rows come from the same table")
        }
    }
}

/// Rows whose perturbation forms the sampled neighbors: `neighbor_samples`
/// distinct rows, or every row when that many or more are requested.
pub fn sampled_neighbor_rows(n: usize, neighbor_samples: usize, seed: u64) -> Vec<usize> {
    if neighbor_samples >= n {
        return (0..n).collect();
    }
    let mut rng = seed::stream(seed, "sens-neighbors", 0);
    let mut rows = index::sample(&mut rng, n, neighbor_samples).into_vec();
    rows.sort_unstable();
    rows
}

fn check_inputs(table: &Table, trials: usize, neighbor_samples: usize) -> Result<()> {
    table.ensure_rows(MIN_SENSITIVITY_ROWS)?;
    if trials == 0 || neighbor_samples == 0 {
        return Err(Error::InvalidParameter(
            "trials and neighbor_samples must be at least 1".into(),
        ));
    }
    Ok(())
}

/// `Δf` of the raw data (identity generator), without the safety factor.
pub fn raw_sensitivity(
    table: &Table,
    neighbor_samples: usize,
    seed: u64,
    mode: NeighborMode,
) -> Result<f64> {
    check_inputs(table, 1, neighbor_samples)?;
    let full = moments(table)?;
    let rows = sampled_neighbor_rows(table.n_rows(), neighbor_samples, seed);
    let qs = rows
        .par_iter()
        .map(|&r| Ok(sensitivity_query(&full, &moments(&neighbor_table(table, r, mode, seed))?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(qs.into_iter().fold(0.0, f64::max))
}

fn averaged_output_moments(
    generator: &dyn Generator,
    table: &Table,
    trials: usize,
    seed: u64,
) -> Result<MomentSummary> {
    let runs = (0..trials)
        .map(|t| {
            let trial_seed = seed::derive_seed(seed, "sens-trial", t as u64);
            let out = generator
                .fit_and_sample(table, table.n_rows(), trial_seed)
                .map_err(|e| Error::generator(generator.name(), e))?;
            moments(&out).map_err(|e| Error::generator(generator.name(), e))
        })
        .collect::<Result<Vec<_>>>()?;
    MomentSummary::average(&runs)
}

/// Estimates `Δf`, `Δf_s` and `α` for `generator` on `table` with
/// remove-one neighbors.
pub fn estimate_sensitivity(
    table: &Table,
    generator: &dyn Generator,
    trials: usize,
    neighbor_samples: usize,
    seed: u64,
) -> Result<SensitivityEstimate> {
    estimate_sensitivity_with_mode(
        table,
        generator,
        trials,
        neighbor_samples,
        seed,
        NeighborMode::RemoveOne,
    )
}

pub fn estimate_sensitivity_with_mode(
    table: &Table,
    generator: &dyn Generator,
    trials: usize,
    neighbor_samples: usize,
    seed: u64,
    mode: NeighborMode,
) -> Result<SensitivityEstimate> {
    check_inputs(table, trials, neighbor_samples)?;
    let delta_f = raw_sensitivity(table, neighbor_samples, seed, mode)?;

    // trial seeds are shared between X and every X' (common random numbers)
    let full = averaged_output_moments(generator, table, trials, seed)?;
    let rows = sampled_neighbor_rows(table.n_rows(), neighbor_samples, seed);
    let qs = rows
        .par_iter()
        .map(|&r| {
            let nb = neighbor_table(table, r, mode, seed);
            Ok(sensitivity_query(&full, &averaged_output_moments(generator, &nb, trials, seed)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let delta_f_s = qs.into_iter().fold(0.0, f64::max);
    Ok(SensitivityEstimate::new(delta_f, delta_f_s, trials, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::IdentityGenerator;
    use crate::tabular::{Cell, ColumnSpec, Schema};

    fn tiny() -> Table {
        let s = Schema::new(
            vec![ColumnSpec::continuous("a"), ColumnSpec::continuous("b")],
            None,
        )
        .unwrap();
        let pts = [(0.0, 1.0), (2.0, 0.5), (1.0, -1.0), (4.0, 3.0), (-2.0, 0.0)];
        Table::new(s, pts.iter().map(|&(a, b)| vec![Cell::Num(a), Cell::Num(b)]).collect())
            .unwrap()
    }

    #[test]
    fn identity_alpha_is_one() {
        let t = tiny();
        let est = estimate_sensitivity(&t, &IdentityGenerator, 2, 5, 3).unwrap();
        assert_eq!(est.delta_f, est.delta_f_s);
        assert_eq!(est.alpha, 1.0);
        assert!((est.calibrated_delta_f_s() - 1.1 * est.delta_f_s).abs() < 1e-12);
    }

    #[test]
    fn replace_one_keeps_row_count() {
        let t = tiny();
        let nb = neighbor_table(&t, 2, NeighborMode::ReplaceOne, 1);
        assert_eq!(nb.n_rows(), t.n_rows());
        assert_ne!(nb.row(2), t.row(2));
        assert!(raw_sensitivity(&t, 5, 1, NeighborMode::ReplaceOne).unwrap() > 0.0);
    }

    #[test]
    fn too_small_or_bad_parameters() {
        let t = tiny().subset(&[0, 1]);
        assert!(matches!(
            estimate_sensitivity(&t, &IdentityGenerator, 1, 1, 0),
            Err(Error::InsufficientRows { .. })
        ));
        assert!(estimate_sensitivity(&tiny(), &IdentityGenerator, 0, 1, 0).is_err());
        assert!(estimate_sensitivity(&tiny(), &IdentityGenerator, 1, 0, 0).is_err());
    }

    #[test]
    fn neighbor_row_sampling() {
        assert_eq!(sampled_neighbor_rows(4, 10, 0), vec![0, 1, 2, 3]);
        let rows = sampled_neighbor_rows(100, 7, 5);
        assert_eq!(rows.len(), 7);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
    }
}
