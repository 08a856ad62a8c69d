//! Differentially private Bayesian network synthesizer.
//!
//! A simplified PrivBayes:
//!
//! 1. Continuous columns are discretized into equal-width bins (over the
//!    declared bounds, or the observed range when no bounds are declared).
//! 2. The network is built greedily. The first attribute is picked uniformly
//!    at random; every later step scores each (attribute, parent set)
//!    candidate by mutual information plus Laplace noise and keeps the
//!    noisy maximum. Half the budget goes to structure, split evenly over the
//!    `d - 1` data-dependent steps.
//! 3. Each attribute's joint counts with its parents get Laplace noise of
//!    scale `2d / ε` (the other half of the budget, `ε / 2d` per marginal),
//!    then negatives are clamped to zero and rows renormalized.
//!
//! All raw-data reads go through [`PrivateCounts`], which logs every access
//! in an [`AccessLedger`] so budget accounting can be checked.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::laplace::{laplace_sample, PrivacyBudget};
use crate::error::{Error, Result};
use crate::seed::{self, StreamRng};
use crate::tabular::{Cell, ColumnKind, Schema, Table};

/// Fitted network: structure, noisy conditional tables and bin edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesNetModel {
    pub schema: Schema,
    /// Column indices in sampling order.
    pub attribute_order: Vec<usize>,
    /// Parent column indices per column (indexed by column position).
    pub parents: Vec<Vec<usize>>,
    /// Per column, one distribution over the column's domain for each parent
    /// configuration. Configurations are mixed-radix over `parents[col]`,
    /// first parent most significant.
    pub cpt: Vec<Vec<Vec<f64>>>,
    /// Bin edges (`n_bins + 1` values) for continuous columns.
    pub bins: Vec<Option<Vec<f64>>>,
    pub degree: usize,
    /// `None` for the non-private variant.
    pub epsilon_structure: Option<f64>,
    pub epsilon_params: Option<f64>,
}

impl BayesNetModel {
    pub fn domain_size(&self, col: usize) -> usize {
        match &self.bins[col] {
            Some(edges) => edges.len() - 1,
            None => self.schema.column(col).categories.len(),
        }
    }

    pub fn total_epsilon(&self) -> Option<f64> {
        Some(self.epsilon_structure? + self.epsilon_params?)
    }

    /// Index of a parent configuration given per-column discrete values.
    pub fn config_index(&self, col: usize, values: &[usize]) -> usize {
        self.parents[col]
            .iter()
            .fold(0, |acc, &p| acc * self.domain_size(p) + values[p])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.schema.validate()?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Structural invariants: order is a permutation, parents precede their
    /// child, CPT shapes match and every row is a distribution.
    pub fn check(&self) -> Result<()> {
        let d = self.schema.len();
        let bad = |m: String| Err(Error::InvalidParameter(format!("malformed Bayes net: {m}")));
        let mut seen = vec![false; d];
        for &a in &self.attribute_order {
            if a >= d || seen[a] {
                return bad("attribute order is not a permutation".into());
            }
            seen[a] = true;
        }
        if self.attribute_order.len() != d || self.parents.len() != d || self.cpt.len() != d || self.bins.len() != d {
            return bad("per-column vectors have wrong length".into());
        }
        for (pos, &a) in self.attribute_order.iter().enumerate() {
            let earlier = &self.attribute_order[..pos];
            if self.parents[a].len() > self.degree || self.parents[a].iter().any(|p| !earlier.contains(p)) {
                return bad(format!("parents of column {a} break the order"));
            }
            let configs: usize = self.parents[a].iter().map(|&p| self.domain_size(p)).product();
            if self.cpt[a].len() != configs {
                return bad(format!("column {a} has {} CPT rows, expected {configs}", self.cpt[a].len()));
            }
            for row in &self.cpt[a] {
                let s: f64 = row.iter().sum();
                if row.len() != self.domain_size(a) || row.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > 1e-9 {
                    return bad(format!("column {a} has an invalid CPT row"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AccessPhase {
    /// Observed min / max of a continuous column without declared bounds.
    Discretization,
    Structure,
    Parameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub phase: AccessPhase,
    /// Budget charged; `None` when nothing was charged.
    pub epsilon: Option<f64>,
    /// Laplace scale applied to the released quantity; `None` if un-noised.
    pub noise_scale: Option<f64>,
    pub detail: String,
}

/// Log of every read of the raw table during a fit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccessLedger {
    pub records: Vec<AccessRecord>,
}

impl AccessLedger {
    pub fn epsilon_spent(&self, phase: AccessPhase) -> f64 {
        self.records
            .iter()
            .filter(|r| r.phase == phase)
            .filter_map(|r| r.epsilon)
            .sum()
    }

    pub fn count(&self, phase: AccessPhase) -> usize {
        self.records.iter().filter(|r| r.phase == phase).count()
    }
}

/// Mutual-information sensitivity bound (nats) for `n` records.
pub fn mutual_information_sensitivity(n: usize) -> f64 {
    let n = n as f64;
    if n < 2.0 {
        return 2.0_f64.ln();
    }
    (2.0 / n) * ((n + 1.0) / 2.0).ln() + ((n - 1.0) / n) * ((n + 1.0) / (n - 1.0)).ln()
}

/// Discretized view of a table. The only way to read it is through the
/// counting methods below, each of which records a ledger entry.
pub struct PrivateCounts {
    columns: Vec<Vec<usize>>,
    domain: Vec<usize>,
    n: usize,
    ledger: AccessLedger,
}

impl PrivateCounts {
    fn new(table: &Table, bins: &[Option<Vec<f64>>]) -> Self {
        let schema = table.schema();
        let mut columns = Vec::with_capacity(schema.len());
        let mut domain = Vec::with_capacity(schema.len());
        for (j, edges) in bins.iter().enumerate() {
            match edges {
                Some(e) => {
                    columns.push(table.rows().iter().map(|r| bin_of(e, r[j].num())).collect());
                    domain.push(e.len() - 1);
                }
                None => {
                    columns.push(table.rows().iter().map(|r| r[j].cat()).collect());
                    domain.push(schema.column(j).categories.len());
                }
            }
        }
        Self {
            columns,
            domain,
            n: table.n_rows(),
            ledger: AccessLedger::default(),
        }
    }

    // Joint counts of (parents..., attr) laid out as [config][value].
    fn joint(&self, attr: usize, parents: &[usize]) -> Vec<f64> {
        let configs: usize = parents.iter().map(|&p| self.domain[p]).product();
        let card = self.domain[attr];
        let mut counts = vec![0.0; configs * card];
        for i in 0..self.n {
            let cfg = parents
                .iter()
                .fold(0, |acc, &p| acc * self.domain[p] + self.columns[p][i]);
            counts[cfg * card + self.columns[attr][i]] += 1.0;
        }
        counts
    }

    fn mutual_information(&self, attr: usize, parents: &[usize]) -> f64 {
        if parents.is_empty() {
            return 0.0;
        }
        let card = self.domain[attr];
        let joint = self.joint(attr, parents);
        let n = self.n as f64;
        let configs = joint.len() / card;
        let mut p_attr = vec![0.0; card];
        let mut p_cfg = vec![0.0; configs];
        for c in 0..configs {
            for v in 0..card {
                let x = joint[c * card + v] / n;
                p_attr[v] += x;
                p_cfg[c] += x;
            }
        }
        let mut mi = 0.0;
        for c in 0..configs {
            for v in 0..card {
                let x = joint[c * card + v] / n;
                if x > 0.0 {
                    mi += x * (x / (p_attr[v] * p_cfg[c])).ln();
                }
            }
        }
        mi.max(0.0)
    }

    /// Noisy-max choice among (attribute, parent set) candidates. With
    /// `step_epsilon = None` the exact maximum is returned.
    fn select(
        &mut self,
        candidates: &[(usize, Vec<usize>)],
        step_epsilon: Option<f64>,
        rng: &mut StreamRng,
    ) -> Result<usize> {
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|(a, p)| self.mutual_information(*a, p))
            .collect();
        // Laplace report-noisy-max on scores with sensitivity S needs scale 2S/ε.
        let scale = step_epsilon.map(|e| 2.0 * mutual_information_sensitivity(self.n) / e);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (i, s) in scores.iter().enumerate() {
            let noisy = match scale {
                Some(b) => s + laplace_sample(b, rng)?,
                None => *s,
            };
            if noisy > best_score {
                best_score = noisy;
                best = i;
            }
        }
        self.ledger.records.push(AccessRecord {
            phase: AccessPhase::Structure,
            epsilon: step_epsilon,
            noise_scale: scale,
            detail: format!("noisy max over {} candidates", candidates.len()),
        });
        Ok(best)
    }

    /// Joint counts of `(parents, attr)` with Laplace noise of `scale` added
    /// to every cell, or exact counts when `scale` is `None`.
    fn noisy_joint(
        &mut self,
        attr: usize,
        parents: &[usize],
        epsilon: Option<f64>,
        scale: Option<f64>,
        rng: &mut StreamRng,
    ) -> Result<Vec<f64>> {
        let mut counts = self.joint(attr, parents);
        if let Some(b) = scale {
            for c in counts.iter_mut() {
                *c += laplace_sample(b, rng)?;
            }
        }
        self.ledger.records.push(AccessRecord {
            phase: AccessPhase::Parameters,
            epsilon,
            noise_scale: scale,
            detail: format!("counts of column {attr} given {parents:?}"),
        });
        Ok(counts)
    }
}

fn bin_of(edges: &[f64], v: f64) -> usize {
    let n_bins = edges.len() - 1;
    let lo = edges[0];
    let hi = edges[n_bins];
    let pos = ((v - lo) / (hi - lo) * n_bins as f64).floor();
    if pos.is_nan() || pos < 0.0 {
        0
    } else {
        (pos as usize).min(n_bins - 1)
    }
}

fn bin_edges(lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo, lo + 1.0) };
    (0..=n_bins)
        .map(|i| if i == n_bins { hi } else { lo + (hi - lo) * i as f64 / n_bins as f64 })
        .collect()
}

fn k_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in k_subsets(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn normalize_rows(counts: Vec<f64>, card: usize) -> Vec<Vec<f64>> {
    counts
        .chunks(card)
        .map(|row| {
            let clamped: Vec<f64> = row.iter().map(|&c| c.max(0.0)).collect();
            let total: f64 = clamped.iter().sum();
            if total > 0.0 {
                clamped.iter().map(|c| c / total).collect()
            } else {
                vec![1.0 / card as f64; card]
            }
        })
        .collect()
}

/// Fit options shared by the private and non-private variants.
#[derive(Debug, Clone, Copy)]
struct FitOptions {
    budget: Option<PrivacyBudget>,
    degree: usize,
    n_bins: usize,
    seed: u64,
}

fn fit(table: &Table, opts: FitOptions) -> Result<(BayesNetModel, AccessLedger)> {
    table.ensure_non_empty()?;
    if opts.n_bins < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_bins must be at least 2, got {}",
            opts.n_bins
        )));
    }
    let schema = table.schema().clone();
    let d = schema.len();

    let mut ledger = AccessLedger::default();
    let bins: Vec<Option<Vec<f64>>> = schema
        .columns()
        .iter()
        .enumerate()
        .map(|(j, spec)| match spec.kind {
            ColumnKind::Categorical => None,
            ColumnKind::Continuous => {
                let (lo, hi) = match spec.bounds {
                    Some(b) => b,
                    None => {
                        ledger.records.push(AccessRecord {
                            phase: AccessPhase::Discretization,
                            epsilon: None,
                            noise_scale: None,
                            detail: format!("observed range of `{}`", spec.name),
                        });
                        let col = table.numeric_column(j);
                        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        (lo, hi)
                    }
                };
                Some(bin_edges(lo, hi, opts.n_bins))
            }
        })
        .collect();

    let mut counts = PrivateCounts::new(table, &bins);
    counts.ledger = ledger;

    let eps = opts.budget.map(|b| b.epsilon());
    let eps_structure = eps.map(|e| e / 2.0);
    let eps_params = eps.map(|e| e / 2.0);
    let step_eps = eps_structure.map(|e| if d > 1 { e / (d - 1) as f64 } else { e });

    let mut rng = seed::stream(opts.seed, "bayes-structure", 0);
    let mut order = vec![rng.random_range(0..d)];
    let mut parents = vec![Vec::new(); d];
    while order.len() < d {
        let parent_count = opts.degree.min(order.len());
        let subsets = k_subsets(&order, parent_count);
        let candidates: Vec<(usize, Vec<usize>)> = (0..d)
            .filter(|a| !order.contains(a))
            .flat_map(|a| subsets.iter().map(move |p| (a, p.clone())))
            .collect();
        let pick = counts.select(&candidates, step_eps, &mut rng)?;
        let (a, p) = candidates[pick].clone();
        order.push(a);
        parents[a] = p;
    }

    // ε/2 over d marginals, count sensitivity 1: scale d / (ε/2) = 2d / ε
    let param_scale = eps_params.map(|e| d as f64 / e);
    let per_marginal = eps_params.map(|e| e / d as f64);
    let mut cpt = vec![Vec::new(); d];
    for &a in &order {
        let mut prng = seed::stream(opts.seed, "bayes-params", a as u64);
        let noisy = counts.noisy_joint(a, &parents[a], per_marginal, param_scale, &mut prng)?;
        cpt[a] = normalize_rows(noisy, counts.domain[a]);
    }

    let model = BayesNetModel {
        schema,
        attribute_order: order,
        parents,
        cpt,
        bins,
        degree: opts.degree,
        epsilon_structure: eps_structure,
        epsilon_params: eps_params,
    };
    Ok((model, counts.ledger))
}

fn check_degree(degree: i64) -> Result<usize> {
    usize::try_from(degree).map_err(|_| Error::InvalidDegree(degree))
}

/// Fits an ε-DP Bayesian network.
pub fn fit_dp_bayesnet(
    table: &Table,
    budget: PrivacyBudget,
    degree: i64,
    n_bins: usize,
    seed: u64,
) -> Result<BayesNetModel> {
    fit_dp_bayesnet_with_ledger(table, budget, degree, n_bins, seed).map(|(m, _)| m)
}

/// As [`fit_dp_bayesnet`], also returning the raw-data access ledger.
pub fn fit_dp_bayesnet_with_ledger(
    table: &Table,
    budget: PrivacyBudget,
    degree: i64,
    n_bins: usize,
    seed: u64,
) -> Result<(BayesNetModel, AccessLedger)> {
    let degree = check_degree(degree)?;
    fit(
        table,
        FitOptions {
            budget: Some(budget),
            degree,
            n_bins,
            seed,
        },
    )
}

/// Same structure search and estimation with every noise term removed.
pub fn fit_bayesnet(table: &Table, degree: i64, n_bins: usize, seed: u64) -> Result<BayesNetModel> {
    let degree = check_degree(degree)?;
    fit(
        table,
        FitOptions {
            budget: None,
            degree,
            n_bins,
            seed,
        },
    )
    .map(|(m, _)| m)
}

fn draw<R: Rng>(dist: &[f64], rng: &mut R) -> usize {
    let mut u: f64 = rng.random();
    for (i, &p) in dist.iter().enumerate() {
        if u < p {
            return i;
        }
        u -= p;
    }
    // rounding left a sliver; fall back to the last non-zero entry
    dist.iter().rposition(|&p| p > 0.0).unwrap_or(dist.len() - 1)
}

/// Ancestral sampling of `n` records. Continuous bins decode to a uniform
/// draw inside the bin.
pub fn sample_bayesnet(model: &BayesNetModel, n: usize, seed: u64) -> Result<Table> {
    let d = model.schema.len();
    let rows: Vec<Vec<Cell>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::stream(seed, "bayes-sample", r as u64);
            let mut values = vec![0usize; d];
            for &a in &model.attribute_order {
                let cfg = model.config_index(a, &values);
                values[a] = draw(&model.cpt[a][cfg], &mut rng);
            }
            (0..d)
                .map(|j| match &model.bins[j] {
                    Some(edges) => {
                        let b = values[j];
                        Cell::Num(edges[b] + rng.random::<f64>() * (edges[b + 1] - edges[b]))
                    }
                    None => Cell::Cat(values[j]),
                })
                .collect()
        })
        .collect();
    Table::new(model.schema.clone(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::ColumnSpec;

    fn binary_pair(n: usize) -> Table {
        let s = Schema::new(
            vec![
                ColumnSpec::categorical("a", ["0", "1"]),
                ColumnSpec::categorical("b", ["0", "1"]),
                ColumnSpec::categorical("noise", ["0", "1", "2"]),
            ],
            None,
        )
        .unwrap();
        let rows = (0..n)
            .map(|i| vec![Cell::Cat(i % 2), Cell::Cat(i % 2), Cell::Cat((i * 7 / 3) % 3)])
            .collect();
        Table::new(s, rows).unwrap()
    }

    #[test]
    fn subsets() {
        assert_eq!(k_subsets(&[1, 2, 3], 2), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(k_subsets(&[1], 0), vec![Vec::<usize>::new()]);
        assert!(k_subsets(&[1], 2).is_empty());
    }

    #[test]
    fn binning() {
        let e = bin_edges(0.0, 10.0, 5);
        assert_eq!(e, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(bin_of(&e, 0.0), 0);
        assert_eq!(bin_of(&e, 3.9), 1);
        assert_eq!(bin_of(&e, 10.0), 4);
        assert_eq!(bin_of(&e, -3.0), 0);
        assert_eq!(bin_of(&e, 99.0), 4);
    }

    #[test]
    fn mi_sensitivity_shrinks_with_n() {
        assert!(mutual_information_sensitivity(100) > mutual_information_sensitivity(1000));
        assert!(mutual_information_sensitivity(1000) > 0.0);
    }

    #[test]
    fn degree_zero_has_no_parents() {
        let t = binary_pair(200);
        let m = fit_dp_bayesnet(&t, PrivacyBudget::new(1.0).unwrap(), 0, 4, 1).unwrap();
        assert!(m.parents.iter().all(Vec::is_empty));
        assert!(m.cpt.iter().all(|c| c.len() == 1));
        m.check().unwrap();
    }

    #[test]
    fn correlated_pair_is_linked() {
        let t = binary_pair(400);
        for seed in 0..5 {
            let m = fit_dp_bayesnet(&t, PrivacyBudget::new(1e6).unwrap(), 1, 4, seed).unwrap();
            let pos = |c| m.attribute_order.iter().position(|&a| a == c).unwrap();
            let (first, second) = if pos(0) < pos(1) { (0, 1) } else { (1, 0) };
            assert_eq!(m.parents[second], vec![first], "seed {seed}: {:?}", m.parents);
        }
    }

    #[test]
    fn negative_degree_rejected() {
        let t = binary_pair(10);
        assert!(matches!(
            fit_dp_bayesnet(&t, PrivacyBudget::new(1.0).unwrap(), -1, 4, 0),
            Err(Error::InvalidDegree(-1))
        ));
    }

    #[test]
    fn empty_table_rejected() {
        let t = binary_pair(4).subset(&[]);
        assert!(matches!(
            fit_dp_bayesnet(&t, PrivacyBudget::new(1.0).unwrap(), 1, 4, 0),
            Err(Error::EmptyTable)
        ));
    }

    #[test]
    fn json_round_trip() {
        let t = binary_pair(50);
        let m = fit_dp_bayesnet(&t, PrivacyBudget::new(2.0).unwrap(), 2, 4, 3).unwrap();
        assert_eq!(BayesNetModel::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn sampling_is_deterministic() {
        let t = binary_pair(100);
        let m = fit_bayesnet(&t, 1, 4, 0).unwrap();
        assert_eq!(sample_bayesnet(&m, 30, 9).unwrap(), sample_bayesnet(&m, 30, 9).unwrap());
        assert_eq!(m.total_epsilon(), None);
    }
}
