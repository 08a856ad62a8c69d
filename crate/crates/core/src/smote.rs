//! SMOTE / SMOTENC sample generation.
//!
//! Each synthetic record starts at a base row `x0`, picks one of its `k`
//! nearest neighbors `x` and returns `x0 + w (x - x0)` on continuous columns
//! with `w ~ U[0, 1)`. Categorical columns take the majority value of the
//! base row's neighbor set.
//!
//! Base rows are drawn by walking shuffled permutations of the row pool, so
//! every row serves as a base once per pass. Each base is still uniform over
//! the pool, but the output does not carry the resampling noise of drawing
//! bases independently; that noise would otherwise mask the covariance
//! contraction on low-dimensional data.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{Cell, DistanceMetric, Record, Schema, Table};

#[derive(Debug, Clone, PartialEq)]
pub struct SmoteConfig {
    /// Neighbor count K.
    pub k: usize,
    /// Number of synthetic records to emit.
    pub n_out: usize,
    pub stratify_by_label: bool,
    pub seed: u64,
}

impl SmoteConfig {
    pub fn new(k: usize, n_out: usize, seed: u64) -> Self {
        Self {
            k,
            n_out,
            stratify_by_label: true,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("SMOTE k must be at least 1".into()));
        }
        if self.n_out == 0 {
            return Err(Error::InvalidParameter("SMOTE n_out must be at least 1".into()));
        }
        Ok(())
    }
}

/// Flattened, scale-normalized view of a table for fast distance evaluation.
struct Points {
    cont: Vec<f64>,
    n_cont: usize,
    cats: Vec<usize>,
    n_cat: usize,
    penalty_sq: f64,
}

impl Points {
    fn new(table: &Table, metric: &DistanceMetric) -> Self {
        let schema = table.schema();
        let cont_idx = schema.continuous_indices();
        let cat_idx = schema.categorical_indices();
        let mut cont = Vec::with_capacity(table.n_rows() * cont_idx.len());
        let mut cats = Vec::with_capacity(table.n_rows() * cat_idx.len());
        for row in table.rows() {
            cont.extend(cont_idx.iter().map(|&j| row[j].num() / metric.continuous_scales[j]));
            cats.extend(cat_idx.iter().map(|&j| row[j].cat()));
        }
        Self {
            cont,
            n_cont: cont_idx.len(),
            cats,
            n_cat: cat_idx.len(),
            penalty_sq: metric.categorical_penalty * metric.categorical_penalty,
        }
    }

    fn dist_sq(&self, a: usize, b: usize) -> f64 {
        let ca = &self.cont[a * self.n_cont..(a + 1) * self.n_cont];
        let cb = &self.cont[b * self.n_cont..(b + 1) * self.n_cont];
        let mut d: f64 = ca.iter().zip(cb).map(|(x, y)| (x - y) * (x - y)).sum();
        if self.n_cat > 0 {
            let ka = &self.cats[a * self.n_cat..(a + 1) * self.n_cat];
            let kb = &self.cats[b * self.n_cat..(b + 1) * self.n_cat];
            d += self.penalty_sq * ka.iter().zip(kb).filter(|(x, y)| x != y).count() as f64;
        }
        d
    }

    /// The `k` candidates closest to `query`, query excluded, ordered by
    /// (distance, row index).
    fn nearest(&self, query: usize, k: usize, candidates: &[usize]) -> Vec<usize> {
        let mut scored: Vec<(f64, usize)> = candidates
            .iter()
            .filter(|&&c| c != query)
            .map(|&c| (self.dist_sq(query, c), c))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_unstable_by(cmp);
        scored.into_iter().map(|(_, i)| i).collect()
    }
}

/// Exact k-nearest-neighbor search by brute force.
///
/// Candidates are all rows of `table`, or only `restrict_to` when given; the
/// query row itself is never returned. Ties break by ascending row index.
pub fn knn(
    table: &Table,
    query_index: usize,
    k: usize,
    metric: &DistanceMetric,
    restrict_to: Option<&[usize]>,
) -> Result<Vec<usize>> {
    if query_index >= table.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "query row {query_index} out of range"
        )));
    }
    let all: Vec<usize>;
    let candidates = match restrict_to {
        Some(r) => r,
        None => {
            all = (0..table.n_rows()).collect();
            &all
        }
    };
    let available = candidates.iter().filter(|&&c| c != query_index).count();
    if k == 0 || available < k {
        return Err(Error::NotEnoughNeighbors {
            needed: k,
            available,
        });
    }
    Ok(Points::new(table, metric).nearest(query_index, k, candidates))
}

/// Interpolates one synthetic record between `x0` and `x_neighbor`.
pub fn interpolate(
    x0: &Record,
    x_neighbor: &Record,
    w: f64,
    schema: &Schema,
    neighbor_set: &[&Record],
) -> Record {
    assert!(!neighbor_set.is_empty(), "neighbor set must be non-empty");
    let mut out = Vec::with_capacity(schema.len());
    let mut votes = Vec::new();
    for (j, spec) in schema.columns().iter().enumerate() {
        match (x0[j], x_neighbor[j]) {
            (Cell::Num(a), Cell::Num(b)) => out.push(Cell::Num(a + w * (b - a))),
            _ => {
                votes.clear();
                votes.resize(spec.categories.len(), 0usize);
                for r in neighbor_set {
                    votes[r[j].cat()] += 1;
                }
                // max_by_key returns the last maximum; scan for the first
                let mut best = 0;
                for (c, &v) in votes.iter().enumerate() {
                    if v > votes[best] {
                        best = c;
                    }
                }
                out.push(Cell::Cat(best));
            }
        }
    }
    out
}

/// Neighbor lists for every row, searched within its stratum.
#[derive(Debug, Clone)]
pub struct NeighborIndex {
    k: usize,
    strata: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
}

impl NeighborIndex {
    /// Builds the index. With `stratify` and a label column, each non-empty
    /// label class is its own stratum; otherwise the whole table is one.
    pub fn build(table: &Table, k: usize, metric: &DistanceMetric, stratify: bool) -> Result<Self> {
        table.ensure_non_empty()?;
        if k == 0 {
            return Err(Error::InvalidParameter("SMOTE k must be at least 1".into()));
        }
        let strata: Vec<Vec<usize>> = match table.label_groups().filter(|_| stratify) {
            Some(groups) => groups.into_iter().filter(|g| !g.is_empty()).collect(),
            None => vec![(0..table.n_rows()).collect()],
        };
        for s in &strata {
            if s.len() < k + 1 {
                return Err(Error::NotEnoughNeighbors {
                    needed: k,
                    available: s.len() - 1,
                });
            }
        }
        let points = Points::new(table, metric);
        let mut neighbors = vec![Vec::new(); table.n_rows()];
        for s in &strata {
            let lists: Vec<(usize, Vec<usize>)> = s
                .par_iter()
                .map(|&q| (q, points.nearest(q, k, s)))
                .collect();
            for (q, l) in lists {
                neighbors[q] = l;
            }
        }
        Ok(Self {
            k,
            strata,
            neighbors,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn strata(&self) -> &[Vec<usize>] {
        &self.strata
    }

    pub fn neighbors_of(&self, row: usize) -> &[usize] {
        &self.neighbors[row]
    }
}

/// Splits `total` across groups in proportion to `sizes` by largest
/// remainder. Remainder ties go to the lower group index.
pub fn proportional_counts(sizes: &[usize], total: usize) -> Vec<usize> {
    let n: usize = sizes.iter().sum();
    let mut counts: Vec<usize> = sizes.iter().map(|&s| s * total / n).collect();
    let mut rest: Vec<(usize, usize)> = sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| ((s * total) % n, i))
        .collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = total - counts.iter().sum::<usize>();
    for &(_, i) in rest.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Emits `cfg.n_out` SMOTE records using a prebuilt neighbor index.
pub fn generate_with_index(table: &Table, index: &NeighborIndex, n_out: usize, seed: u64) -> Result<Table> {
    if n_out == 0 {
        return Err(Error::InvalidParameter("SMOTE n_out must be at least 1".into()));
    }
    let sizes: Vec<usize> = index.strata.iter().map(Vec::len).collect();
    let counts = proportional_counts(&sizes, n_out);

    let mut bases = Vec::with_capacity(n_out);
    for (g, (stratum, &count)) in index.strata.iter().zip(&counts).enumerate() {
        let group_seed = seed::derive_seed(seed, "smote-bases", g as u64);
        let mut taken = 0;
        let mut pass = 0;
        while taken < count {
            let mut perm = stratum.clone();
            perm.shuffle(&mut seed::stream(group_seed, "pass", pass));
            let take = (count - taken).min(perm.len());
            bases.extend_from_slice(&perm[..take]);
            taken += take;
            pass += 1;
        }
    }

    let schema = table.schema();
    let label = schema.label_index();
    let rows: Vec<Record> = bases
        .par_iter()
        .enumerate()
        .map(|(r, &base)| {
            let mut rng = seed::stream(seed, "smote-record", r as u64);
            let nbrs = &index.neighbors[base];
            let pick = nbrs[rng.random_range(0..nbrs.len())];
            let w: f64 = rng.random();
            let set: Vec<&Record> = nbrs.iter().map(|&i| table.row(i)).collect();
            let mut rec = interpolate(table.row(base), table.row(pick), w, schema, &set);
            if let Some(l) = label {
                rec[l] = table.row(base)[l];
            }
            rec
        })
        .collect();
    table.with_rows(rows)
}

/// SMOTE over the whole table (every class, not just a minority).
pub fn generate(table: &Table, cfg: &SmoteConfig, metric: &DistanceMetric) -> Result<Table> {
    cfg.validate()?;
    let index = NeighborIndex::build(table, cfg.k, metric, cfg.stratify_by_label)?;
    generate_with_index(table, &index, cfg.n_out, cfg.seed)
}
