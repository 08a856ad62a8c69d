#![allow(dead_code)]

use std::sync::atomic::{AtomicUsize, Ordering};

use synthdp::dp::{fit_bayesnet, sample_bayesnet};
use synthdp::pipeline::{Generator, Privacy};
use synthdp::tabular::{sample_gaussian_mixture, Cell, ColumnSpec, MixtureSpec, Schema, Table};
use synthdp::Result;

/// Continuous-only table from a list of rows.
pub fn numeric(rows: &[Vec<f64>]) -> Table {
    let d = rows[0].len();
    let schema = Schema::new((0..d).map(|j| ColumnSpec::continuous(format!("x{j}"))).collect(), None).unwrap();
    Table::new(schema, rows.iter().map(|r| r.iter().map(|&v| Cell::Num(v)).collect()).collect()).unwrap()
}

/// One class of the two-class benchmark, label column dropped.
pub fn gaussian_class(dim: usize, n: usize, seed: u64) -> Table {
    let t = sample_gaussian_mixture(&MixtureSpec::two_class(dim, n), seed).unwrap();
    let rows: Vec<Vec<f64>> = t.rows()[..n]
        .iter()
        .map(|r| r[..dim].iter().map(|c| c.num()).collect())
        .collect();
    numeric(&rows)
}

/// Mixed table with a label: two continuous columns and two categoricals.
pub fn mixed_labelled(n: usize, seed: u64) -> Table {
    use rand::Rng;
    let mut rng = synthdp::seed::stream(seed, "test-mixed", 0);
    let schema = Schema::new(
        vec![
            ColumnSpec::continuous("a"),
            ColumnSpec::bounded("b", 0.0, 10.0),
            ColumnSpec::categorical("c", ["p", "q", "r"]),
            ColumnSpec::categorical("y", ["no", "yes"]),
        ],
        Some("y".into()),
    )
    .unwrap();
    let rows = (0..n)
        .map(|_| {
            let y = rng.random_range(0..2usize);
            let a: f64 = rng.random::<f64>() + 2.0 * y as f64;
            let b: f64 = rng.random_range(0.0..10.0);
            let c = if rng.random::<f64>() < 0.7 { y } else { 2 };
            vec![Cell::Num(a), Cell::Num(b), Cell::Cat(c), Cell::Cat(y)]
        })
        .collect();
    Table::new(schema, rows).unwrap()
}

/// Ignores its input and samples a fixed non-private Bayesian network fit
/// on a reference table the attacker never sees.
pub struct InputIgnoring {
    pub model: synthdp::dp::BayesNetModel,
}

impl InputIgnoring {
    pub fn new(reference: &Table) -> Self {
        Self {
            model: fit_bayesnet(reference, 2, 10, 99).unwrap(),
        }
    }
}

impl Generator for InputIgnoring {
    fn name(&self) -> String {
        "input-ignoring".into()
    }

    fn privacy(&self) -> Privacy {
        Privacy::NonPrivate
    }

    fn fit_and_sample(&self, _: &Table, n: usize, seed: u64) -> Result<Table> {
        sample_bayesnet(&self.model, n, seed)
    }
}

/// Counts how often its inner generator is invoked and which tables it saw.
pub struct Spy<G> {
    pub inner: G,
    pub calls: AtomicUsize,
    pub seen: std::sync::Mutex<Vec<Table>>,
}

impl<G> Spy<G> {
    pub fn new(inner: G) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
            seen: std::sync::Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<G: Generator> Generator for Spy<G> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn privacy(&self) -> Privacy {
        self.inner.privacy()
    }

    fn fit_and_sample(&self, table: &Table, n: usize, seed: u64) -> Result<Table> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.seen.lock().unwrap().push(table.clone());
        self.inner.fit_and_sample(table, n, seed)
    }
}

/// Plain two-pass mean and unbiased covariance of row vectors.
pub fn naive_moments(x: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = x.len() as f64;
    let d = x[0].len();
    let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let cov = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| x.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (n - 1.0))
                .collect()
        })
        .collect();
    (mean, cov)
}

pub fn rows_of(t: &Table) -> Vec<Vec<f64>> {
    t.rows().iter().map(|r| r.iter().map(|c| c.num()).collect()).collect()
}
