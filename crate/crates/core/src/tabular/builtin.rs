//! Bundled datasets: a German-Credit-shaped generator with the same column
//! names, kinds and category vocabularies as the public 10-attribute version
//! of that dataset, but with synthetic values.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::Result;
use crate::seed;
use crate::tabular::schema::{ColumnSpec, Schema};
use crate::tabular::table::{Cell, Table};

pub const GERMAN_CREDIT_ROWS: usize = 1000;
pub const GERMAN_CREDIT_SEED: u64 = 2024;

pub fn german_credit_schema() -> Schema {
    Schema::new(
        vec![
            ColumnSpec::bounded("age", 19.0, 75.0),
            ColumnSpec::categorical("sex", ["male", "female"]),
            ColumnSpec::categorical("job", ["0", "1", "2", "3"]),
            ColumnSpec::categorical("housing", ["own", "rent", "free"]),
            ColumnSpec::categorical(
                "saving_accounts",
                ["NA", "little", "moderate", "quite rich", "rich"],
            ),
            ColumnSpec::categorical("checking_account", ["NA", "little", "moderate", "rich"]),
            ColumnSpec::bounded("credit_amount", 250.0, 18424.0),
            ColumnSpec::bounded("duration", 4.0, 72.0),
            ColumnSpec::categorical(
                "purpose",
                [
                    "car",
                    "radio/TV",
                    "furniture/equipment",
                    "business",
                    "education",
                    "repairs",
                    "domestic appliances",
                    "vacation/others",
                ],
            ),
            ColumnSpec::categorical("risk", ["good", "bad"]),
        ],
        Some("risk".into()),
    )
    .expect("static schema is valid")
}

fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// `n` German-Credit-shaped records. Row `i` is drawn from its own substream.
pub fn german_credit_like(n: usize, seed: u64) -> Result<Table> {
    let age_dist = Gamma::new(2.2, 7.5).expect("valid gamma");
    let rows = (0..n)
        .map(|i| {
            let mut rng = seed::stream(seed, "german-credit", i as u64);
            let g: f64 = age_dist.sample(&mut rng);
            let age = (19.0 + g).min(75.0).round();
            let sex = pick(&mut rng, &[0.69, 0.31]);
            let job = pick(&mut rng, &[0.02, 0.2, 0.63, 0.15]);
            let housing = if age > 50.0 {
                pick(&mut rng, &[0.6, 0.12, 0.28])
            } else {
                pick(&mut rng, &[0.72, 0.19, 0.09])
            };
            let saving = pick(&mut rng, &[0.18, 0.6, 0.1, 0.06, 0.06]);
            let checking = pick(&mut rng, &[0.39, 0.27, 0.27, 0.07]);
            let purpose = pick(&mut rng, &[0.34, 0.28, 0.18, 0.1, 0.06, 0.02, 0.012, 0.012]);
            let z: f64 = StandardNormal.sample(&mut rng);
            let duration = (18.0 * (0.5 * z).exp() + 2.0 * job as f64).clamp(4.0, 72.0).round();
            let z: f64 = StandardNormal.sample(&mut rng);
            let amount = (140.0 * duration * (0.45 * z).exp() + 400.0 * job as f64)
                .clamp(250.0, 18424.0)
                .round();

            let checking_effect = [-1.9, 1.0, 0.3, -0.8][checking];
            let saving_effect = [-0.6, 0.35, 0.0, -0.8, -0.9][saving];
            let housing_effect = [-0.2, 0.35, 0.4][housing];
            let purpose_effect = [0.1, -0.35, 0.0, 0.2, 0.6, 0.3, 0.0, 0.3][purpose];
            let logit = -1.05
                + 0.06 * (duration - 20.0)
                + 0.00012 * (amount - 3200.0)
                - 0.025 * (age - 35.0)
                + checking_effect
                + saving_effect
                + housing_effect
                + purpose_effect
                + 0.15 * sex as f64;
            let p_bad = 1.0 / (1.0 + (-logit).exp());
            let risk = usize::from(rng.random::<f64>() < p_bad);

            vec![
                Cell::Num(age),
                Cell::Cat(sex),
                Cell::Cat(job),
                Cell::Cat(housing),
                Cell::Cat(saving),
                Cell::Cat(checking),
                Cell::Num(amount),
                Cell::Num(duration),
                Cell::Cat(purpose),
                Cell::Cat(risk),
            ]
        })
        .collect();
    Table::new(german_credit_schema(), rows)
}

/// The bundled 1000-row sample shipped under `data/`.
pub fn bundled_german_credit() -> Table {
    german_credit_like(GERMAN_CREDIT_ROWS, GERMAN_CREDIT_SEED).expect("generator output is valid")
}
