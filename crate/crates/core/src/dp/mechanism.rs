use crate::dp::laplace::{laplace_sample, PrivacyBudget};
use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{Cell, Table};

/// Noise scale `sensitivity / ε` used by [`laplace_mechanism`].
pub fn laplace_scale(sensitivity: f64, budget: PrivacyBudget) -> Result<f64> {
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return Err(Error::InvalidSensitivity(sensitivity));
    }
    Ok(sensitivity / budget.epsilon())
}

/// Adds independent Laplace(sensitivity / ε) noise to every cell of a
/// continuous-only table, clamping to column bounds where declared.
pub fn laplace_mechanism(
    table: &Table,
    sensitivity: f64,
    budget: PrivacyBudget,
    seed: u64,
) -> Result<Table> {
    let schema = table.schema();
    if let Some(c) = schema.columns().iter().find(|c| c.is_categorical()) {
        return Err(Error::CategoricalUnsupported(c.name.clone()));
    }
    let scale = laplace_scale(sensitivity, budget)?;
    let rows = table
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut rng = seed::stream(seed, "laplace-row", i as u64);
            row.iter()
                .zip(schema.columns())
                .map(|(cell, spec)| {
                    let mut v = cell.num() + laplace_sample(scale, &mut rng)?;
                    if let Some((lo, hi)) = spec.bounds {
                        v = v.clamp(lo, hi);
                    }
                    Ok(Cell::Num(v))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    table.with_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{ColumnSpec, Schema};

    fn table() -> Table {
        let s = Schema::new(
            vec![ColumnSpec::continuous("a"), ColumnSpec::bounded("b", 0.0, 1.0)],
            None,
        )
        .unwrap();
        Table::new(
            s,
            (0..50).map(|i| vec![Cell::Num(i as f64), Cell::Num(0.5)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_sensitivity_rejected() {
        let b = PrivacyBudget::new(1.0).unwrap();
        assert!(matches!(
            laplace_mechanism(&table(), 0.0, b, 0),
            Err(Error::InvalidSensitivity(_))
        ));
    }

    #[test]
    fn categorical_rejected() {
        let s = Schema::new(
            vec![ColumnSpec::continuous("a"), ColumnSpec::categorical("c", ["x"])],
            None,
        )
        .unwrap();
        let t = Table::new(s, vec![vec![Cell::Num(1.0), Cell::Cat(0)]]).unwrap();
        let b = PrivacyBudget::new(1.0).unwrap();
        assert!(matches!(
            laplace_mechanism(&t, 1.0, b, 0),
            Err(Error::CategoricalUnsupported(ref c)) if c == "c"
        ));
    }

    #[test]
    fn doubling_epsilon_halves_scale() {
        let s1 = laplace_scale(3.0, PrivacyBudget::new(0.5).unwrap()).unwrap();
        let s2 = laplace_scale(3.0, PrivacyBudget::new(1.0).unwrap()).unwrap();
        assert_eq!(s1, 2.0 * s2);
    }

    #[test]
    fn bounds_are_respected() {
        let out = laplace_mechanism(&table(), 5.0, PrivacyBudget::new(0.1).unwrap(), 4).unwrap();
        assert_eq!(out.n_rows(), 50);
        for r in out.rows() {
            assert!((0.0..=1.0).contains(&r[1].num()));
        }
    }

    #[test]
    fn huge_epsilon_barely_moves_cells() {
        let t = table();
        let sens = 2.0;
        let eps = 1e6;
        let out = laplace_mechanism(&t, sens, PrivacyBudget::new(eps).unwrap(), 8).unwrap();
        let bound = 10.0 * sens / eps;
        let mut close = 0;
        for (a, b) in t.rows().iter().zip(out.rows()) {
            close += usize::from((a[0].num() - b[0].num()).abs() <= bound);
        }
        // P(|Y| > 10 b) = e^-10 per cell
        assert!(close as f64 / 50.0 >= 0.999);
    }
}
