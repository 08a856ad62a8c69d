use crate::error::{Error, Result};
use crate::tabular::moments::encode_numeric;
use crate::tabular::table::Table;

pub const DEFAULT_OUTLIER_QUANTILE: f64 = 0.95;
pub const DEFAULT_OUTLIER_COUNT: usize = 5;

/// Per-record outlier scores: squared distance of the encoded record to the
/// encoded mean, each dimension divided by its sample variance. Dimensions
/// with zero variance are skipped.
pub fn outlier_scores(table: &Table) -> Result<Vec<f64>> {
    table.ensure_rows(2)?;
    let x = encode_numeric(table)?;
    let n = x.nrows() as f64;
    let mut scores = vec![0.0; x.nrows()];
    for col in x.column_iter() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        if var <= 0.0 {
            continue;
        }
        for (s, v) in scores.iter_mut().zip(col.iter()) {
            *s += (v - mean) * (v - mean) / var;
        }
    }
    Ok(scores)
}

/// Linear-interpolation empirical quantile of `values` at level `q`.
pub fn empirical_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Indices of up to `count` records whose outlier score lies strictly above
/// the `quantile` level of all scores, highest score first. Equal scores are
/// ordered by ascending row index.
pub fn select_outliers(table: &Table, quantile: f64, count: usize) -> Result<Vec<usize>> {
    if !(quantile > 0.5 && quantile < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "outlier quantile must lie in (0.5, 1), got {quantile}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("outlier count must be at least 1".into()));
    }
    let scores = outlier_scores(table)?;
    let threshold = empirical_quantile(&scores, quantile);
    let mut picked: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] > threshold).collect();
    picked.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    picked.truncate(count);
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{Cell, ColumnSpec, Schema};

    fn table(points: &[(f64, f64)]) -> Table {
        let s = Schema::new(
            vec![ColumnSpec::continuous("a"), ColumnSpec::continuous("b")],
            None,
        )
        .unwrap();
        Table::new(
            s,
            points.iter().map(|&(a, b)| vec![Cell::Num(a), Cell::Num(b)]).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_rows_have_no_outliers() {
        let t = table(&[(1.0, 1.0); 20]);
        assert!(select_outliers(&t, 0.95, 5).unwrap().is_empty());
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(empirical_quantile(&[3.0, 1.0, 2.0, 4.0], 0.5), 2.5);
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0], 1.0), 3.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let t = table(&[(0.0, 0.0), (1.0, 1.0)]);
        assert!(select_outliers(&t, 0.4, 5).is_err());
        assert!(select_outliers(&t, 1.0, 5).is_err());
        assert!(select_outliers(&t, 0.9, 0).is_err());
        assert!(matches!(
            select_outliers(&table(&[(0.0, 0.0)]), 0.95, 1),
            Err(Error::InsufficientRows { .. })
        ));
    }
}
