mod common;

use proptest::prelude::*;
use synthdp::smote::{generate, knn, NeighborIndex, SmoteConfig};
use synthdp::tabular::{moments, Cell, DistanceMetric, Table};

/// Distance from first principles: sample standard deviations for scaling
/// and their median as the categorical mismatch penalty.
fn oracle_distance(t: &Table, a: usize, b: usize) -> f64 {
    let schema = t.schema();
    let cont = schema.continuous_indices();
    let sd = |j: usize| {
        let col = t.numeric_column(j);
        let n = col.len() as f64;
        let m = col.iter().sum::<f64>() / n;
        (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let mut sds: Vec<f64> = cont.iter().map(|&j| sd(j)).collect();
    sds.sort_by(f64::total_cmp);
    let m = sds.len();
    let penalty = if m % 2 == 1 { sds[m / 2] } else { (sds[m / 2 - 1] + sds[m / 2]) / 2.0 };
    let (ra, rb) = (t.row(a), t.row(b));
    let mut d2 = 0.0;
    for j in 0..schema.len() {
        match (ra[j], rb[j]) {
            (Cell::Num(x), Cell::Num(y)) => d2 += ((x - y) / sd(j)).powi(2),
            (x, y) if x != y => d2 += penalty * penalty,
            _ => {}
        }
    }
    d2.sqrt()
}

#[test]
fn knn_matches_brute_force_sort() {
    for seed in 0..5 {
        let t = common::mixed_labelled(20, seed);
        let metric = DistanceMetric::fit(&t);
        for q in 0..20 {
            let mut all: Vec<(f64, usize)> =
                (0..20).filter(|&i| i != q).map(|i| (oracle_distance(&t, q, i), i)).collect();
            all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let got = knn(&t, q, 3, &metric, None).unwrap();
            let want: Vec<usize> = all[..3].iter().map(|p| p.1).collect();
            // equal oracle distances may differ in the last ulp; compare distances
            for (g, w) in got.iter().zip(&want) {
                assert!((oracle_distance(&t, q, *g) - oracle_distance(&t, q, *w)).abs() < 1e-9);
            }
            let exhaustive = knn(&t, q, 19, &metric, None).unwrap();
            let dists: Vec<f64> = exhaustive.iter().map(|&i| oracle_distance(&t, q, i)).collect();
            assert!(dists.windows(2).all(|w| w[0] <= w[1] + 1e-12));
            assert_eq!(exhaustive.len(), 19);
        }
    }
}

#[test]
fn knn_three_points() {
    let t = common::numeric(&[vec![0.0], vec![1.0], vec![5.0]]);
    assert_eq!(knn(&t, 0, 1, &DistanceMetric::fit(&t), None).unwrap(), vec![1]);
    assert!(knn(&t, 0, 3, &DistanceMetric::fit(&t), None).is_err());
}

#[test]
fn stratified_counts_follow_proportions() {
    let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, if i < 70 { 0.0 } else { 1.0 }]).collect();
    let base = common::numeric(&rows);
    let schema = synthdp::tabular::Schema::new(
        vec![
            synthdp::tabular::ColumnSpec::continuous("x"),
            synthdp::tabular::ColumnSpec::categorical("y", ["a", "b"]),
        ],
        Some("y".into()),
    )
    .unwrap();
    let t = Table::new(
        schema,
        base.rows().iter().map(|r| vec![r[0], Cell::Cat(r[1].num() as usize)]).collect(),
    )
    .unwrap();
    let out = generate(&t, &SmoteConfig::new(5, 1000, 1), &DistanceMetric::fit(&t)).unwrap();
    let groups = out.label_groups().unwrap();
    assert_eq!((groups[0].len(), groups[1].len()), (700, 300));
}

#[test]
fn two_dimensional_output_contracts() {
    let t = common::gaussian_class(2, 2000, 4);
    let out = generate(&t, &SmoteConfig::new(5, 2000, 4), &DistanceMetric::fit(&t)).unwrap();
    assert!(moments(&out).unwrap().trace() < moments(&t).unwrap().trace());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn records_stay_on_their_segment(seed in any::<u64>(), k in 1usize..5, n in 12usize..40) {
        let t = common::mixed_labelled(n.max(2 * (k + 1) + 8), seed);
        let metric = DistanceMetric::fit(&t);
        let index = NeighborIndex::build(&t, k, &metric, true);
        prop_assume!(index.is_ok());
        let index = index.unwrap();
        let out = generate(&t, &SmoteConfig::new(k, 50, seed), &metric).unwrap();
        prop_assert_eq!(out.n_rows(), 50);
        for z in out.rows() {
            // some base with a neighbor brackets every continuous cell and
            // whose neighbor set holds the categorical value
            let ok = (0..t.n_rows()).any(|b| {
                let x0 = t.row(b);
                if x0[3] != z[3] {
                    return false;
                }
                let nbrs = index.neighbors_of(b);
                nbrs.iter().any(|&nb| {
                    let x = t.row(nb);
                    (0..2).all(|j| {
                        let (lo, hi) = (x0[j].num().min(x[j].num()), x0[j].num().max(x[j].num()));
                        lo - 1e-9 <= z[j].num() && z[j].num() <= hi + 1e-9
                    })
                }) && nbrs.iter().any(|&nb| t.row(nb)[2] == z[2])
            });
            prop_assert!(ok, "record {:?} has no bracketing base/neighbor pair", z);
        }
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>()) {
        let t = common::mixed_labelled(30, seed);
        let metric = DistanceMetric::fit(&t);
        let cfg = SmoteConfig::new(3, 40, seed);
        let (a, b) = (generate(&t, &cfg, &metric).unwrap(), generate(&t, &cfg, &metric).unwrap());
        prop_assert_eq!(a.rows(), b.rows());
    }
}
