mod common;

use synthdp::attack::{
    attack_sweep, extract_features, run_linkage_game, write_results_csv, AttackConfig, DistinguisherKind, FeatureSet,
    RESULT_CSV_HEADER,
};
use synthdp::dp::PrivacyBudget;
use synthdp::pipeline::{
    BayesNetGenerator, Generator, IdentityGenerator, SmoteDpGenerator, SmoteGenerator,
};
use synthdp::tabular::{builtin, Table};
use synthdp::Error;

fn pool(n: usize) -> Table {
    let t = builtin::bundled_german_credit();
    t.subset(&(0..n).collect::<Vec<_>>())
}

fn small() -> AttackConfig {
    AttackConfig {
        n_shadow_pairs: 6,
        n_test_pairs: 6,
        train_subset_size: 60,
        synth_size: 60,
        ..AttackConfig::default()
    }
}

#[test]
fn identity_release_is_detected() {
    let p = pool(800);
    let target = 17;
    assert_eq!(p.rows().iter().filter(|r| *r == p.row(target)).count(), 1);
    let cfg = AttackConfig {
        n_test_pairs: 100,
        ..AttackConfig::default()
    };
    let r = run_linkage_game(&p, target, &IdentityGenerator, &cfg).unwrap();
    assert!(r.advantage >= 0.9, "{r:?}");
    assert_eq!(r.privacy_gain + r.advantage, 1.0);
    assert_eq!(r.advantage, r.p_yes_in - r.p_yes_out);
    assert_eq!(r.epsilon, None);
}

#[test]
fn identical_configs_give_identical_results() {
    let p = pool(120);
    let g = BayesNetGenerator::private(PrivacyBudget::new(1.0).unwrap());
    for fs in [FeatureSet::Naive, FeatureSet::Histogram, FeatureSet::Correlation] {
        for d in [DistinguisherKind::LogisticRegression, DistinguisherKind::RandomForest] {
            let cfg = AttackConfig {
                feature_set: fs,
                distinguisher: d,
                ..small()
            };
            let a = run_linkage_game(&p, 3, &g, &cfg).unwrap();
            let b = run_linkage_game(&p, 3, &g, &cfg).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.privacy_gain, 1.0 - a.advantage);
            assert_eq!(a.epsilon, Some(1.0));
        }
    }
}

#[test]
fn sweep_covers_targets_times_generators() {
    let p = pool(120);
    let b = PrivacyBudget::new(1.0).unwrap();
    let gens: Vec<Box<dyn Generator>> = vec![
        Box::new(IdentityGenerator),
        Box::new(SmoteGenerator::new(1)),
        Box::new(BayesNetGenerator::non_private()),
        Box::new(BayesNetGenerator::private(b)),
        Box::new(BayesNetGenerator::private(PrivacyBudget::new(50.0).unwrap())),
        Box::new(SmoteDpGenerator::new(1, BayesNetGenerator::private(b))),
        Box::new(SmoteDpGenerator::new(3, BayesNetGenerator::private(b))),
    ];
    let refs: Vec<&dyn Generator> = gens.iter().map(|g| g.as_ref()).collect();
    let targets = [0, 5, 9, 40, 77];
    let results = attack_sweep(&p, &targets, &refs, &small()).unwrap();
    assert_eq!(results.len(), 35);
    for (i, r) in results.iter().enumerate() {
        assert_eq!(r.target_index, targets[i / 7]);
        assert_eq!(r.generator, refs[i % 7].name());
    }
    let mut csv = Vec::new();
    write_results_csv(&mut csv, &results).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 36);
    assert_eq!(text.lines().next().unwrap(), RESULT_CSV_HEADER.join(","));

    assert!(attack_sweep(&p, &targets, &[], &small()).unwrap().is_empty());
    assert!(matches!(attack_sweep(&p, &[], &refs, &small()), Err(Error::InvalidParameter(_))));
}

#[test]
fn pool_must_exceed_subset() {
    let p = pool(60);
    let r = run_linkage_game(&p, 0, &IdentityGenerator, &small());
    assert!(matches!(r, Err(Error::InsufficientPool(_))));
}

#[test]
fn identical_tables_have_identical_features() {
    let p = pool(50);
    for fs in [FeatureSet::Naive, FeatureSet::Histogram, FeatureSet::Correlation] {
        assert_eq!(extract_features(&p, fs).unwrap(), extract_features(&p.clone(), fs).unwrap());
    }
}
