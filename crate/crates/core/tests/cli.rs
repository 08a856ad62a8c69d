use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use synthdp::experiment::LinkageConfig;

fn synthdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_synthdp"))
        .args(args)
        .env_remove("SYNTHDP_THREADS")
        .output()
        .expect("binary runs")
}

fn manifest(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: PathBuf) -> Vec<u8> {
    std::fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn json(p: PathBuf) -> serde_json::Value {
    serde_json::from_slice(&read(p)).unwrap()
}

#[test]
fn smote_dp_reports_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = synthdp(&["gen", "smote-dp", "--builtin", "german-credit", "--epsilon", "50", "--k", "1", "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = json(out.join("provenance.json"));
    let alpha = p["alpha"].as_f64().unwrap();
    assert!(alpha > 0.0 && alpha < 1.0, "{alpha}");
    assert_eq!(p["nominal_epsilon"], 50.0);
    assert!((p["effective_epsilon"].as_f64().unwrap() - 50.0 * alpha).abs() < 1e-9);
    assert_eq!(p["generator"], "smote-privbayes");
    assert_eq!(p["parameters"]["k"], 1);
    let csv = String::from_utf8(read(out.join("synthetic.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 1001);
}

#[test]
fn laplace_rejects_mixed_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = synthdp(&["gen", "dp-laplace", "--builtin", "german-credit", "--epsilon", "1", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("categorical"));
    assert!(!dir.path().join("synthetic.csv").exists());
}

#[test]
fn infinite_epsilon_is_non_private() {
    let dir = tempfile::tempdir().unwrap();
    let o = synthdp(&["gen", "bayes", "--builtin", "german-credit", "--epsilon", "inf", "--n", "50", "--out", path(dir.path())]);
    assert!(o.status.success());
    let p = json(dir.path().join("provenance.json"));
    assert_eq!(p["privacy"], "NonPrivate");
    assert!(p["nominal_epsilon"].is_null());

    // the saved model reproduces the release
    let again = dir.path().join("again");
    let o = synthdp(&["gen", "bayes", "--data", path(&manifest("data/german_credit_like.csv")), "--schema", path(&manifest("data/german_credit_like.toml")), "--n", "50", "--out", path(&again)]);
    assert!(o.status.success());
    assert_eq!(read(dir.path().join("synthetic.csv")), read(again.join("synthetic.csv")));
    assert_eq!(read(dir.path().join("model.json")), read(again.join("model.json")));
}

#[test]
fn gen_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in [
        vec!["gen", "smote", "--k", "3"],
        vec!["gen", "dp-bayes", "--epsilon", "1", "--degree", "1", "--bins", "5"],
    ] {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{}-{run}", cmd[1]));
            let mut args = cmd.clone();
            args.extend(["--builtin", "german-credit", "--seed", "7", "--out", path(&out)]);
            let o = synthdp(&args);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            outs.push(out);
        }
        for f in ["synthetic.csv", "provenance.json"] {
            assert_eq!(read(outs[0].join(f)), read(outs[1].join(f)), "{} {f}", cmd[1]);
        }
    }
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    let cases: &[(&[&str], i32)] = &[
        (&["gen", "dp-bayes", "--builtin", "german-credit", "--epsilon", "1", "--degree", "-1", "--out", d], 1),
        (&["gen", "dp-bayes", "--builtin", "german-credit", "--epsilon", "inf", "--out", d], 1),
        (&["gen", "smote", "--data", "/nonexistent.csv", "--schema", "/nonexistent.toml", "--out", d], 1),
        (&["gen", "smote", "--out", d], 1),
        (&["gen", "smote", "--builtin", "german-credit", "--k", "0", "--out", d], 1),
        (&["gen", "dp-bayes", "--builtin", "german-credit", "--epsilon", "-2", "--out", d], 2),
        (&["frobnicate"], 2),
    ];
    for (args, code) in cases {
        let o = synthdp(args);
        assert_eq!(o.status.code(), Some(*code), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_synthdp"))
            .args(["gen", "smote", "--builtin", "german-credit", "--n", "20", "--out", path(dir.path())])
            .env("SYNTHDP_THREADS", v)
            .output()
            .unwrap()
    };
    assert!(run("0").status.success());
    assert!(run("1").status.success());
    assert_eq!(run("many").status.code(), Some(1));
}

#[test]
fn sens_and_utility_commands() {
    let dir = tempfile::tempdir().unwrap();
    let sens = dir.path().join("sens.json");
    let o = synthdp(&["sens", "--builtin", "german-credit", "--k", "5", "--neighbors", "5", "--out", path(&sens)]);
    assert!(o.status.success());
    let s = json(sens);
    assert!(s["delta_f"].as_f64().unwrap() > 0.0);
    assert!(s["alpha"].as_f64().unwrap() < 1.0);

    let g = dir.path().join("g");
    assert!(synthdp(&["gen", "smote", "--builtin", "german-credit", "--k", "5", "--out", path(&g)]).status.success());
    let rep = dir.path().join("u.json");
    let o = synthdp(&[
        "utility",
        "--builtin",
        "german-credit",
        "--synth",
        path(&g.join("synthetic.csv")),
        "--trees",
        "20",
        "--out",
        path(&rep),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let u = json(rep);
    let (raw, syn, drop) = (
        u["accuracy_raw"].as_f64().unwrap(),
        u["accuracy_synth"].as_f64().unwrap(),
        u["accuracy_drop"].as_f64().unwrap(),
    );
    assert!((0.0..=1.0).contains(&raw) && (0.0..=1.0).contains(&syn));
    assert_eq!(drop, raw - syn);
}

#[test]
fn attack_command_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let o = synthdp(&[
        "attack", "linkage", "--builtin", "german-credit", "--generator", "privbayes", "--epsilon", "1",
        "--target", "3", "--target", "9", "--shadow-pairs", "4", "--test-pairs", "4", "--subset-size", "100",
        "--synth-size", "100", "--out", path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(read(dir.path().join("results.csv"))).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let r = json(dir.path().join("results.json"));
    assert_eq!(r["results"].as_array().unwrap().len(), 2);

    let o = synthdp(&["attack", "linkage", "--builtin", "german-credit", "--generator", "privbayes", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fig3_writes_all_artifacts_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = synthdp(&["experiment", "fig3", "--seeds", "7", "--out", path(out)]);
        assert!(o.status.success());
    }
    let mut names: Vec<String> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        ["fnorms.csv", "scatter_dp.csv", "scatter_original.csv", "scatter_smote-dp.csv", "scatter_smote.csv", "summary.csv", "summary.json"]
    );
    for n in names {
        assert_eq!(read(a.join(&n)), read(b.join(&n)), "{n}");
    }
}

#[test]
fn linkage_config_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "seeds = [0]\ngenerators = []\n[data]\nbuiltin = \"german-credit\"\n").unwrap();
    let o = synthdp(&["experiment", "linkage", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("generator"));
    assert!(!dir.path().join("o").exists());

    // the shipped example parses and validates
    let shipped = LinkageConfig::load(manifest("configs/linkage.toml")).unwrap();
    assert_eq!(shipped.generators.len(), 4);
}
