use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn semlabel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semlabel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = semlabel(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stderr.is_empty(), "success wrote to stderr");
    String::from_utf8(out.stdout).unwrap()
}

/// Asserts the exit code and that stderr is exactly one JSON error line.
fn fails(args: &[&str], code: i32) -> Value {
    let out = semlabel(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");
    let v: Value = serde_json::from_str(&stderr).expect("stderr is JSON");
    assert_eq!(v["error"]["code"], code);
    v
}

fn message(v: &Value) -> &str {
    v["error"]["message"].as_str().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_corpus(dir: &TempDir, seed: &str) -> PathBuf {
    let out = dir.path().join(format!("corpus-{seed}"));
    ok(&[
        "synth",
        "--sources",
        "4",
        "--labels",
        "5",
        "--unknown-frac",
        "0.1",
        "--min-rows",
        "20",
        "--max-rows",
        "40",
        "--seed",
        seed,
        "-o",
        s(&out),
    ]);
    out
}

fn read_tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(read_tree(&path));
        } else {
            out.push((
                path.strip_prefix(dir).unwrap().to_path_buf(),
                fs::read(&path).unwrap(),
            ));
        }
    }
    out.sort();
    out
}

#[test]
fn synth_writes_standard_layout_deterministically() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        ok(&[
            "synth",
            "--sources",
            "10",
            "--labels",
            "8",
            "--unknown-frac",
            "0.1",
            "--seed",
            "42",
            "-o",
            s(out),
        ]);
    }
    let csvs = fs::read_dir(a.join("sources")).unwrap().count();
    assert_eq!(csvs, 10);
    assert!(a.join("labels.json").is_file());
    let (ta, tb) = (read_tree(&a), read_tree(&b));
    assert_eq!(ta.len(), tb.len());
    for ((pa, da), (pb, db)) in ta.iter().zip(&tb) {
        assert_eq!(
            pa.strip_prefix("a").unwrap_or(pa),
            pb.strip_prefix("b").unwrap_or(pb)
        );
        assert_eq!(da, db, "{pa:?} differs");
    }
}

#[test]
fn synth_rejects_zero_labels() {
    let dir = TempDir::new().unwrap();
    fails(
        &["synth", "--labels", "0", "-o", s(&dir.path().join("x"))],
        2,
    );
}

#[test]
fn train_without_labels_file_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let corpus = small_corpus(&dir, "1");
    fs::remove_file(corpus.join("labels.json")).unwrap();
    let err = fails(
        &[
            "train",
            "--corpus",
            s(&corpus),
            "--features",
            "base_plus",
            "-o",
            s(&dir.path().join("m.slb")),
        ],
        2,
    );
    assert!(message(&err).contains("labels.json not found"), "{err}");
}

#[test]
fn train_is_byte_deterministic_and_predict_honours_contracts() {
    let dir = TempDir::new().unwrap();
    let corpus = small_corpus(&dir, "2");
    let m1 = dir.path().join("m1.slb");
    let m2 = dir.path().join("m2.slb");
    for m in [&m1, &m2] {
        let summary = ok(&[
            "train",
            "--corpus",
            s(&corpus),
            "--model",
            "rf",
            "--features",
            "all",
            "--num-bags",
            "5",
            "--bag-size",
            "10",
            "--trees",
            "8",
            "--seed",
            "7",
            "-o",
            s(m),
        ]);
        let v: Value = serde_json::from_str(&summary).unwrap();
        assert_eq!(v["feature_set"], "all");
        assert!(v["instances"].as_u64().unwrap() > 0);
        assert!(v["class_counts"].is_object());
        assert!(v["train_seconds"].is_number());
    }
    assert_eq!(fs::read(&m1).unwrap(), fs::read(&m2).unwrap());

    let inspect: Value = serde_json::from_str(&ok(&["inspect", s(&m1)])).unwrap();
    let n_labels = inspect["labels"].as_array().unwrap().len();
    assert_eq!(n_labels, 6, "five labels plus unknown: {inspect}");

    let csv = dir.path().join("t.csv");
    fs::write(
        &csv,
        "who,when,amount\nAnn Lee,01-02-2003,12\nBo Chan,04-05-2006,7\nCy Ray,07-08-2009,3\n",
    )
    .unwrap();
    let lines = ok(&["predict", s(&csv), "-m", s(&m1)]);
    let rows: Vec<Value> = lines
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let ranking = row["ranking"].as_array().unwrap();
        assert_eq!(ranking.len(), n_labels);
        let total: f64 = ranking
            .iter()
            .map(|r| r["probability"].as_f64().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    let top = ok(&[
        "predict",
        s(&csv),
        "-m",
        s(&m1),
        "--top",
        "1",
        "--predict-bags",
        "--num-bags",
        "4",
        "--bag-size",
        "5",
    ]);
    assert!(top.lines().all(|l| {
        let v: Value = serde_json::from_str(l).unwrap();
        v["ranking"].as_array().unwrap().len() == 1
    }));

    let err = fails(&["predict", s(&csv), "-m", s(&m1), "--features", "base"], 3);
    assert!(message(&err).contains("base"), "{err}");

    let mut bytes = fs::read(&m1).unwrap();
    bytes[4] = 99;
    let bad = dir.path().join("v99.slb");
    fs::write(&bad, bytes).unwrap();
    let err = fails(&["predict", s(&csv), "-m", s(&bad)], 3);
    assert!(message(&err).contains("99"), "{err}");
}

#[test]
fn benchmark_flag_validation() {
    let dir = TempDir::new().unwrap();
    let corpus = small_corpus(&dir, "3");
    let out = dir.path().join("r.json");
    let err = fails(
        &[
            "benchmark",
            "--corpus",
            s(&corpus),
            "--protocol",
            "loo",
            "--p",
            "0.2",
            "--seed",
            "1",
            "-o",
            s(&out),
        ],
        2,
    );
    assert!(
        message(&err).contains("p is only valid for holdout"),
        "{err}"
    );
    fails(
        &[
            "benchmark",
            "--corpus",
            s(&corpus),
            "--protocol",
            "loo",
            "-o",
            s(&out),
        ],
        2,
    );
    fails(
        &[
            "benchmark",
            "--corpus",
            s(&corpus),
            "--protocol",
            "holdout",
            "--seed",
            "1",
            "-o",
            s(&out),
        ],
        2,
    );
    fails(
        &[
            "benchmark",
            "--corpus",
            s(&corpus),
            "--protocol",
            "kfold",
            "--seed",
            "1",
            "-o",
            s(&out),
        ],
        2,
    );
    fails(&["train", "--no-such-flag"], 2);
    assert!(!out.exists());
}

#[test]
fn config_file_matches_flags() {
    let dir = TempDir::new().unwrap();
    let corpus = small_corpus(&dir, "4");
    let by_flags = dir.path().join("flags.json");
    let by_config = dir.path().join("config.json");
    ok(&[
        "benchmark",
        "--corpus",
        s(&corpus),
        "--protocol",
        "holdout",
        "--p",
        "0.5",
        "--n",
        "3",
        "--features",
        "base",
        "--trees",
        "8",
        "--num-bags",
        "3",
        "--bag-size",
        "10",
        "--predict-bagging",
        "--seed",
        "9",
        "-o",
        s(&by_flags),
    ]);
    let config = dir.path().join("run.json");
    let doc = serde_json::json!({
        "corpus": corpus,
        "protocol": "holdout",
        "p": 0.5,
        "n": 3,
        "features": "base",
        "trees": 8,
        "num_bags": 3,
        "bag_size": 10,
        "predict_bagging": true,
        "seed": 9,
        "output": by_config,
    });
    fs::write(&config, doc.to_string()).unwrap();
    ok(&["benchmark", "--config", s(&config)]);
    assert_eq!(fs::read(&by_flags).unwrap(), fs::read(&by_config).unwrap());

    let report: Value = serde_json::from_slice(&fs::read(&by_flags).unwrap()).unwrap();
    assert_eq!(
        report["folds"].as_array().unwrap().len() + report["skipped"].as_array().unwrap().len(),
        3
    );

    fs::write(&config, r#"{"seed": 1, "bogus": true}"#).unwrap();
    fails(&["benchmark", "--config", s(&config)], 2);
}

#[test]
fn sweep_emits_one_row_per_grid_point() {
    let dir = TempDir::new().unwrap();
    let corpus = small_corpus(&dir, "5");
    let csv = ok(&[
        "sweep",
        "--corpus",
        s(&corpus),
        "--p",
        "0.5",
        "--n",
        "2",
        "--features",
        "base",
        "--trees",
        "4",
        "--num-bags-grid",
        "2,4",
        "--bag-size-grid",
        "5,10,20",
        "--seed",
        "3",
    ]);
    assert_eq!(csv.lines().count(), 1 + 6);
}

#[test]
fn schema_lists_feature_names() {
    let count = |args: &[&str]| {
        let v: Value = serde_json::from_str(&ok(args)).unwrap();
        v["names"].as_array().unwrap().len()
    };
    assert_eq!(
        count(&[
            "schema",
            "--features",
            "base_plus",
            "--label",
            "Person.name",
            "--label",
            "Place.city"
        ]),
        103
    );
    assert_eq!(
        count(&["schema", "--features", "all", "--label", "Person.name"]),
        26 + 101 + 3
    );
}

#[test]
fn help_goes_to_stdout() {
    let out = ok(&["--help"]);
    for cmd in ["train", "predict", "benchmark", "sweep", "synth"] {
        assert!(out.contains(cmd));
    }
}
