use std::path::Path;
use std::process::Command;

fn hgk(args: &[&str], dir: &Path) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_hgk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "hgk {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn synthie_featurize_gram_cv_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    hgk(
        &[
            "--seed", "7", "synthie", "--output", "data",
            "--graphs-per-superclass", "10", "--seeds-per-graph", "4",
            "--seed-graph-size", "8", "--attr-dim", "6",
        ],
        dir,
    );
    assert!(dir.join("data/synthie_A.txt").exists());
    assert!(dir.join("data/synthie_node_attributes.txt").exists());

    hgk(
        &["--seed", "7", "--iterations", "4", "featurize", "data", "--name", "synthie", "-o", "f.txt"],
        dir,
    );
    let feats = std::fs::read_to_string(dir.join("f.txt")).unwrap();
    assert_eq!(feats.lines().count(), 20);
    assert!(dir.join("f.txt.registry").exists());

    hgk(
        &["--seed", "7", "--iterations", "4", "--base", "sp", "gram", "data", "--name", "synthie", "-o", "k.csv"],
        dir,
    );
    let gram = std::fs::read_to_string(dir.join("k.csv")).unwrap();
    assert_eq!(gram.lines().count(), 20);
    let labels = std::fs::read_to_string(dir.join("k.csv.labels")).unwrap();
    assert_eq!(labels.lines().count(), 20);

    // same seed, fresh run: outputs reproduce byte-for-byte
    hgk(
        &["--seed", "7", "--iterations", "4", "--base", "sp", "gram", "data", "--name", "synthie", "-o", "k2.csv"],
        dir,
    );
    assert_eq!(gram, std::fs::read_to_string(dir.join("k2.csv")).unwrap());

    let out = hgk(
        &[
            "--seed", "7", "--iterations", "4", "--label-mode", "label-cont", "--wl-depth", "2",
            "cv", "data", "--name", "synthie", "--folds", "4", "--repetitions", "1",
            "--inner-folds", "2", "--c-grid", "1", "--epochs", "5",
        ],
        dir,
    );
    assert!(out.contains("accuracy_mean,"), "missing report: {out}");
}

#[test]
fn oracle_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hgk(
        &[
            "--seed", "3", "--iterations", "20", "oracle-check",
            "--graphs", "6", "--repetitions", "20", "--collision-trials", "2000",
        ],
        tmp.path(),
    );
    assert!(out.contains("sp-equivalence\tpass"), "{out}");
    assert!(out.contains("wl-equivalence\tpass"), "{out}");
    assert!(!out.contains("FAIL"), "{out}");
}
