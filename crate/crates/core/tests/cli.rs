mod common;

use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn wikicred(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wikicred")).args(args).current_dir(dir).output().unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    wikicred(dir, args).status.code().unwrap()
}

/// Temp dir holding copies of the fixtures and a feature matrix built from them.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("fixtures")).unwrap();
    for f in ["mini_climate_en.jsonl", "perennial_labels.csv"] {
        std::fs::copy(common::fixture(f), dir.path().join("fixtures").join(f)).unwrap();
    }
    let out = wikicred(
        dir.path(),
        &["features", "--corpus", "fixtures/mini_climate_en.jsonl", "--labels", "fixtures/perennial_labels.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

const MATRIX: &str = "out/features/climate.en.csv";

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

fn tree_count(model: &Path) -> usize {
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(model).unwrap()).unwrap();
    v["trees"].as_array().unwrap().len()
}

#[test]
fn exit_codes() {
    let w = workspace();
    let d = w.path();
    assert_eq!(code(d, &["--help"]), 0);
    assert_eq!(code(d, &["train", "--help"]), 0);
    assert_eq!(code(d, &["train", "--matrix", MATRIX, "--no-such-flag"]), 1);
    assert_eq!(code(d, &["frobnicate"]), 1);
    assert_eq!(code(d, &["features"]), 1, "no corpus at all is a usage error");
    assert_eq!(code(d, &["features", "--corpus", "fixtures/missing.jsonl"]), 2);
    std::fs::write(d.join("broken.jsonl"), "{\"not\": \"a revision\"}\n").unwrap();
    assert_eq!(code(d, &["features", "--corpus", "broken.jsonl"]), 2);
    std::fs::write(d.join("bad.toml"), "no_such_key = 3\n").unwrap();
    assert_eq!(code(d, &["--config", "bad.toml", "train", "--matrix", MATRIX]), 1);
    assert_eq!(code(d, &["train", "--matrix", MATRIX, "--rounds", "5"]), 0);
}

#[test]
fn training_twice_is_byte_identical() {
    let w = workspace();
    let d = w.path();
    for m in ["a.json", "b.json"] {
        assert_eq!(code(d, &["train", "--matrix", MATRIX, "--seed", "3", "--model", m]), 0);
    }
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());
}

#[test]
fn scores_are_probabilities() {
    let w = workspace();
    let d = w.path();
    assert_eq!(code(d, &["train", "--matrix", MATRIX, "--model", "m.json"]), 0);
    assert_eq!(code(d, &["score", "--model", "m.json", "--matrix", MATRIX]), 0);
    let mut r = csv::Reader::from_path(d.join("out/score/climate.en.csv")).unwrap();
    let header = r.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "probability").unwrap();
    let mut n = 0;
    for rec in r.records() {
        let p: f64 = rec.unwrap()[col].parse().unwrap();
        assert!((0.0..=1.0).contains(&p), "{p}");
        n += 1;
    }
    assert!(n > 0);
}

#[test]
fn flags_override_config_file() {
    let w = workspace();
    let d = w.path();
    std::fs::write(d.join("run.toml"), "out_dir = \"cfg_out\"\n\n[train]\nrounds = 3\n").unwrap();
    assert_eq!(code(d, &["--config", "run.toml", "train", "--matrix", MATRIX]), 0);
    assert_eq!(tree_count(&d.join("cfg_out/model/climate.en.json")), 3);
    assert_eq!(code(d, &["--config", "run.toml", "train", "--matrix", MATRIX, "--rounds", "7", "--out", "flag_out"]), 0);
    assert_eq!(tree_count(&d.join("flag_out/model/climate.en.json")), 7);
}

#[test]
fn inputs_are_left_untouched() {
    let w = workspace();
    let d = w.path();
    let inputs = [d.join("fixtures/mini_climate_en.jsonl"), d.join("fixtures/perennial_labels.csv"), d.join(MATRIX)];
    let before: Vec<String> = inputs.iter().map(|p| sha(p)).collect();
    let corpus = ["--corpus", "fixtures/mini_climate_en.jsonl", "--labels", "fixtures/perennial_labels.csv"];
    assert_eq!(code(d, &[&["extract"][..], &corpus].concat()), 0);
    assert_eq!(code(d, &["train", "--matrix", MATRIX, "--model", "m.json"]), 0);
    assert_eq!(code(d, &["explain", "--model", "m.json", "--matrix", MATRIX]), 0);
    assert_eq!(code(d, &["evaluate", "--matrix", MATRIX, "--bootstrap", "20"]), 0);
    let after: Vec<String> = inputs.iter().map(|p| sha(p)).collect();
    assert_eq!(before, after);
}
