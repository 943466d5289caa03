use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn coarse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn growth_csv_of_the_square_lattice() {
    let out = coarse(&["--format", "csv", "growth", "--space", "zd:2", "--r-max", "20"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,count"));
    let rows: Vec<(u64, u64)> = lines
        .map(|l| {
            let (r, c) = l.split_once(',').unwrap();
            (r.parse().unwrap(), c.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 21);
    for (r, c) in rows {
        // Brute count of |x| + |y| <= r.
        let brute = (-(r as i64)..=r as i64)
            .flat_map(|x| (-(r as i64)..=r as i64).map(move |y| x.abs() + y.abs()))
            .filter(|&d| d <= r as i64)
            .count() as u64;
        assert_eq!(c, brute);
        assert_eq!(c, 2 * r * r + 2 * r + 1);
    }
}

#[test]
fn tree_has_cantor_like_ends() {
    let out = coarse(&["ends", "--space", "tree:3", "--depth", "8"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["classification"], "cantor-like");
    assert_eq!(v["counts"], serde_json::json!([3, 6, 12, 24, 48, 96, 192, 384]));
}

#[test]
fn bad_certificate_exits_one_with_a_witness() {
    let out = coarse(&["verify", "--space", "z", "--horizon", "10", "--cert", &fixture("bad_cqi.json")]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["passed"], false);
    let violations = v["report"]["violations"].as_array().unwrap();
    assert!(!violations.is_empty());
    assert!(violations.iter().any(|w| !w["witness"].is_null()));
}

#[test]
fn good_certificate_passes() {
    let out = coarse(&["verify", "--space", "z", "--horizon", "10", "--cert", &fixture("good_cqi.json")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(stdout_json(&out)["report"]["passed"], true);
}

#[test]
fn graph_files_in_both_formats() {
    for name in ["hexagon.txt", "hexagon.json"] {
        let out = coarse(&["growth", "--space", &fixture(name), "--r-max", "4"]);
        assert!(out.status.success());
        assert_eq!(stdout_json(&out)["counts"], serde_json::json!([1, 3, 5, 6, 6]));
    }
}

#[test]
fn errors_are_structured() {
    let out = coarse(&["growth", "--space", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "io");

    let out = coarse(&["ends", "--space", "z", "--depth", "8", "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"], "margin-too-small");
    assert_eq!(e["detail"]["needed"], 11);

    let out = coarse(&["orbit", "--example", "klein-bottle"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "unsupported-name");

    let out = coarse(&["growth", "--r-max", "many"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");
}

#[test]
fn out_directory_gets_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = coarse(&["--out", out_dir.to_str().unwrap(), "ends", "--space", "z", "--depth", "6", "--dot"]);
    assert!(out.status.success());
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "ends");
    assert_eq!(manifest["artifacts"], serde_json::json!(["ends.json", "forest.dot"]));
    assert_eq!(manifest["parameters"]["depth"], 6);
    assert!(out_dir.join("forest.dot").exists());
}

fn digests(root: &Path) -> BTreeMap<PathBuf, u64> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let mut h = DefaultHasher::new();
                std::fs::read(&path).unwrap().hash(&mut h);
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), h.finish());
            }
        }
    }
    out
}

#[test]
fn batches_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("run{i}"))).collect();
    for run in &runs {
        let out = coarse(&["--out", run.to_str().unwrap(), "batch", &fixture("batch.json")]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (digests(&runs[0]), digests(&runs[1]));
    assert_eq!(a.len(), 7 * 2 + 2);
    assert_eq!(a, b);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(runs[0].join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 7);
    let growth = std::fs::read_to_string(runs[0].join("growth-z2/growth.csv")).unwrap();
    assert!(growth.lines().any(|l| l == "20,841"));
}

#[test]
fn batch_reports_failing_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("batch.json");
    let bad = fixture("bad_cqi.json");
    let text = serde_json::json!([
        {"name": "ok", "command": "growth", "input": "z", "params": {"r_max": 3}},
        {"name": "rejected", "command": "verify", "input": "z", "horizon": 10, "params": {"cert": bad}},
        {"name": "broken", "command": "growth", "input": "tree:0"}
    ]);
    std::fs::write(&cfg, text.to_string()).unwrap();
    let run = dir.path().join("out");
    let out = coarse(&["--out", run.to_str().unwrap(), "batch", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(run.join("manifest.json")).unwrap()).unwrap();
    let status: Vec<&str> =
        manifest["runs"].as_array().unwrap().iter().map(|r| r["status"].as_str().unwrap()).collect();
    assert_eq!(status, ["passed", "failed", "error"]);
    assert!(run.join("broken/error.json").exists());
}
