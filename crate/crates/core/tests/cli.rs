use std::path::Path;
use std::process::{Command, Output};

use pdmchain::hamiltonian::{build_full, ChainSpec, TridiagonalOperator};
use pdmchain::validate::{run_suite, DEFAULT_SEED};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn pdmchain(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdmchain"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn manifest_digests_match_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdmchain(&["dos", "--n", "200", "--op", "h0", "--analytic", "--bins", "20"], tmp.path());
    assert!(out.status.success());
    let m = manifest(tmp.path());
    assert_eq!(m["command"], "dos");
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    for f in files {
        let bytes = std::fs::read(tmp.path().join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, bytes.len());
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert!(m["checks"]["analytic_l1"]["l1"].as_f64().unwrap() < 0.2);
}

#[test]
fn spectrum_csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(pdmchain(&["spectrum", "--n", "3", "--gamma", "0"], tmp.path()).status.success());
    let text = std::fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,energy");
    assert_eq!(lines.len(), 4);
    assert!(!text.contains('\r'));
    let mid: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
    assert!(mid.abs() < 1e-11);
    let m = manifest(tmp.path());
    assert_eq!(m["checks"]["trace_identity"]["pass"], true);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["spectrum", "--n", "0"],
        vec!["spectrum", "--n", "5", "--gamma", "abc"],
        vec!["spectrum", "--n", "5", "--gamma", "0.1", "--gammaN", "1"],
        vec!["spectrum", "--n", "5", "--gamma", "-1"],
        vec!["dos", "--n", "5", "--op", "full", "--analytic"],
        vec!["scaling", "--gammaN", "1", "--n-list", "200,100", "--targets", "1"],
        vec!["fraction", "--n-list", "100,200"],
        vec!["bogus"],
    ] {
        let out = pdmchain(&args, tmp.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let out = Command::new(env!("CARGO_BIN_EXE_pdmchain")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("spectrum"));
}

#[test]
fn config_values_yield_to_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "# sweep\nn = 7\ngamma = 0.3\n").unwrap();
    let out = pdmchain(&["spectrum", "--config", cfg.to_str().unwrap(), "--gamma", "0.1"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    assert_eq!(m["arguments"]["n"], 7);
    assert_eq!(m["arguments"]["gamma"], 0.1);
}

#[test]
fn fraction_rows_are_ordered() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdmchain(&["fraction", "--n-list", "50,100,200", "--gammaN-grid", "2,0,1"], tmp.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("fraction.csv")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 9);
    let keys: Vec<(f64, f64)> = rows.iter().map(|r| (r[0] * r[1], r[1])).collect();
    assert!(keys.windows(2).all(|w| w[0].0 < w[1].0 - 1e-9 || (w[0].0 - w[1].0).abs() < 1e-9 && w[0].1 < w[1].1));
    assert!(rows[..3].iter().all(|r| r[2] == 0.0 && r[3] == 0.0));
}

#[test]
fn edge_command_finds_edge() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdmchain(&["edge", "--gammaN", "1", "--n-list", "250,500,1000"], tmp.path());
    assert!(out.status.success());
    let edge = manifest(tmp.path())["checks"]["mobility_edge"]["edge"].as_f64().unwrap();
    assert!((edge - 2.0).abs() <= 0.2, "edge = {edge}");
}

#[test]
fn validate_passes_on_correct_operator() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pdmchain(&["validate"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("PASS") && !table.contains("FAIL"));
}

#[test]
fn validation_catches_sign_error() {
    // one hopping in the middle flipped and nudged
    let broken = |s: &ChainSpec| -> TridiagonalOperator {
        let op = build_full(s);
        let mut off = op.off().to_vec();
        if off.len() > 2 {
            let k = off.len() / 2;
            off[k] = -off[k] + 0.01;
        }
        TridiagonalOperator::new(op.diag().to_vec(), off).unwrap()
    };
    let results = run_suite(&broken, DEFAULT_SEED).unwrap();
    assert!(results.iter().any(|r| !r.passed));
}
