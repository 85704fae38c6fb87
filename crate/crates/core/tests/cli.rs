//! The `gridmesh` binary end to end: exit codes and output files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gridmesh::lp::{export_mps, Backend};
use gridmesh::model::{build_cem, build_subproblem};
use gridmesh::obadmm::{agents, AdmmConfig, DualStore, ExchangeLedger};
use gridmesh::scenario::bundled_case;

fn case_file(n: usize) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../cases/case{n}.json"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gridmesh-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn gridmesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridmesh")).args(args).output().unwrap()
}

/// Distinct column names in the COLUMNS section of an MPS file.
fn column_count(mps: &str) -> usize {
    let mut names = std::collections::BTreeSet::new();
    let mut inside = false;
    for line in mps.lines() {
        if !line.starts_with(' ') {
            inside = line.starts_with("COLUMNS");
            continue;
        }
        if inside {
            if let Some(name) = line.split_whitespace().next().filter(|n| *n != "MARKER") {
                names.insert(name.to_string());
            }
        }
    }
    names.len()
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[test]
fn validate_accepts_bundled_and_rejects_broken() {
    for n in 1..=3 {
        let out = gridmesh(&["validate", case_file(n).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "case {n}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let dir = scratch("validate");
    let mut s = bundled_case(1).unwrap();
    s.microgrids[0].net_load.pop();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, s.to_json()).unwrap();
    let out = gridmesh(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = gridmesh(&["validate", dir.join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn solve_cem_writes_outputs_and_manifest() {
    let dir = scratch("cem");
    let scenario = dir.join("small.json");
    std::fs::write(&scenario, bundled_case(2).unwrap().truncated(6).to_json()).unwrap();
    let out_dir = dir.join("out");
    let out = gridmesh(&["solve-cem", "--pea", "--out", out_dir.to_str().unwrap(), scenario.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    let total = summary["objective"].as_f64().unwrap();
    let parts: f64 = summary["microgrids"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["objective"].as_f64().unwrap())
        .sum();
    assert!((total - parts).abs() <= 1e-6 * total.abs().max(1.0));

    let ledger = std::fs::read_to_string(out_dir.join("ledger.csv")).unwrap();
    assert!(ledger.starts_with("t,microgrid,counterparty,import,export"));

    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve-cem");
    assert_eq!(
        manifest["scenario_sha256"].as_str().unwrap(),
        sha256_hex(&std::fs::read(&scenario).unwrap())
    );
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.iter().any(|o| o.ends_with("summary.json")));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn export_mps_for_centralized_and_subproblem() {
    let dir = scratch("mps");
    let file = dir.join("sub.mps");
    let case = case_file(1);
    let out = gridmesh(&["export-mps", "--model", "sub:2", "--out", file.to_str().unwrap(), case.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.contains("ROWS") && text.contains("COLUMNS") && text.trim_end().ends_with("ENDATA"));

    let out = gridmesh(&["export-mps", case.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let cem = String::from_utf8(out.stdout).unwrap();
    let s = bundled_case(1).unwrap();
    assert_eq!(column_count(&cem), build_cem(&s).model.num_vars());
    // The first-iteration subproblem of microgrid id 2 (position 1).
    let cfg = AdmmConfig::default();
    let agent = &agents(&s, &cfg, Backend::Highs)[1];
    let ctx = agent.context(
        &ExchangeLedger::zeros(s.num_microgrids(), s.horizon),
        &DualStore::zeros(s.num_microgrids(), s.horizon),
        cfg.rho,
    );
    let sub = build_subproblem(&ctx, &s, cfg.layout()).unwrap().model;
    assert_eq!(column_count(&text), sub.num_vars());
    assert_eq!(text, export_mps(&sub));

    let out = gridmesh(&["export-mps", "--model", "sub:99", case.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn unconverged_dem_exits_five() {
    let dir = scratch("dem");
    let scenario = dir.join("small.json");
    std::fs::write(&scenario, bundled_case(1).unwrap().truncated(3).to_json()).unwrap();
    let out_dir = dir.join("out");
    let out = gridmesh(&[
        "solve-dem",
        "--ks",
        "2",
        "--max-iters",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5), "{}", String::from_utf8_lossy(&out.stderr));
    // The trace is still written for inspection.
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
    let _ = std::fs::remove_dir_all(&dir);
}
