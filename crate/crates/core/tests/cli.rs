// SPDX-License-Identifier: Apache-2.0

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use crosstalk::gatelib::builtin_library;
use tempfile::TempDir;

fn xt(args: &[&str]) -> Output {
    xt_env(args, None)
}

fn xt_env(args: &[&str], library: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_xt"));
    cmd.args(args).env_remove("XT_LIBRARY");
    if let Some(p) = library {
        cmd.env("XT_LIBRARY", p);
    }
    cmd.output().expect("xt runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn blif(name: &str) -> String {
    common::corpus_dir().join(format!("{name}.blif")).to_string_lossy().into_owned()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Maps `name` into `dir` and returns the `.xtn` path.
fn map(dir: &TempDir, name: &str, extra: &[&str]) -> PathBuf {
    let out = path(dir, &format!("{name}.xtn"));
    let input = blif(name);
    let mut args = vec!["map", &input, "-o", s(&out)];
    args.extend_from_slice(extra);
    let o = xt(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn map_verify_report_succeed() {
    let dir = TempDir::new().unwrap();
    let fa = map(&dir, "fa", &[]);
    assert!(path(&dir, "fa.map.json").exists());
    assert!(!path(&dir, "fa.keys.json").exists());
    let v = xt(&["verify", s(&fa), "--against", &blif("fa"), "--exhaustive"]);
    assert_eq!(code(&v), 0);
    assert_eq!(stdout(&v).trim(), "PASS 8/8 vectors (exhaustive)");
    let r = xt(&["report", s(&fa), "--against", &blif("fa"), "--format", "json"]);
    assert_eq!(code(&r), 0);
    let json: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(json[0]["crosstalk_total"], 13);
}

#[test]
fn parse_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let latch = path(&dir, "l.blif");
    std::fs::write(&latch, ".model l\n.inputs a\n.outputs q\n.latch a q re clk 0\n.end\n").unwrap();
    let o = xt(&["map", s(&latch), "-o", s(&path(&dir, "l.xtn"))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
    assert_eq!(code(&xt(&["map"])), 1);
    assert_eq!(code(&xt(&["frobnicate"])), 1);
}

#[test]
fn semantic_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = xt(&["map", &blif("xor2"), "-o", s(&path(&dir, "x.xtn")), "--poly", "f"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    let and2 = map(&dir, "and2", &[]);
    let text = std::fs::read_to_string(&and2).unwrap().replace("template=AND2", "template=OR2");
    std::fs::write(&and2, text).unwrap();
    let o = xt(&["verify", s(&and2), "--against", &blif("and2")]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("counterexample"));
}

#[test]
fn io_errors_exit_4() {
    let o = xt(&["verify", "/nonexistent/x.xtn", "--against", "/nonexistent/x.blif"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let stim_text = "inputs a b cin\n000\n011\n101\n111\n";
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = TempDir::new().unwrap();
        let fa = map(&dir, "fa", &[]);
        let stim = path(&dir, "s.txt");
        std::fs::write(&stim, stim_text).unwrap();
        let (vcd, csv) = (path(&dir, "t.vcd"), path(&dir, "t.csv"));
        let o = xt(&["sim", s(&fa), "--stimulus", s(&stim), "--vcd", s(&vcd), "--csv", s(&csv)]);
        assert_eq!(code(&o), 0);
        let files: Vec<Vec<u8>> = [&fa, &path(&dir, "fa.map.json"), &vcd, &csv]
            .iter()
            .map(|p| std::fs::read(p).unwrap())
            .collect();
        runs.push((files, o.stdout));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn polymorphic_key_flow() {
    let dir = TempDir::new().unwrap();
    let and2 = map(&dir, "and2", &["--poly", "f"]);
    let keys = path(&dir, "and2.keys.json");
    assert!(keys.exists());
    let e = xt(&["key", "enumerate", s(&and2)]);
    assert_eq!(code(&e), 0);
    assert!(stdout(&e).starts_with("2 distinct functions over 2 keys"));
    let a = xt(&["key", "attack", s(&and2), "--oracle-key", "1"]);
    assert_eq!(code(&a), 0);
    assert!(stdout(&a).contains("recovered 1"));
    let v = xt(&["verify", s(&and2), "--against", &blif("and2"), "--keys", s(&keys)]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stderr));
}

#[test]
fn library_from_environment() {
    let dir = TempDir::new().unwrap();
    let good = path(&dir, "lib.json");
    std::fs::write(&good, builtin_library().to_json()).unwrap();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = path(&dir, "fa.xtn");
    let args = ["map", &blif("fa") as &str, "-o", s(&out)];
    assert_eq!(code(&xt_env(&args, Some(&good))), 0);
    assert_eq!(code(&xt_env(&args, Some(&bad))), 1);
    assert_eq!(code(&xt_env(&args, Some(&path(&dir, "missing.json")))), 4);
    let mut flagged = vec!["--library", s(&good)];
    flagged.extend_from_slice(&args);
    assert_eq!(code(&xt_env(&flagged, Some(&bad))), 0);
}
