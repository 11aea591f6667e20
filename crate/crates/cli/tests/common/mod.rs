#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use infinitewalk::generators::stochastic_block_model;

pub const BIN: &str = env!("CARGO_BIN_EXE_infinitewalk");

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    run_with_env(dir, args, &[])
}

pub fn run_with_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.current_dir(dir).args(args).env_remove("INFINITEWALK_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawning the infinitewalk binary")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn assert_ok(out: &Output, what: &str) {
    assert!(out.status.success(), "{what} failed ({:?}): {}", out.status.code(), stderr(out));
}

/// Writes `edges.txt` and `labels.txt` for a 3-block graph into `dir`.
/// Labels are the planted block, and every fifth node also carries label 3.
pub fn write_sbm_fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let (g, blocks) = stochastic_block_model(&[15, 15, 15], 0.35, 0.04, 11).unwrap();
    let mut edges = String::from("# planted partition fixture\n");
    for e in g.edges() {
        edges.push_str(&format!("n{} n{}\n", g.names()[e.u], g.names()[e.v]));
    }
    let mut labels = String::new();
    for (i, b) in blocks.iter().enumerate() {
        labels.push_str(&format!("n{} block{b}\n", g.names()[i]));
        if i % 5 == 0 {
            labels.push_str(&format!("n{} extra\n", g.names()[i]));
        }
    }
    let ep = dir.join("edges.txt");
    let lp = dir.join("labels.txt");
    fs::write(&ep, edges).unwrap();
    fs::write(&lp, labels).unwrap();
    (ep, lp)
}

/// File names in `dir`, sorted, excluding hidden entries.
pub fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| !n.starts_with('.'))
        .collect();
    names.sort();
    names
}
