//! Determinism of the command-line pipeline: every command is run once, then
//! re-run from its manifest under a different thread count, and every output
//! file it lists must come back byte for byte.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use common::{run_with_env, stderr, write_sbm_fixture};

const PIPELINE: &[&[&str]] = &[
    &["preprocess", "--edges", "edges.txt", "--labels", "labels.txt", "--out", "g"],
    &["spectrum", "--graph", "g", "--out", "spectrum.csv"],
    &["pmi-compare", "--graph", "g", "--T", "10", "--out", "cmp_r1.json"],
    &["pmi-compare", "--graph", "g", "--T", "3", "--ramp", "reps", "--out", "cmp_reps.json"],
    &["pmi-empirical", "--graph", "g", "--T", "5", "--gamma", "20", "--len", "30", "--seed", "9", "--out", "emp.bin"],
    &["pmi-empirical", "--graph", "g", "--T", "2", "--gamma", "5", "--len", "10", "--format", "csv", "--out", "emp.csv"],
    &["embed", "--graph", "g", "--method", "infinitewalk", "--d", "8", "--out", "iw.txt"],
    &["embed", "--graph", "g", "--method", "binlap", "--q", "0.9", "--d", "8", "--out", "bl.txt"],
    &["embed", "--graph", "g", "--method", "adjacency", "--d", "8", "--format", "bin", "--out", "adj.bin"],
    &["embed", "--graph", "g", "--method", "limitraw", "--d", "8", "--out", "lr.txt"],
    &["evaluate", "--embedding", "iw.txt", "--labels", "g/labels.txt", "--repeats", "3", "--out", "iw_eval.csv"],
    &["evaluate", "--embedding", "bl.txt", "--labels", "g/labels.txt", "--ratios", "0.2,0.8", "--repeats", "4", "--C", "0.5", "--seed", "3", "--out", "bl_eval.json"],
];

fn manifest_for(dir: &Path, args: &[&str]) -> PathBuf {
    let out = args[args.iter().position(|a| *a == "--out").unwrap() + 1];
    if args[0] == "preprocess" {
        dir.join(out).join("manifest.json")
    } else {
        dir.join(format!("{out}.manifest.json"))
    }
}

fn recorded_outputs(manifest: &Path) -> Vec<PathBuf> {
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| PathBuf::from(p.as_str().unwrap()))
        .filter(|p| p != manifest)
        .collect()
}

fn check(dir: &Path, args: &[&str]) -> Result<usize, String> {
    let first = run_with_env(dir, args, &[("INFINITEWALK_THREADS", "1")]);
    if !first.status.success() {
        return Err(format!("{} failed: {}", args[0], stderr(&first).trim()));
    }
    let manifest = manifest_for(dir, args);
    let outputs = recorded_outputs(&manifest);
    if outputs.is_empty() {
        return Err(format!("{} manifest lists no outputs", args[0]));
    }
    let before: BTreeMap<PathBuf, Vec<u8>> = outputs.iter().map(|p| (p.clone(), fs::read(p).unwrap())).collect();
    for p in &outputs {
        fs::remove_file(p).unwrap();
    }
    let manifest_arg = manifest.to_string_lossy().into_owned();
    let replay = run_with_env(dir, &["replay", "--manifest", &manifest_arg], &[("INFINITEWALK_THREADS", "3")]);
    if !replay.status.success() {
        return Err(format!("replay of {} failed: {}", args[0], stderr(&replay).trim()));
    }
    for (path, bytes) in &before {
        match fs::read(path) {
            Ok(again) if &again == bytes => {}
            Ok(_) => return Err(format!("{} differs after replay", path.display())),
            Err(e) => return Err(format!("{} missing after replay: {e}", path.display())),
        }
    }
    Ok(outputs.len())
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().unwrap();
    write_sbm_fixture(tmp.path());
    let mut files = 0;
    let mut failures = Vec::new();
    for args in PIPELINE {
        match check(tmp.path(), args) {
            Ok(n) => files += n,
            Err(e) => failures.push(e),
        }
    }
    if failures.is_empty() {
        println!(
            "criterion 8 [CLI determinism]: PASS: {} commands, {files} output files bit-identical after replay (1 vs 3 threads)",
            PIPELINE.len()
        );
        ExitCode::SUCCESS
    } else {
        println!("criterion 8 [CLI determinism]: FAIL: {}", failures.join("; "));
        ExitCode::FAILURE
    }
}
