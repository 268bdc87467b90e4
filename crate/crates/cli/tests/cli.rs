mod common;

use std::fs;

use common::{diagiso, diagiso_env, repo_path, write, Schema};
use diagiso::hunt::{reproduce, HuntConfig, HuntRecord};
use serde_json::Value;

const K3: &str = "Bw\n";
const K3_RELABELED: &str = "3\n2 0\n1 2\n0 1\n";
const P3: &str = "3\n0 1\n1 2\n";
const C6: &str = "6\n0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n";
const TWO_K3: &str = "6\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n";
const C6_RELABELED: &str = "6\n3 1\n1 5\n5 0\n0 2\n2 4\n4 3\n";

#[test]
fn test_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3.g6", K3);
    let k3r = write(dir.path(), "k3r.el", K3_RELABELED);
    let p3 = write(dir.path(), "p3.el", P3);
    let verdict = Schema::load("verdict.schema.json");

    let out = diagiso(&["test", &k3, &k3r]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    verdict.check(&out.json());
    assert_eq!(out.json()["decision"], "Isomorphic");

    let out = diagiso(&["test", &k3, &p3]);
    assert_eq!(out.code, 1);
    verdict.check(&out.json());
    assert_eq!(out.json()["decided_at_k"], 2);

    let out = diagiso(&["test", &k3, dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("error"));
    assert!(out.stdout.is_empty());

    let bad = write(dir.path(), "bad.g6", "A!\n");
    assert_eq!(diagiso(&["test", &k3, &bad]).code, 2);
    assert_eq!(diagiso(&["test", &k3]).code, 2);
}

#[test]
fn test_trace_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.el", C6);
    let c6r = write(dir.path(), "c6r.el", C6_RELABELED);
    let out = diagiso(&["test", "--trace", "--audit-max-n", "10", &c6, &c6r]);
    assert_eq!(out.code, 0);
    let v = out.json();
    Schema::load("verdict.schema.json").check(&v);
    assert_eq!(v["stop_rule"], "ReachedN");
    assert_eq!(v["trace"].as_array().unwrap().len(), 5);
    assert_eq!(v["audit"]["result"], "confirmed");
}

#[test]
fn cospectral_pair_reports_contradicted_audit() {
    let corpus = fs::read_to_string(repo_path("corpus/srg-16-6-2-2.g6")).unwrap();
    let lines = corpus.lines().collect::<Vec<_>>();
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "rook.g6", lines[0]);
    let b = write(dir.path(), "shrikhande.g6", lines[1]);
    let out = diagiso(&["test", "--audit-max-n", "16", &a, &b]);
    // the verdict drives the exit code; the audit result is reported alongside
    assert_eq!(out.code, 0);
    let v = out.json();
    Schema::load("verdict.schema.json").check(&v);
    assert_eq!(v["audit"]["result"], "contradicted");
    assert_eq!(v["falsification_event"]["claim"], "equal_diagonals_imply_isomorphism");
}

#[test]
fn oracle_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = write(dir.path(), "c6.el", C6);
    let c6r = write(dir.path(), "c6r.el", C6_RELABELED);
    let two = write(dir.path(), "2k3.el", TWO_K3);
    let schema = Schema::load("oracle.schema.json");

    let out = diagiso(&["oracle", &c6, &c6r]);
    assert_eq!(out.code, 0);
    schema.check(&out.json());
    assert_eq!(out.json()["mapping_verified"], true);

    let out = diagiso(&["oracle", &c6, &two]);
    assert_eq!(out.code, 1);
    schema.check(&out.json());

    let out = diagiso(&["oracle", "--budget", "1", &c6, &two]);
    assert_eq!(out.code, 4);
    schema.check(&out.json());
    assert_eq!(out.json()["outcome"], "unresolved");

    assert_eq!(diagiso(&["oracle", &c6, "/nonexistent"]).code, 2);
}

#[test]
fn convert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.g6", "@\n");
    let out = diagiso(&["convert", "--from", "graph6", "--to", "edge-list", "--input", &one]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "1\n"));

    let messy = write(dir.path(), "messy.el", "4\n3 2\n\n0 1\n1 0\n2 1\n");
    let g6 = dir.path().join("mid.g6");
    let out = diagiso(&["convert", "--from", "edge-list", "--to", "graph6", "--input", &messy, "--output", g6.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    let out = diagiso(&["convert", "--from", "graph6", "--to", "edge-list", "--input", g6.to_str().unwrap()]);
    assert_eq!(out.stdout, "4\n0 1\n1 2\n2 3\n");

    let bad = write(dir.path(), "bad.el", "3\n0 7\n");
    assert_eq!(diagiso(&["convert", "--from", "edge-list", "--to", "graph6", "--input", &bad]).code, 2);
    assert_eq!(diagiso(&["convert", "--from", "sparse6", "--to", "graph6", "--input", &bad]).code, 2);
}

fn hunt_lines(out: &common::Output) -> (Vec<Value>, Value) {
    let schema = Schema::load("hunt_line.schema.json");
    let mut lines = out.json_lines();
    for l in &lines {
        schema.check(l);
    }
    let summary = lines.pop().unwrap();
    assert_eq!(summary["type"], "summary");
    (lines, summary)
}

#[test]
fn hunt_on_permuted_corpus_is_clean() {
    let dir = tempfile::tempdir().unwrap();
    // two size classes, each a graph and a relabeling of it
    let corpus = write(dir.path(), "c.g6", "DhS\nD[o\nCh\nCU\n");
    let out = diagiso(&["hunt", "--corpus", &corpus]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let (records, summary) = hunt_lines(&out);
    assert_eq!(records.len(), 2);
    assert_eq!(summary["agreements"], 2);
}

#[test]
fn hunt_finds_the_cospectral_disagreement() {
    let dir = tempfile::tempdir().unwrap();
    let persist = dir.path().join("found");
    let corpus = repo_path("corpus/srg-16-6-2-2.g6");
    let out = diagiso(&["hunt", "--corpus", corpus.to_str().unwrap(), "--persist", persist.to_str().unwrap()]);
    assert_eq!(out.code, 3);
    let (_, summary) = hunt_lines(&out);
    assert_eq!(summary["disagreements"], 1);

    let files = fs::read_dir(&persist).unwrap().collect::<Vec<_>>();
    assert_eq!(files.len(), 1);
    let text = fs::read_to_string(files[0].as_ref().unwrap().path()).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    Schema::load("disagreement.schema.json").check(&value);
    let record: HuntRecord = serde_json::from_value(value).unwrap();
    let event = record.falsification_event.as_ref().unwrap();
    assert_eq!(event.trace.as_ref().unwrap().len(), 15);
    assert!(event.trace.as_ref().unwrap().iter().all(|s| s.left_diagonal.is_some()));
    assert_eq!(reproduce(&record, &HuntConfig::default()).unwrap(), record);
}

#[test]
fn hunt_budget_exhaustion_is_unresolved() {
    let out = diagiso(&["hunt", "--gen", "permuted:n=8,count=3,seed=1", "--budget", "1"]);
    assert_eq!(out.code, 4);
    let (records, summary) = hunt_lines(&out);
    assert!(records.iter().all(|r| r["status"] == "unresolved"));
    assert_eq!(summary["agreements"], 0);
}

#[test]
fn hunt_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(diagiso(&["hunt", "--gen", "nonsense:n=3"]).code, 2);
    assert_eq!(diagiso(&["hunt"]).code, 2);
    let corpus = write(dir.path(), "c.g6", "DhS\nA!\nD[o\n");
    assert_eq!(diagiso(&["hunt", "--corpus", &corpus, "--gen", "exhaustive:n=3"]).code, 2);
    let out = diagiso(&["hunt", "--corpus", &corpus]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("line 2"));
    let out = diagiso(&["hunt", "--corpus", &corpus, "--skip-bad-lines"]);
    assert_eq!(out.code, 0);
    assert!(out.stderr.contains("warning") && out.stderr.contains("line 2"));
}

#[test]
fn hunt_output_does_not_depend_on_job_count() {
    let spec = "sample:n=6,count=300,seed=8";
    let one = diagiso(&["hunt", "--gen", spec, "--jobs", "1"]);
    let many = diagiso(&["hunt", "--gen", spec, "--jobs", "4"]);
    let env = diagiso_env(&["hunt", "--gen", spec], &[(diagiso_cli::JOBS_ENV, "3")]);
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stdout, env.stdout);
}

#[test]
fn hunt_manifest_reproduces_instances() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.jsonl");
    let out_path = dir.path().join("out.jsonl");
    let out = diagiso(&[
        "hunt",
        "--gen",
        "regular:n=12,d=3,count=6,seed=4",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.stdout.is_empty());
    assert!(out.code == 0 || out.code == 3, "{}", out.stderr);
    let schema = Schema::load("manifest_line.schema.json");
    let lines = fs::read_to_string(&manifest).unwrap().lines().map(|l| serde_json::from_str::<Value>(l).unwrap()).collect::<Vec<_>>();
    for l in &lines {
        schema.check(l);
    }
    assert_eq!(lines[0]["type"], "run");
    assert_eq!(lines.len(), 1 + 12);
    // every regular instance regenerates from its recorded seed
    for l in lines.iter().skip(1).filter(|l| l["generator"] == "regular") {
        let g = diagiso::gen::random_regular(12, 3, diagiso::gen::Seed(l["seed"].as_u64().unwrap())).unwrap();
        assert_eq!(diagiso::emit_graph6(&g), l["graph6"].as_str().unwrap());
    }
    let records = fs::read_to_string(&out_path).unwrap();
    assert_eq!(records.lines().count(), 7);
}

#[test]
fn corpus_hash_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write(dir.path(), "c.g6", "C~\nC~\n");
    let manifest = dir.path().join("m.jsonl");
    diagiso(&["hunt", "--corpus", &corpus, "--manifest", manifest.to_str().unwrap()]);
    let header: Value = serde_json::from_str(fs::read_to_string(&manifest).unwrap().lines().next().unwrap()).unwrap();
    // sha256 of "C~\nC~\n"
    assert_eq!(header["corpus_sha256"], "12eb6ddf6d1d5adb04f5bc59c0130f8a32ac8e9a2e6288a94183f569878a2118");
}

#[test]
fn bench_table() {
    let out = diagiso(&["bench", "--n-min", "4", "--n-max", "16", "--samples", "2"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = out.json();
    Schema::load("bench.schema.json").check(&v);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(diagiso(&["bench", "--n-min", "9", "--n-max", "4", "--samples", "1"]).code, 2);
    assert_eq!(diagiso(&["bench", "--n-min", "5", "--n-max", "5", "--samples", "1"]).code, 2);
}

#[test]
fn usage() {
    assert_eq!(diagiso(&[]).code, 2);
    assert_eq!(diagiso(&["frobnicate"]).code, 2);
    let help = diagiso(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("hunt"));
}

#[test]
fn in_process_runner_matches_binary() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3.g6", K3);
    let p3 = write(dir.path(), "p3.el", P3);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = diagiso_cli::run(["diagiso", "test", &k3, &p3], &mut out, &mut err);
    assert_eq!(code, 1);
    assert_eq!(String::from_utf8(out).unwrap(), diagiso(&["test", &k3, &p3]).stdout);
}
