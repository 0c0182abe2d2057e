use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;

use serde_json::Value;
use tacit_core::document::{CompiledUnit, DirResolver, SessionConfig};
use tacit_core::search::Budget;
use tacit_service::bench::{bench, probes, run_probe, BenchRow};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn tacit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tacit")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn compile_writes_identical_bytes_each_time() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixtures().join("lists.tac");
    let (a, b) = (dir.path().join("a.tco"), dir.path().join("b.tco"));
    for out in [&a, &b] {
        let o = tacit(&["compile", p(&src), "-o", p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let unit = CompiledUnit::from_bytes(&bytes).unwrap();
    assert_eq!(unit.name, "lists");
    assert_eq!(unit.lemmas.len(), 5);
}

#[test]
fn check_reports_and_fails_on_errors() {
    let o = tacit(&["check", p(&fixtures().join("nat.tac"))]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("19 lemmas"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tac");
    std::fs::write(&bad, "Require Prelude.\nLemma t : O = S O.\nProof. reflexivity. Qed.").unwrap();
    let o = tacit(&["check", p(&bad)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("reflexivity"));
    let o = tacit(&["check", p(&dir.path().join("missing.tac"))]);
    assert!(!o.status.success());
}

#[test]
fn bench_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = tacit(&["bench", p(&fixtures().join("lists.tac")), "--nodes", "5000", "--seconds", "10", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Vec<Value> = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report.len(), 6);
    let assoc = report.iter().find(|r| r["lemma"] == "concat_assoc").unwrap();
    assert_eq!(assoc["found"], Value::Bool(true));
    let first = &report[0];
    assert_eq!(first["found"], Value::Bool(false));
    assert!(first["expansions"].as_u64().unwrap() <= 1);
    let agg = report.last().unwrap();
    let proved = report[..5].iter().filter(|r| r["found"] == Value::Bool(true)).count();
    assert_eq!(agg["proved"].as_u64().unwrap() as usize, proved);
    assert_eq!(agg["total"], 5);
    assert_eq!(agg["fraction"].as_f64().unwrap(), proved as f64 / 5.0);

    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lemma,found,expansions,elapsed,trace,proof_len"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn bench_accepts_the_documented_flags() {
    let o = tacit(&[
        "bench",
        p(&fixtures().join("lists.tac")),
        "--nodes",
        "50",
        "--seconds",
        "2.5",
        "--breadth",
        "3",
        "--learner",
        "recency",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = tacit(&["bench", p(&fixtures().join("lists.tac")), "--learner", "missing"]);
    assert!(!o.status.success());
}

fn stable(r: &BenchRow) -> (String, bool, usize, String, usize, Vec<String>) {
    (r.lemma.clone(), r.found, r.expansions, r.trace.clone(), r.proof_len, r.proof.clone())
}

#[test]
fn bench_rows_do_not_depend_on_processing_order() {
    let src = std::fs::read_to_string(fixtures().join("nat.tac")).unwrap();
    let resolver = Arc::new(DirResolver::new(vec![fixtures()]));
    let config = SessionConfig::default();
    let budget = Budget::nodes(2000);
    let report = bench(&src, resolver.clone(), &config, &budget).unwrap();
    let ps = probes(&src, resolver, &config).unwrap();
    let mut reversed: Vec<BenchRow> = ps.iter().rev().map(|p| run_probe(p, &budget)).collect();
    reversed.reverse();
    let a: Vec<_> = report.rows.iter().map(stable).collect();
    let b: Vec<_> = reversed.iter().map(stable).collect();
    assert_eq!(a, b);
}

#[test]
fn probes_strip_the_lemma_own_proof() {
    let src = std::fs::read_to_string(fixtures().join("lists.tac")).unwrap();
    let ps = probes(&src, Arc::new(DirResolver::new(vec![fixtures()])), &SessionConfig::default()).unwrap();
    let names: Vec<_> = ps.iter().map(|p| p.lemma.to_string()).collect();
    assert_eq!(names, ["concat_nil_r", "concat_assoc", "ex1", "ex2", "dec2"]);
    assert!(ps[0].session.state().records.is_empty());
    assert_eq!(ps[1].session.state().records.len(), 7);
    for p in &ps {
        assert_eq!(p.session.state().goals().len(), 1);
        assert!(p.session.commands().last().unwrap().starts_with("Lemma"));
    }
}
