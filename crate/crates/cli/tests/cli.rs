use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fmuref::corpus::corpus;
use serde_json::Value;

fn fmr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

/// Corpus files written to a fresh directory.
struct Corpus {
    dir: tempfile::TempDir,
}

impl Corpus {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let out = fmr(&["examples", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        Corpus { dir }
    }

    fn file(&self, name: &str) -> String {
        self.dir
            .path()
            .join(format!("{name}.fmr"))
            .display()
            .to_string()
    }
}

#[test]
fn every_example_checks() {
    let c = Corpus::new();
    for ex in corpus() {
        let out = fmr(&["check", &c.file(&ex.name)]);
        assert_eq!(code(&out), 0, "{}", ex.name);
        assert!(json(&out)["type"].is_string());
    }
}

#[test]
fn eval_fact3() {
    let c = Corpus::new();
    let out = fmr(&["eval", &c.file("fact3"), "--fuel", "100"]);
    assert_eq!(code(&out), 0);
    let j = json(&out);
    assert_eq!(j["status"], "value");
    assert_eq!(j["value"], "6");
    assert_eq!(j["steps"], 3);
    assert_eq!(j["world"]["0"], "Int -> T Int");
}

#[test]
fn eval_timeout_exits_2() {
    let c = Corpus::new();
    let out = fmr(&["eval", &c.file("diverge"), "--fuel", "1000"]);
    assert_eq!(code(&out), 2);
    let j = json(&out);
    assert_eq!(j["status"], "timeout");
    assert_eq!(j["steps"], 1000);
}

#[test]
fn bisim_verdicts_and_exit_codes() {
    let c = Corpus::new();
    let out = fmr(&[
        "bisim",
        &c.file("counter_client_L"),
        &c.file("counter_client_R"),
        "--depth",
        "100",
    ]);
    assert_eq!(code(&out), 0);
    let j = json(&out);
    assert_eq!(j["verdict"], "strong");
    assert_eq!(
        (j["left_steps"].as_u64(), j["value"].as_i64()),
        (Some(3), Some(2))
    );

    let out = fmr(&["bisim", &c.file("two_incr_L"), &c.file("two_incr_R")]);
    let j = json(&out);
    assert_eq!((code(&out), j["verdict"].as_str()), (0, Some("weak")));
    assert_eq!(j["trace"], serde_json::json!(["step", "step", "waitL 1"]));

    let out = fmr(&["bisim", &c.file("fact3"), &c.file("fact2")]);
    assert_eq!(
        (code(&out), json(&out)["verdict"].as_str()),
        (1, Some("distinct"))
    );

    let out = fmr(&[
        "bisim",
        &c.file("diverge_int"),
        &c.file("fact3"),
        "--depth",
        "1000",
    ]);
    assert_eq!(
        (code(&out), json(&out)["verdict"].as_str()),
        (2, Some("unknown"))
    );
}

#[test]
fn bisim_rejects_non_int_programs() {
    let c = Corpus::new();
    let out = fmr(&["bisim", &c.file("fact3"), &c.file("diverge")]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["kind"], "TypeError");
}

#[test]
fn ill_typed_program() {
    let out = fmr(&["check", &fixture("ill_typed.fmr")]);
    assert_eq!(code(&out), 1);
    let j = json(&out);
    assert_eq!(j["kind"], "TypeError");
    assert_eq!(j["expected"], "Ref Int");
    assert_eq!(j["actual"], "Ref Unit");
    assert!(j["span"]["line"].is_number());
    assert!(j["message"].is_string());
}

#[test]
fn parse_error_reports_position() {
    let out = fmr(&["check", &fixture("parse_error.fmr")]);
    assert_eq!(code(&out), 1);
    let j = json(&out);
    assert_eq!(j["kind"], "ParseError");
    assert_eq!(j["span"]["line"], 1);
}

#[test]
fn file_and_usage_errors() {
    assert_eq!(code(&fmr(&["check", "/definitely/not/here.fmr"])), 66);
    assert_eq!(code(&fmr(&["frobnicate"])), 64);
    assert_eq!(code(&fmr(&["eval"])), 64);
    assert_eq!(code(&fmr(&["eval", "x.fmr", "--fuel", "-3"])), 64);
    assert_eq!(code(&fmr(&["examples", "no_such_example"])), 64);
    assert_eq!(code(&fmr(&["--help"])), 0);
}

#[test]
fn laws_are_reproducible() {
    let a = fmr(&["laws", "--seed", "5", "--iters", "25"]);
    let b = fmr(&["laws", "--seed", "5", "--iters", "25"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let j = json(&a);
    assert_eq!(j["ok"], true);
    assert_eq!(j["failed"], 0);
    let text = fmr(&["laws", "--seed", "5", "--iters", "25", "--pretty"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("0 failed"));
}

#[test]
fn pretty_and_json_flags() {
    let c = Corpus::new();
    let out = fmr(&["check", &c.file("fact"), "--pretty"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "Int -> T Int");
    let out = fmr(&["check", &c.file("fact"), "--pretty", "--json"]);
    assert_eq!(json(&out)["type"], "Int -> T Int");
}

#[test]
fn examples_listing_and_lookup() {
    let out = fmr(&["examples"]);
    let names: Vec<String> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(names.len(), corpus().len());
    assert!(names.iter().any(|n| n == "counter_adt_L"));
    let out = fmr(&["examples", "fact", "--pretty"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("knot [Int] fact_step"));
}

#[test]
fn shipped_corpus_is_current() {
    let shipped: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let c = Corpus::new();
    for ex in corpus() {
        let want = std::fs::read_to_string(c.file(&ex.name)).unwrap();
        let have = std::fs::read_to_string(shipped.join(ex.file_name())).unwrap_or_else(|_| {
            panic!(
                "corpus/{} missing; run `fmr examples --out corpus`",
                ex.file_name()
            )
        });
        assert_eq!(have, want, "corpus/{} is stale", ex.file_name());
    }
}
