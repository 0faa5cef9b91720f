//! End-to-end checks of the binary's exit codes and output formats.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cflkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn recognize_exit_codes() {
    assert_eq!(code(&run(&["recognize", "-g", "dyck1", "-e", "general", "(())"])), 0);
    assert_eq!(code(&run(&["recognize", "-g", "dyck1", "-e", "cyk", "(()"])), 1);
    assert_eq!(code(&run(&["recognize", "-g", "dyck1", "-e", "unambiguous", "()"])), 0);
    assert_eq!(code(&run(&["recognize", "-g", "anbn", "-e", "linear", "aabb"])), 0);
    assert_eq!(code(&run(&["recognize", "-g", "bfvp_postfix", "-e", "bfvp", "10∨"])), 0);
    assert_eq!(code(&run(&["recognize", "-g", "bfvp_postfix", "-e", "bfvp", "10∧"])), 1);
}

#[test]
fn usage_errors_are_exit_2() {
    assert_eq!(code(&run(&["recognize", "-g", "no_such_language", "-e", "general", "x"])), 2);
    assert_eq!(code(&run(&["recognize"])), 2); // missing required flags
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn ambiguity_violation_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("amb.cfg");
    std::fs::write(&path, "S -> S S | a\n").unwrap();
    let out = run(&["recognize", "-g", path.to_str().unwrap(), "-e", "unambiguous", "aaa"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ambiguous"));
}

#[test]
fn file_grammar_auto_converts_with_notice() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pal.cfg");
    std::fs::write(&path, "S -> a S a | b S b | a | b\n").unwrap();
    let p = path.to_str().unwrap();
    let out = run(&["recognize", "-g", p, "-e", "general", "aba"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Chomsky normal form"));
    assert_eq!(code(&run(&["recognize", "-g", p, "-e", "general", "--no-convert", "aba"])), 2);
    // The linear engine takes the grammar as written, no conversion needed.
    let out = run(&["recognize", "-g", p, "-e", "linear", "--no-convert", "aba"]);
    assert_eq!(code(&out), 2, "cnf is still prepared for file grammars");
}

#[test]
fn json_report_is_schema_stable() {
    let out = run(&["recognize", "-g", "dyck1", "-e", "general", "--json", "()"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["engine", "accepted", "n", "rounds_used", "item_cells", "wall_time"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert!(doc.get("edge_cells").is_none(), "inapplicable counters absent");
}

#[test]
fn verify_agrees_and_catches_disagreement() {
    let out = run(&["verify", "-g", "dyck1", "-e", "general", "--exhaustive", "5"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 disagreements"));
    let out = run(&[
        "verify", "-g", "anbn", "-e", "unambiguous", "--random", "20", "--max-n", "12",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn sample_writes_deterministic_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.tsv");
    let p2 = dir.path().join("b.tsv");
    for p in [&p1, &p2] {
        let out = run(&[
            "sample", "-l", "dyck1", "-c", "100", "--max-n", "20", "--seed", "7", "-o",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(a, b, "same seed, identical file");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(Path::new(&p1).exists());
}

#[test]
fn bench_emits_table() {
    let out = run(&[
        "bench", "-g", "dyck1", "-e", "general", "--lengths", "4,8", "--samples", "2", "--json",
    ]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.as_array().unwrap().len(), 2);
}
