use std::process::{Command, Output};

fn dgoim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgoim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("JSON line"))
        .collect()
}

#[test]
fn both_machines_agree_on_identity() {
    let out = dgoim(&["eval", "--machine", "both", "(\\x. x)(\\z. z)"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 2);
    for r in &recs {
        assert_eq!(r["related"], true);
        assert_eq!(r["halted"], true);
        assert_eq!(r["b"], 1);
    }
    assert_eq!(recs[1]["machine"], "dgoim");
    assert_eq!(recs[1]["o"], 13);
}

#[test]
fn omega_runs_out_of_fuel() {
    let out = dgoim(&[
        "eval",
        "--machine",
        "dgoim",
        "--fuel",
        "1000",
        "(\\x. x x)(\\x. x x)",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let recs = records(&out);
    assert_eq!(recs[0]["halted"], false);
    assert_eq!(recs[0]["total"], 1000);
}

#[test]
fn bad_input_is_rejected() {
    assert_eq!(dgoim(&["eval", "\\x."]).status.code(), Some(2));
    assert_eq!(dgoim(&["eval", "x[x <- \\z.z]"]).status.code(), Some(2));
    assert_eq!(dgoim(&["eval", "\\x. y"]).status.code(), Some(2));
}

#[test]
fn lockstep_passes_with_sharing() {
    let out = dgoim(&[
        "eval",
        "--machine",
        "lockstep",
        "--stop-at-first-divergence",
        "(\\x. \\y. y) (\\z. z)",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(records(&out)[0]["related"], true);
}

#[test]
fn repeated_s_steps_are_reported_as_bound_violations() {
    // Two lookups of the same variable after a single β-step.
    let out = dgoim(&["eval", "--machine", "sam", "(\\x. x x) (\\z. z)"]);
    assert_eq!(out.status.code(), Some(5));
    let r = &records(&out)[0];
    assert_eq!((r["b"].as_u64(), r["s"].as_u64()), (Some(2), Some(3)));
}

#[test]
fn bench_reports_a_fit() {
    let out = dgoim(&["bench", "--family", "church-app", "--n", "2..16"]);
    let recs = records(&out);
    assert_eq!(recs.len(), 16);
    let spread = recs[15]["fit"]["spread"].as_f64().unwrap();
    assert!(spread <= 3.0, "{spread}");
}

#[test]
fn trace_writes_lines_and_frames() {
    let dir = std::env::temp_dir().join(format!("dgoim-trace-{}", std::process::id()));
    let out = dgoim(&[
        "trace",
        "--machine",
        "dgoim",
        "--trace-out",
        dir.to_str().unwrap(),
        "--dot-every",
        "5",
        "(\\x. x)(\\z. z)",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let trace = std::fs::read_to_string(dir.join("trace.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 15);
    assert!(dir.join("frame-000000.dot").exists());
    assert!(dir.join("frame-000015.dot").exists());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn same_seed_same_output() {
    let a = dgoim(&[
        "corpus", "--seed", "9", "--family", "random", "--n", "4..20",
    ]);
    let b = dgoim(&[
        "corpus", "--seed", "9", "--family", "random", "--n", "4..20",
    ]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 100);
}
