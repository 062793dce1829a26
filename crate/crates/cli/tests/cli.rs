use std::path::Path;
use std::process::{Command, Output};

fn psi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn schedule_prints_rounds() {
    let out = psi(&["schedule", "--algo", "ege-sr", "--K", "4", "--T", "100"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "R=3 lambda=(4,3,2,1) t=(16,5,10) total=99");
}

#[test]
fn gaps_of_exp8() {
    let out = psi(&["gaps", "--instance", "exp:8"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("pareto_set: {5}"), "{text}");
    assert!(text.contains("H: 2.3795754389e5"), "{text}");
}

#[test]
fn gaps_of_i3_with_k() {
    let out = psi(&["gaps", "--instance", "i3", "--k", "1"]);
    let text = stdout(&out);
    assert!(text.contains("pareto_set: {1,2}"), "{text}");
    assert!(text.contains("H2^(1): 1.0000000000e2"), "{text}");
}

#[test]
fn generated_instance_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("exp2.csv");
    let file = file.to_str().unwrap();
    assert!(psi(&["gen", "--exp", "2", "--out", file]).status.success());
    let out = psi(&["gaps", "--instance", file]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("arms: 10  objectives: 2"));
}

#[test]
fn run_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("out.csv");
    let args = [
        "run",
        "--instance",
        "i3",
        "--sigma",
        "0.3",
        "--algo",
        "ege-sr,uniform",
        "--budgets",
        "200,H",
        "--trials",
        "50",
        "--seed",
        "4",
        "--metric",
        "error,samples",
    ];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", file.to_str().unwrap()]);
    assert!(psi(&with_out).status.success());
    let written = std::fs::read_to_string(&file).unwrap();
    let lines: Vec<&str> = written.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("instance,algorithm,budget,trials,failures"));
    assert!(lines[1].starts_with("i3,ege-sr,200,50,"));
    assert!(lines[2].starts_with("i3,ege-sr,207,50,"));

    // stdout carries the same bytes
    assert_eq!(stdout(&psi(&args)), written);
}

#[test]
fn exit_codes() {
    assert_eq!(psi(&["bogus"]).status.code(), Some(2));
    assert_eq!(psi(&["run", "--instance", "i3"]).status.code(), Some(2));
    assert_eq!(
        psi(&["run", "--instance", "i3", "--algo", "nope"]).status.code(),
        Some(2)
    );
    let out = psi(&[
        "run",
        "--instance",
        "/no/such/file.csv",
        "--algo",
        "ege-sr",
        "--budgets",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.csv"));
    assert_eq!(
        psi(&["schedule", "--algo", "ege-sr", "--K", "4", "--T", "4"])
            .status
            .code(),
        Some(1)
    );
    assert!(!Path::new("/no/such/file.csv").exists());
}

#[test]
fn lower_bound_on_staircase() {
    let out = psi(&["lb", "--instance", "staircase", "--budget", "100"]);
    let text = stdout(&out);
    assert!(text.contains("member: true"), "{text}");
    assert!(text.contains("verified: true"), "{text}");
    assert!(text.contains("lower_bound(T=100"), "{text}");
    let out = psi(&["lb", "--instance", "i3"]);
    assert!(stdout(&out).contains("member: false"));
}
