//! End-to-end checks of the command-line surface: exit codes, byte
//! determinism, and the construct/verify round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regularity"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn regularity")
}

fn write_sample_graph(dir: &Path) {
    fs::write(
        dir.join("g.wg"),
        "wgraph 4\n0 0 1 1\n0 0 1 1\n1 1 0 0\n1 1 0 0\n",
    )
    .unwrap();
}

#[test]
fn construct_then_verify_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &["construct", "--x", "2,2", "--alpha", "1/4", "--block", "1", "--seed", "7", "--out", "tr"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let verify = run_in(dir.path(), &["verify", "--trace", "tr"]);
    assert!(verify.status.success());
    let text = String::from_utf8_lossy(&verify.stdout);
    assert!(text.contains("structural=PASS"));
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["construct", "--x", "2,2", "--alpha", "1/4", "--block", "2", "--seed", "11", "--out"];
    let mut a = args.to_vec();
    a.push("tr_a");
    assert!(run_in(dir.path(), &a).status.success());
    let mut b = args.to_vec();
    b.push("tr_b");
    assert!(run_in(dir.path(), &b).status.success());
    for file in [
        "params.txt",
        "graphs/final.wg",
        "graphs/g_1.wg",
        "active/step_2.txt",
        "bipartitions/step_1.txt",
        "partitions/step_2_W.txt",
    ] {
        let fa = fs::read(dir.path().join("tr_a").join(file)).unwrap();
        let fb = fs::read(dir.path().join("tr_b").join(file)).unwrap();
        assert_eq!(fa, fb, "file {file} differs between runs");
    }
}

#[test]
fn corrupted_trace_fails_verification_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(
        dir.path(),
        &["construct", "--x", "2,2", "--alpha", "1/4", "--block", "2", "--seed", "3", "--out", "tr"],
    )
    .status
    .success());
    // flip one weight inside a block of g_2
    let path = dir.path().join("tr/graphs/g_2.wg");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(|s| s.to_string()).collect();
    let row: Vec<&str> = lines[1].split(' ').collect();
    let mut row: Vec<String> = row.iter().map(|s| s.to_string()).collect();
    let col = 33; // second vertex of the first W-side block
    row[col] = if row[col] == "0.25" { "-0.25".into() } else { "0.25".into() };
    lines[1] = row.join(" ");
    // keep the matrix symmetric so the parser accepts it
    let mut cols: Vec<Vec<String>> = lines[1..]
        .iter()
        .map(|l| l.split(' ').map(|s| s.to_string()).collect())
        .collect();
    cols[col][0] = row[col].clone();
    lines[1 + col] = cols[col].join(" ");
    fs::write(&path, format!("{}\n", lines.join("\n"))).unwrap();
    let verify = run_in(dir.path(), &["verify", "--trace", "tr"]);
    assert_eq!(verify.status.code(), Some(1));
    let textout = String::from_utf8_lossy(&verify.stdout);
    assert!(textout.contains("FAIL"), "{textout}");
}

#[test]
fn refine_writes_the_run_record() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_graph(dir.path());
    let out = run_in(
        dir.path(),
        &["refine", "--graph", "g.wg", "--eps", "0.25", "--max-steps", "2", "--out", "run.txt"],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("run.txt")).unwrap();
    assert!(text.starts_with("run eps=0.25 steps="));
    assert!(text.contains("step 0 parts=1"));
}

#[test]
fn irreg_pair_and_partition_modes() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_graph(dir.path());
    let out = run_in(dir.path(), &["irreg", "--graph", "g.wg", "--x", "0,1", "--y", "2,3"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "witness value=0 U= W="
    );
    // constant graph with singleton partition prints 0
    fs::write(
        dir.path().join("c.wg"),
        "wgraph 3\n0 0.5 0.5\n0.5 0 0.5\n0.5 0.5 0\n",
    )
    .unwrap();
    fs::write(dir.path().join("p.txt"), "block 0: 0\nblock 1: 1\nblock 2: 2\n").unwrap();
    let out = run_in(dir.path(), &["irreg", "--graph", "c.wg", "--partition", "p.txt"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().next().unwrap(), "0");
}

#[test]
fn exit_codes_by_error_class() {
    let dir = tempfile::tempdir().unwrap();
    write_sample_graph(dir.path());
    // unknown flags: 2 (input)
    let out = run_in(dir.path(), &["irreg", "--graph", "g.wg", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    // regime error: 3
    let out = run_in(dir.path(), &["plan", "--eps", "1e-13"]);
    assert_eq!(out.status.code(), Some(3));
    // capacity error: 3 (cap exceeded)
    let mut big = String::from("wgraph 26\n");
    for i in 0..26 {
        let row: Vec<&str> = (0..26).map(|j| if i == j { "0" } else { "1" }).collect();
        big.push_str(&row.join(" "));
        big.push('\n');
    }
    fs::write(dir.path().join("big.wg"), big).unwrap();
    let all: Vec<String> = (0..26).map(|v| v.to_string()).collect();
    let ids = all.join(",");
    let out = run_in(dir.path(), &["irreg", "--graph", "big.wg", "--x", &ids, "--y", &ids]);
    assert_eq!(out.status.code(), Some(3));
    // infeasible construction: 1
    let out = run_in(
        dir.path(),
        &[
            "construct", "--x", "2,2", "--alpha", "1/4", "--block", "1", "--seed", "1",
            "--strict", "--max-attempts", "20", "--out", "trx",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn plan_reports_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["plan", "--eps", "1e-14"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("alpha=1/144"));
    assert!(text.contains("s=576"));
}

#[test]
fn spectral_and_diagnose_pipelines() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.mat"), "mat 2 2\n3 0\n0 4\n").unwrap();
    let out = run_in(dir.path(), &["spectral", "sigma", "--matrix", "m.mat"]);
    assert!(out.status.success());
    let sigma: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((sigma - 4.0).abs() < 1e-8);

    let out = run_in(
        dir.path(),
        &["spectral", "blowup", "--matrix", "m.mat", "--k", "2", "--out", "b.mat"],
    );
    assert!(out.status.success());
    assert!(fs::read_to_string(dir.path().join("b.mat")).unwrap().starts_with("mat 4 4\n"));

    assert!(run_in(
        dir.path(),
        &["construct", "--x", "2,2", "--alpha", "1/4", "--block", "1", "--seed", "5", "--out", "tr"],
    )
    .status
    .success());
    let out = run_in(dir.path(), &["spectral", "residual", "--trace", "tr", "--step", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("x,y,a,b,lambda,bound"));

    // candidate = singleton partition of all 32 trace vertices
    let mut candidate = String::new();
    for b in 0..32 {
        candidate.push_str(&format!("block {b}: {b}\n"));
    }
    fs::write(dir.path().join("cand.txt"), candidate).unwrap();
    let out = run_in(
        dir.path(),
        &["diagnose", "closeness", "--trace", "tr", "--candidate", "cand.txt"],
    );
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("frac_v,frac_w"));
    let out = run_in(
        dir.path(),
        &["diagnose", "counting", "--trace", "tr", "--candidate", "cand.txt", "--step", "2"],
    );
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("premises_hold=false"));
}
