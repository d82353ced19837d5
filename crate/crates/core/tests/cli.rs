use std::path::PathBuf;
use std::process::{Command, Output};

fn qisom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qisom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("qisom-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).expect("temp file writes");
    path
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_zero_preset_passes() {
    let out = qisom(&["verify", "--preset", "zero", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn non_hermitian_q_is_bad_input() {
    let q = scratch("nonherm.json", r#"{"n": 2, "q": [[[0,0],[0.5,0]],[[0.2,0],[0,0]]]}"#);
    let out = qisom(&["rewrite", "--q", q.to_str().unwrap(), "--word", "a1* a2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("q_ji = conj(q_ij)"), "stderr: {err}");
}

#[test]
fn unknown_preset_is_bad_input() {
    let out = qisom(&["verify", "--preset", "banana"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bratteli_dot_is_deterministic() {
    let args = ["bratteli", "--preset", "random:7:0.8", "--n", "2", "--k-max", "2", "--format", "dot"];
    let first = qisom(&args);
    let second = qisom(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&first.stdout).starts_with("digraph bratteli"));
}

#[test]
fn json_documents_carry_schema() {
    for args in [
        vec!["rewrite", "--preset", "zero", "--word", "a1* a1", "--format", "json"],
        vec!["gram", "--preset", "zero", "--v", "1,1", "--format", "json"],
        vec!["gicar", "--preset", "zero", "--k", "1", "--format", "json"],
        vec!["bratteli", "--preset", "zero", "--format", "json"],
    ] {
        let out = qisom(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout_json(&out)["schema"], 1, "{args:?}");
    }
}

#[test]
fn non_member_unitary_fails_with_invariant() {
    let q = scratch("imag.json", r#"{"n": 2, "q": [[[0,0],[0,0.5]],[[0,-0.5],[0,0]]]}"#);
    let u = scratch("swap.json", r#"{"u": [[[0,0],[1,0]],[[1,0],[0,0]]]}"#);
    let out = qisom(&[
        "symmetry",
        "--q",
        q.to_str().unwrap(),
        "--u",
        u.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["status"], "fail");
    assert_eq!(doc["invariant"], "symmetry_membership");
}
