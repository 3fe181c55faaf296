use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

fn tupleqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tupleqa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build_kb(dir: &Path, tsv: &str) -> PathBuf {
    let kb = dir.join("kb");
    let out = tupleqa(&["build-kb", "--tuples", s(&fixture(tsv)), "--out", s(&kb)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(kb.join("kb.json").is_file());
    kb
}

#[test]
fn answers_moon_question() {
    let dir = tempfile::tempdir().unwrap();
    let kb = build_kb(dir.path(), "moon/kb.tsv");
    let graphs = dir.path().join("graphs.jsonl");
    let lp = dir.path().join("lp");
    let out = tupleqa(&[
        "answer",
        "--kb",
        s(&kb),
        "--questions",
        s(&fixture("moon/questions.jsonl")),
        "--graphs",
        s(&graphs),
        "--dump-lp",
        s(&lp),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = stdout
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0]["answer"], "the Moon");
    assert_eq!(lines[0]["answer_index"], 3);
    assert_eq!(lines[0]["scores"][1], "no-support");

    let g: serde_json::Value = serde_json::from_str(
        std::fs::read_to_string(&graphs)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(g["ranking"][0]["choice"], "the Moon");
    assert!(
        g["ranking"][0]["support"]["edges"]
            .as_array()
            .unwrap()
            .len()
            > 1
    );
    let program = std::fs::read_to_string(lp.join("moon.lp")).unwrap();
    assert!(program.contains("\nMaximize\n"));
    assert!(program.contains("one_choice"));
}

#[test]
fn evaluate_is_byte_identical_and_compares() {
    let dir = tempfile::tempdir().unwrap();
    let kb = build_kb(dir.path(), "science/kb.tsv");
    let args = |solver: &'static str| {
        vec![
            "evaluate".to_string(),
            "--kb".into(),
            s(&kb).into(),
            "--questions".into(),
            s(&fixture("science/questions.jsonl")).into(),
            "--sentences".into(),
            s(&fixture("science/sentences.jsonl")).into(),
            "--config".into(),
            s(&fixture("science/config.toml")).into(),
            "--solver".into(),
            solver.into(),
        ]
    };
    let run = |solver| {
        let a: Vec<String> = args(solver);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        let out = tupleqa(&a);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let first = run("tupleinf");
    assert_eq!(first, run("tupleinf"));
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert!(report["accuracy"].as_f64().unwrap() > 0.25);

    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, &first).unwrap();
    std::fs::write(&b, run("ir")).unwrap();
    let out = tupleqa(&["compare", "--reports", s(&a), s(&b)]);
    assert!(out.status.success());
    let c: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(c["solver_a"], "tupleinf");
    assert_eq!(c["solver_b"], "ir");
    let p = c["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
}

#[test]
fn exit_codes() {
    assert_eq!(tupleqa(&["--help"]).status.code(), Some(0));
    assert_eq!(tupleqa(&["--version"]).status.code(), Some(0));
    assert_eq!(tupleqa(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(tupleqa(&["answer", "--kb", "x"]).status.code(), Some(2));
    let out = tupleqa(&[
        "answer",
        "--kb",
        "/nonexistent/kb",
        "--questions",
        s(&fixture("moon/questions.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = tupleqa(&[
        "evaluate",
        "--kb",
        s(&fixture("moon/kb.tsv")),
        "--questions",
        s(&fixture("moon/questions.jsonl")),
        "--solver",
        "ir",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
