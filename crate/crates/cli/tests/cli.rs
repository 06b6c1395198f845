use std::path::Path;
use std::process::{Command, Output};

use sisdmdp_cli::{parse_csv, serialize_model};
use sisdmdp_core::{Chain, Model, PartitionLayout};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sisdmdp"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn generate_model(dir: &Path, name: &str, seed: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = run(&[
        "generate",
        "--states",
        "60",
        "--partitions",
        "3",
        "--actions",
        "2",
        "--seed",
        seed,
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "generate failed: {}", stderr(&out));
    path
}

#[test]
fn generate_is_byte_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate_model(dir.path(), "a.json", "9");
    let b = generate_model(dir.path(), "b.json", "9");
    let c = generate_model(dir.path(), "c.json", "10");
    let bytes_a = std::fs::read(a).unwrap();
    assert_eq!(bytes_a, std::fs::read(b).unwrap());
    assert_ne!(bytes_a, std::fs::read(c).unwrap());
}

#[test]
fn validate_accepts_generated_models() {
    let dir = tempfile::tempdir().unwrap();
    let model = generate_model(dir.path(), "m.json", "4");
    let out = run(&["validate", model.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("action 0: single_input ok"));
    assert!(text.contains("action 1: release states per partition"));
    assert!(text.contains("model ok: 60 states, 3 partitions, 2 actions"));
}

#[test]
fn validate_rejects_a_corrupted_cross_arc_with_exit_code_1() {
    let rows = vec![
        vec![(1, 0.5), (3, 0.5)],
        vec![(0, 0.6), (2, 0.4)],
        vec![(3, 1.0)],
        vec![(0, 0.7), (2, 0.3)],
    ];
    let chain = Chain::new(4, rows, vec![1.0, 0.0, 2.0, 0.0]).unwrap();
    let layout = PartitionLayout::new(vec![0, 2, 4]).unwrap();
    let model = Model::new(vec![chain], layout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serialize_model(&model)).unwrap();

    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("single_input VIOLATED"), "stdout: {text}");
    assert!(text.contains("away from its root"), "stdout: {text}");
}

#[test]
fn truncated_model_file_names_the_missing_section() {
    let dir = tempfile::tempdir().unwrap();
    let model = generate_model(dir.path(), "m.json", "4");
    let text = std::fs::read_to_string(&model).unwrap();
    let cut = text.find(",\n  \"rewards\"").unwrap();
    let truncated = format!("{}\n}}\n", &text[..cut]);
    let path = dir.path().join("truncated.json");
    std::fs::write(&path, truncated).unwrap();

    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("missing section `rewards`"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn solve_reports_the_average_reward_and_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let model = generate_model(dir.path(), "m.json", "4");
    let result = dir.path().join("result.json");
    let out = run(&[
        "solve",
        model.to_str().unwrap(),
        "--criterion",
        "average",
        "--out",
        result.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("algorithm: MRPI+Chiu+RB"), "stdout: {text}");
    assert!(text.contains("stop reason: policy_fixed"), "stdout: {text}");
    assert!(text.contains("rho: "), "stdout: {text}");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(result).unwrap()).unwrap();
    let first = &doc["results"][0];
    assert_eq!(first["algorithm"], "MRPI+Chiu+RB");
    assert_eq!(first["values"].as_array().unwrap().len(), 60);
    assert_eq!(first["policy"].as_array().unwrap().len(), 60);
    assert!(first["rho"].as_f64().is_some());
}

#[test]
fn solve_runs_discounted_value_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let model = generate_model(dir.path(), "m.json", "6");
    let out = run(&[
        "solve",
        model.to_str().unwrap(),
        "--criterion",
        "discounted",
        "--gamma",
        "0.85",
        "--algorithms",
        "VI,PI+GJ",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("algorithm: VI"));
    assert!(text.contains("algorithm: PI+GJ"));
    assert!(text.contains("stop reason: linf"));
}

#[test]
fn solve_with_a_zero_budget_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let model = generate_model(dir.path(), "m.json", "4");
    let out = run(&[
        "solve",
        model.to_str().unwrap(),
        "--budget-s",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"), "stderr: {}", stderr(&out));
}

#[test]
fn solve_rejects_a_mismatched_algorithm_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let model = generate_model(dir.path(), "m.json", "4");
    let out = run(&[
        "solve",
        model.to_str().unwrap(),
        "--criterion",
        "average",
        "--algorithms",
        "VI",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not defined"));
}

#[test]
fn bench_emits_parseable_csv_under_a_thread_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_sisdmdp"))
        .env("SISDMDP_THREADS", "1")
        .args([
            "bench",
            "--states",
            "20,30",
            "--partitions",
            "2",
            "--actions",
            "1",
            "--seed",
            "1,2",
            "--criterion",
            "average",
            "--algorithms",
            "MRPI+Chiu+RB,RVI",
            "--budget-s",
            "60",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let records = parse_csv(&text).unwrap();
    assert_eq!(records.len(), 8);
    assert!(records.iter().all(|r| r.criterion == "average"));
    assert!(records.iter().all(|r| r.converged));
}

#[test]
fn bench_rejects_the_gth_variant_under_discounting() {
    let out = run(&[
        "bench",
        "--states",
        "20",
        "--partitions",
        "2",
        "--criterion",
        "discounted",
        "--algorithms",
        "MRPI+Chiu+GTH",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("not defined under the discounted criterion"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn bench_rejects_an_unknown_report_format() {
    let out = run(&[
        "bench",
        "--states",
        "20",
        "--partitions",
        "2",
        "--format",
        "yaml",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unsupported report format"));
}

#[test]
fn compare_prints_the_gap_table() {
    let dir = tempfile::tempdir().unwrap();
    let model = generate_model(dir.path(), "m.json", "4");
    let out = run(&["compare", model.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# Solver comparison (average criterion, N = 60, K = 3)"));
    assert!(text.contains("| 0 |"));
    assert!(text.contains("| 1 |"));
}

#[test]
fn missing_model_file_exits_1() {
    let out = run(&["solve", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot read"));
}
