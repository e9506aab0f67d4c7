//! End-to-end CLI tests: exit-code contract, determinism, file formats,
//! and the batch mode.

use std::path::Path;
use std::process::{Command, Output};

fn lapdet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapdet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawning lapdet")
}

fn write_p3(dir: &Path) {
    std::fs::write(dir.join("p3.txt"), "3 2 undirected\n1 2 1\n2 3 1\n").unwrap();
}

fn write_disconnected(dir: &Path) {
    std::fs::write(dir.join("disconnected.txt"), "4 2 undirected\n1 2 1\n3 4 1\n").unwrap();
}

#[test]
fn exit_code_contract() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    write_disconnected(tmp.path());

    let detectable =
        lapdet(&["analyze", "--graph", "p3.txt", "--dt", "0.1", "--measure", "1"], tmp.path());
    assert_eq!(detectable.status.code(), Some(0));

    let not_detectable = lapdet(
        &["analyze", "--graph", "disconnected.txt", "--dt", "0.1", "--measure", "1"],
        tmp.path(),
    );
    assert_eq!(not_detectable.status.code(), Some(2));

    let zero_dt =
        lapdet(&["analyze", "--graph", "p3.txt", "--dt", "0", "--measure", "1"], tmp.path());
    assert_eq!(zero_dt.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&zero_dt.stderr).contains("dt must be positive"));

    let missing_file =
        lapdet(&["analyze", "--graph", "nope.txt", "--dt", "0.1", "--measure", "1"], tmp.path());
    assert_eq!(missing_file.status.code(), Some(1));

    let no_output_spec = lapdet(&["analyze", "--graph", "p3.txt", "--dt", "0.1"], tmp.path());
    assert_eq!(no_output_spec.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&no_output_spec.stderr).contains("--measure"));

    let bad_flag = lapdet(&["analyze", "--graph", "p3.txt", "--dt", "x"], tmp.path());
    assert_eq!(bad_flag.status.code(), Some(1));
}

#[test]
fn malformed_graph_reports_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.txt"), "2 1 directed\n1 1 1.0\n").unwrap();
    let output =
        lapdet(&["analyze", "--graph", "bad.txt", "--dt", "0.1", "--measure", "1"], tmp.path());
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
    assert!(stderr.contains("self-loop"), "stderr: {stderr}");
}

#[test]
fn generate_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["a.txt", "b.txt"] {
        let output = lapdet(
            &["generate", "random", "--n", "6", "--seed", "7", "--out", name],
            tmp.path(),
        );
        assert_eq!(output.status.code(), Some(0));
    }
    let a = std::fs::read(tmp.path().join("a.txt")).unwrap();
    let b = std::fs::read(tmp.path().join("b.txt")).unwrap();
    assert_eq!(a, b, "same seed must produce byte-identical files");

    let other = lapdet(
        &["generate", "random", "--n", "6", "--seed", "8", "--out", "c.txt"],
        tmp.path(),
    );
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(a, std::fs::read(tmp.path().join("c.txt")).unwrap());
}

#[test]
fn generate_grid_and_path() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = lapdet(
        &["generate", "grid", "--rows", "2", "--cols", "3", "--out", "grid.txt"],
        tmp.path(),
    );
    assert_eq!(grid.status.code(), Some(0));
    let text = std::fs::read_to_string(tmp.path().join("grid.txt")).unwrap();
    assert!(text.starts_with("6 7 undirected\n"), "grid file: {text}");

    let path = lapdet(&["generate", "path", "--n", "3", "--out", "p3.txt"], tmp.path());
    assert_eq!(path.status.code(), Some(0));
    assert_eq!(
        std::fs::read_to_string(tmp.path().join("p3.txt")).unwrap(),
        "3 2 undirected\n1 2 1\n2 3 1\n"
    );

    let unknown = lapdet(&["generate", "blob", "--n", "3", "--out", "x.txt"], tmp.path());
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn simulate_reaches_consensus_at_the_average() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    let output = lapdet(
        &[
            "simulate", "--graph", "p3.txt", "--dt", "0.5", "--x0", "1,0,0", "--steps", "50",
            "--measure", "1", "--out", "traj.csv",
        ],
        tmp.path(),
    );
    assert_eq!(output.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("traj.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    // t, x1, x2, x3, y1: the symmetric Laplacian preserves the mean, so
    // consensus lands on 1/3.
    assert_eq!(fields.len(), 5);
    for x in &fields[1..4] {
        assert!((x - 1.0 / 3.0).abs() < 1e-6, "final state {x} not at the average");
    }
}

#[test]
fn simulate_zero_steps_emits_single_row() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    let output = lapdet(
        &["simulate", "--graph", "p3.txt", "--dt", "0.1", "--steps", "0"],
        tmp.path(),
    );
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2, "header plus one row: {stdout}");
    // Default output measures every state.
    assert_eq!(lines[0], "t,x_1,x_2,x_3,y_1,y_2,y_3");
    assert_eq!(lines[1], "0,1,0,0,1,0,0");
}

#[test]
fn estimate_trace_is_bounded_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    let args = [
        "estimate", "--graph", "p3.txt", "--dt", "0.1", "--measure", "1", "--steps", "1000",
        "--seed", "42", "--out", "trace.csv",
    ];
    let output = lapdet(&args, tmp.path());
    assert_eq!(output.status.code(), Some(0));
    let csv = std::fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 1001);
    let reference = rows[50][1];
    for row in &rows[50..] {
        assert!(row[1] <= 100.0 * reference, "trace_P diverged: {} at k={}", row[1], row[0]);
    }

    let rerun = lapdet(
        &[
            "estimate", "--graph", "p3.txt", "--dt", "0.1", "--measure", "1", "--steps",
            "1000", "--seed", "42", "--out", "trace2.csv",
        ],
        tmp.path(),
    );
    assert_eq!(rerun.status.code(), Some(0));
    assert_eq!(csv, std::fs::read_to_string(tmp.path().join("trace2.csv")).unwrap());
}

#[test]
fn analyze_csv_format() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    let output = lapdet(
        &["analyze", "--graph", "p3.txt", "--dt", "0.1", "--measure", "1", "--format", "csv"],
        tmp.path(),
    );
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.starts_with("key,value\n"));
    assert!(stdout.contains("certificate_detectable,true"));
    assert!(stdout.contains("numeric_detectable,true"));
}

#[test]
fn analyze_report_is_valid_versioned_json() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    let output = lapdet(
        &["analyze", "--graph", "p3.txt", "--dt", "0.1", "--measure", "1"],
        tmp.path(),
    );
    let value: serde_json::Value =
        serde_json::from_slice(&output.stdout).expect("report must be valid JSON");
    assert_eq!(value["schema_version"], 1);
    assert_eq!(value["detectability"]["certificate_detectable"], true);
    assert!(value["timing_ms"].is_f64());
}

#[test]
fn analyze_stabilizability_section() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    std::fs::write(tmp.path().join("b.txt"), "3 1\n1\n0\n0\n").unwrap();
    let output = lapdet(
        &[
            "analyze", "--graph", "p3.txt", "--dt", "0.1", "--measure", "1", "--b-matrix",
            "b.txt",
        ],
        tmp.path(),
    );
    assert_eq!(output.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["stabilizability"]["applicable"], true);
    assert_eq!(value["stabilizability"]["stabilizable"], true);
}

#[test]
fn analyze_schedule_file() {
    let tmp = tempfile::tempdir().unwrap();
    write_p3(tmp.path());
    let schedule = r#"[
        {"graph": "p3.txt", "dt": 0.2},
        {"graph": {"n": 3, "directed": false, "edges": [[1, 2, 1.0], [2, 3, 0.5], [3, 1, 2.0]]}, "dt": 0.4}
    ]"#;
    std::fs::write(tmp.path().join("schedule.json"), schedule).unwrap();
    let output = lapdet(
        &["analyze", "--schedule", "schedule.json", "--measure", "1"],
        tmp.path(),
    );
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["laplacian_summary"]["segments"], 2);
    assert_eq!(value["spectral"]["stochasticity"]["passed"], true);
    assert_eq!(value["detectability"]["numeric_detectable"], true);

    let estimate = lapdet(
        &["estimate", "--schedule", "schedule.json", "--measure", "1", "--steps", "100"],
        tmp.path(),
    );
    assert_eq!(estimate.status.code(), Some(0));
}

#[test]
fn batch_mode_writes_reports_concurrently() {
    let tmp = tempfile::tempdir().unwrap();
    let graphs = tmp.path().join("graphs");
    std::fs::create_dir(&graphs).unwrap();
    write_p3(&graphs);
    write_disconnected(&graphs);
    std::fs::write(graphs.join("notes.md"), "ignored").unwrap();

    let output = lapdet(
        &[
            "analyze",
            "--batch",
            "graphs",
            "--dt",
            "0.1",
            "--measure",
            "1",
            "--out",
            "reports",
        ],
        tmp.path(),
    );
    // One of the two graphs is not detectable.
    assert_eq!(output.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("disconnected: not detectable"), "{stdout}");
    assert!(stdout.contains("p3: detectable"), "{stdout}");

    let p3: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("reports/p3.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(p3["detectability"]["certificate_detectable"], true);
    let disc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("reports/disconnected.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(disc["detectability"]["numeric_detectable"], false);
}
