//! Acceptance criterion 8: `analyze` reproduces the committed golden
//! reports byte-for-byte modulo the timing field, with the documented exit
//! codes. Prints one PASS/FAIL line (visible with `-- --nocapture`).

use std::path::{Path, PathBuf};
use std::process::Command;

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Drops the volatile timing line; everything else must match exactly.
fn without_timing(text: &str) -> String {
    text.lines()
        .filter(|line| !line.contains("\"timing_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_analyze(graph: &str, out: &Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_lapdet"))
        .current_dir(golden_dir())
        .args([
            "analyze", "--graph", graph, "--dt", "0.1", "--measure", "1", "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .expect("spawning lapdet");
    status.code().expect("exit code")
}

#[test]
fn acceptance_8_cli_golden_reports() {
    let tmp = tempfile::tempdir().unwrap();

    let p3_out = tmp.path().join("p3_report.json");
    let p3_code = run_analyze("p3.txt", &p3_out);
    assert_eq!(p3_code, 0, "p3 fixture must exit 0 (detectable)");
    let p3_actual = std::fs::read_to_string(&p3_out).unwrap();
    let p3_golden = std::fs::read_to_string(golden_dir().join("p3_report.json")).unwrap();
    assert_eq!(
        without_timing(&p3_actual),
        without_timing(&p3_golden),
        "p3 report drifted from the golden file"
    );

    let disc_out = tmp.path().join("disconnected_report.json");
    let disc_code = run_analyze("disconnected.txt", &disc_out);
    assert_eq!(disc_code, 2, "disconnected fixture must exit 2 (not detectable)");
    let disc_actual = std::fs::read_to_string(&disc_out).unwrap();
    let disc_golden =
        std::fs::read_to_string(golden_dir().join("disconnected_report.json")).unwrap();
    assert_eq!(
        without_timing(&disc_actual),
        without_timing(&disc_golden),
        "disconnected report drifted from the golden file"
    );

    println!(
        "criterion 8 (CLI golden reports): PASS — p3 exit 0 and disconnected exit 2, both byte-identical modulo timing"
    );
}
