//! End-to-end checks of the `closing-lab` executable: exit codes, report
//! text, flag handling, and byte-identical CSV output across identical runs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str], out_dir: &PathBuf) -> Output {
    Command::new(env!("CARGO_BIN_EXE_closing-lab"))
        .args(args)
        .env("CLOSING_LAB_OUT", out_dir)
        .output()
        .expect("binary runs")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("closing-lab-bin-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn close_toy_exits_zero_with_lambda_star() {
    let dir = tmp_dir("toy");
    let out = run(&["close", "toy_contraction"], &dir);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lambda* = 0.00940617"), "{text}");
    assert!(text.contains("[ok]"));
    assert!(!text.contains("VIOLATED"));
}

#[test]
fn close_exchange_exits_two() {
    let dir = tmp_dir("iet");
    let out = run(&["close", "golden_iet"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("hypothesis violation"), "{text}");
}

#[test]
fn missing_scenario_exits_one() {
    let dir = tmp_dir("missing");
    let out = run(&["close", "/no/such/file.scn"], &dir);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_documents_csv_columns() {
    let dir = tmp_dir("help");
    let out = run(&["--help"], &dir);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "analyze",
        "verify-flowbox",
        "bin_lo, mass",
        "y_in, lambda, y_out, discrepancy, on_plateau",
        "CLOSING_LAB_OUT",
    ] {
        assert!(text.contains(needle), "help lacks `{needle}`");
    }
}

#[test]
fn identical_runs_emit_identical_csv() {
    let dir_a = tmp_dir("det-a");
    let dir_b = tmp_dir("det-b");
    for args in [
        vec!["measure", "golden_iet"],
        vec!["close", "toy_contraction"],
        vec!["sweep", "toy_contraction"],
        vec!["verify-flowbox", "flowbox_default"],
        vec!["analyze", "mixed_slope", "--orbit=3000"],
    ] {
        let out_a = run(&args, &dir_a);
        let out_b = run(&args, &dir_b);
        assert!(out_a.status.success() && out_b.status.success(), "{args:?}");
        let mut names: Vec<String> = std::fs::read_dir(&dir_a)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in &names {
            let a = std::fs::read(dir_a.join(name)).unwrap();
            let b = std::fs::read(dir_b.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }
}

#[test]
fn flag_overrides_are_applied() {
    let dir = tmp_dir("flags");
    let out = run(&["measure", "golden_iet", "--orbit=500", "--bins=10"], &dir);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("orbit length 500"), "{text}");
    let csv = std::fs::read_to_string(dir.join("golden_iet_measure.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11); // header + 10 bins
}

#[test]
fn bound_lines_are_recheckable_from_csv() {
    let dir = tmp_dir("recheck");
    let out = run(&["verify-flowbox", "flowbox_default"], &dir);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // re-derive the plateau bound from the emitted CSV
    let csv = std::fs::read_to_string(dir.join("flowbox_default_transit.csv")).unwrap();
    let mut max_plateau: f64 = 0.0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let discrepancy: f64 = cols[3].parse().unwrap();
        let on_plateau: u8 = cols[4].parse().unwrap();
        if on_plateau == 1 {
            max_plateau = max_plateau.max(discrepancy);
        }
    }
    assert!(max_plateau <= 1e-6);
    assert!(text.contains("max plateau discrepancy"));
}
