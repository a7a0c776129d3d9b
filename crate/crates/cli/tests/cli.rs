use std::path::PathBuf;
use std::process::{Command, Output};

use weakshift_core::{info_curve, probability_curve, Spacing};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weakshift"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn field(stdout: &[u8], label: &str) -> String {
    let text = String::from_utf8_lossy(stdout);
    text.lines()
        .find_map(|l| {
            let mut parts = l.split_whitespace();
            (parts.next() == Some(label)).then(|| parts.next().unwrap_or("").to_string())
        })
        .unwrap_or_else(|| panic!("no {label} in\n{text}"))
}

fn value(stdout: &[u8], label: &str) -> f64 {
    field(stdout, label).parse().unwrap()
}

#[test]
fn hardy_scenario_matches_closed_form() {
    let out = run(&["run", scenario("hardy_nono.json").to_str().unwrap()]);
    assert!(out.status.success());
    let gg = (-1.0f64 / 8.0).exp();
    let expected = (1.0 - 2.0 * gg) / (5.0 - 4.0 * gg);
    let dq = value(&out.stdout, "delta_q");
    assert!(((dq - expected) / expected).abs() < 1e-12, "{dq}");
    assert!((value(&out.stdout, "grid_delta_q") - dq).abs() < 1e-8);
    assert!((value(&out.stdout, "weak_value_re") + 1.0).abs() < 1e-12);
    assert!((value(&out.stdout, "selection_prob") - 1.0 / 12.0).abs() < 1e-15);
}

#[test]
fn identity_scenario_shifts_rigidly() {
    let out = run(&["run", scenario("identity.json").to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(value(&out.stdout, "delta_q"), 0.3);
    assert_eq!(value(&out.stdout, "delta_p"), 0.0);
}

#[test]
fn orthogonal_scenario_exits_3() {
    let out = run(&["run", scenario("orthogonal.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_scenario_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("identity.json")).unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, text.replace("\"delta\": 0.5", "\"delta\": [0.5]")).unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));

    std::fs::write(&path, text.replace("[[0.6, 0], [0, 0.8]]", "[[0.6, 0]]")).unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("preselect"));

    let out = run(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn weak_value_is_reported_undefined_when_selection_is_orthogonal() {
    // <f|i> = 0 but the two eigenspaces carry opposite amplitudes, so the
    // coupled meter still passes the filter
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"dimension": 2,
            "observable": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]],
            "preselect": [[1, 0], [1, 0]],
            "postselect": [[1, 0], [-1, 0]],
            "g": 1.0, "delta": 1.0}"#,
    )
    .unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(field(&out.stdout, "weak_value_re"), "n/a");
    assert_eq!(field(&out.stdout, "first_order_delta_q"), "n/a");
    assert!((value(&out.stdout, "delta_q") - 0.5).abs() < 1e-15);
}

#[test]
fn hardy_sweep_csv_is_library_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let out = run(&[
        "hardy-sweep",
        "--g-min",
        "0.001",
        "--g-max",
        "10",
        "--points",
        "40",
        "--delta",
        "1",
        "--spacing",
        "log",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "g[length],prob_oo[1],prob_ono[1],prob_noo[1],prob_nono[1],prob_sum[1]"
    );
    let curve = probability_curve(0.001, 10.0, 40, 1.0, Spacing::Log).unwrap();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    for (row, p) in rows.iter().zip(&curve) {
        assert_eq!(row[0].to_bits(), p.g.to_bits());
        assert_eq!(row[4].to_bits(), p.prob_nono.to_bits());
        assert_eq!(row[2], p.prob_ono);
    }
    assert!(rows.windows(2).all(|w| w[1][4] > w[0][4]));
}

#[test]
fn info_sweep_leaves_q_min_empty_at_zero_coupling() {
    let out = run(&["info-sweep", "--g-min", "0", "--g-max", "10", "--points", "11"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "g[length],lambda[1],i_a_bits[bit],q_min[length]");
    assert!(lines[1].ends_with(','));
    let curve = info_curve(0.0, 10.0, 11, 1.0, Spacing::Linear).unwrap();
    for (line, r) in lines[1..].iter().zip(&curve) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[2].parse::<f64>().unwrap().to_bits(), r.i_a.to_bits());
    }
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(run(&["hardy-sweep", "--points", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["info-sweep", "--g-min", "0", "--spacing", "log"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["bounds-optimize", "--dim", "2", "--g", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["bounds-optimize", "--dim", "9", "--g", "1", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn identity_optimum_has_zero_gap() {
    let out = run(&[
        "bounds-optimize",
        "--dim",
        "3",
        "--g",
        "0.7",
        "--seed",
        "9",
        "--restarts",
        "2",
        "--observable",
        "identity",
    ]);
    assert!(out.status.success());
    assert_eq!(value(&out.stdout, "best_max_gap"), 0.0);
    assert_eq!(value(&out.stdout, "best_min_gap"), 0.0);
    assert_eq!(value(&out.stdout, "best_max_delta_q"), 0.7);
}

#[test]
fn help_documents_exit_codes() {
    let out = run(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in [
        "0  success",
        "1  an invariant",
        "2  invalid input",
        "3  the pre- and post-selection",
    ] {
        assert!(text.contains(line), "{line}");
    }
}

#[test]
fn verify_passing_suite_exits_0() {
    let out = run(&["verify", "--suite", "hardy"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS hardy_closed_form"));
    assert!(text.contains("failed 0"));
}

#[test]
fn verify_failure_exits_1_and_writes_replay() {
    // the strong-coupling side of the information/negative-shift check
    // fails in a narrow coupling window, which gives a real failing check
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        "--suite",
        "info",
        "--replay-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL info_strong_no_negative_shifts"));
    assert!(text.contains("replay: {"));
    let replay = std::fs::read_to_string(dir.path().join("info_strong_no_negative_shifts.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&replay).unwrap();
    assert!(v["g"].as_f64().unwrap() > 4.0);
}

#[test]
fn replayed_setup_reproduces_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "verify",
        "--suite",
        "bounds",
        "--quick",
        "--replay-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let replay = dir.path().join("weak_bound_saturated_q.json");
    let out = run(&["run", replay.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // bound is dq <= D = 1
    assert!(value(&out.stdout, "delta_q").abs() > 1.0 + 1e-6);
}
