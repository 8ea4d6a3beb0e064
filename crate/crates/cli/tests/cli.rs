use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_locality-lab"));
    c.env_remove("LOCALITY_LAB_TOL");
    c
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("locality-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn singlet_behavior_is_non_signalling() {
    let f = data("singlet_behavior.json");
    let o = run(&["check", "--conditions", "no-signalling", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn singlet_as_lambda_free_model_fails_outcome_independence() {
    let f = data("singlet_parallel.json");
    let o = run(&[
        "check",
        "--conditions",
        "outcome-independence",
        "--format",
        "json",
        f.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let violation = v["results"][0]["max_violation"].as_f64().unwrap();
    assert!((violation - 0.5).abs() < 1e-12, "{violation}");
    assert_eq!(v["passed"], false);
}

#[test]
fn truncated_input_is_an_input_error() {
    let full = std::fs::read_to_string(data("singlet_behavior.json")).unwrap();
    let p = scratch("truncated.json", &full[..full.len() / 2]);
    let o = run(&["check", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line"), "diagnostic should carry a position: {err}");
}

#[test]
fn malformed_inputs_never_panic() {
    let cases = [
        ("empty.json", ""),
        ("array.json", "[1, 2, 3]"),
        ("unknown_field.json", r#"{"scenario": null, "tabel": []}"#),
        (
            "bad_table.json",
            r#"{"scenario": {"settings_a": ["a"], "settings_b": ["b"], "outcomes_a": ["0","1"], "outcomes_b": ["0","1"]}, "table": [0.5, 0.5, 0.5, -0.5]}"#,
        ),
        (
            "short_table.json",
            r#"{"scenario": {"settings_a": ["a"], "settings_b": ["b"], "outcomes_a": ["0","1"], "outcomes_b": ["0","1"]}, "table": [1.0]}"#,
        ),
    ];
    for (name, body) in cases {
        let p = scratch(name, body);
        let o = run(&["check", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(!err.contains("panicked"), "{name}: {err}");
    }
    let missing = run(&["check", "/nonexistent/file.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["chsh"],
        vec!["chsh", "--grid"],
        vec!["chsh", "--grid", "--step", "0"],
        vec!["signmodel", "--n", "10", "--settings", "0"],
        vec!["everett"],
        vec!["everett", "--theta", "NaN"],
        vec!["check", "--tol", "-1", "x.json"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_tolerance_environment_is_an_input_error() {
    let f = data("singlet_behavior.json");
    let o = bin()
        .env("LOCALITY_LAB_TOL", "lots")
        .args(["check", f.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tolerance_environment_sets_default() {
    // A slightly signalling table: A's marginal moves by 1e-6 with b.
    let body = r#"{
      "scenario": {"settings_a": ["a"], "settings_b": ["b0", "b1"],
                   "outcomes_a": ["0", "1"], "outcomes_b": ["0", "1"]},
      "table": [0.25, 0.25, 0.25, 0.25,
                0.2500005, 0.2500005, 0.2499995, 0.2499995]
    }"#;
    let p = scratch("drift.json", body);
    let path = p.to_str().unwrap();
    assert_eq!(run(&["check", "--conditions", "no-signalling", path]).status.code(), Some(1));
    let loose = bin()
        .env("LOCALITY_LAB_TOL", "1e-5")
        .args(["check", "--conditions", "no-signalling", path])
        .output()
        .unwrap();
    assert_eq!(loose.status.code(), Some(0));
    let explicit = bin()
        .env("LOCALITY_LAB_TOL", "1e-5")
        .args(["check", "--conditions", "no-signalling", "--tol", "1e-9", path])
        .output()
        .unwrap();
    assert_eq!(explicit.status.code(), Some(1));
}

#[test]
fn everett_zero_angle_gives_two_branches() {
    let o = run(&["everett", "--theta", "0", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last: Vec<&str> = text.lines().filter(|l| l.starts_with("measured B,")).collect();
    assert_eq!(last.len(), 2);
    assert!(last[0].starts_with("measured B,up,up,down,down,"));
    assert!(last[1].starts_with("measured B,down,down,up,up,"));
}

#[test]
fn everett_sixty_degrees_weights() {
    let o = run(&["everett", "--theta", "1.0472", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("stage,m_A,1,2,m_B,C,re,im,weight"));
    let mut weights: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("compared,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(weights.len(), 4);
    weights.sort_by(f64::total_cmp);
    for (w, want) in weights.iter().zip([0.125, 0.125, 0.375, 0.375]) {
        assert!((w - want).abs() < 1e-5, "{w} vs {want}");
    }
}

#[test]
fn everett_json_has_definiteness_matrix() {
    let o = run(&["everett", "--theta", "1.0471975511965976", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let matrix = v["definiteness"].as_array().unwrap();
    let compared: Vec<_> = matrix.iter().filter(|e| e["stage"] == "compared").collect();
    assert_eq!(compared.len(), 8);
    assert!(compared.iter().all(|e| e["definite"] == true));
    let measured: Vec<_> = matrix.iter().filter(|e| e["stage"] == "measured B").collect();
    assert!(measured.iter().all(|e| e["definite"] == false));
}

#[test]
fn chsh_optimize_reports_tsirelson() {
    let o = run(&["chsh", "--optimize", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let s = v["abs_s"].as_f64().unwrap();
    assert!((s - 2.0 * 2f64.sqrt()).abs() < 1e-6, "{s}");
    assert!(stdout(&run(&["chsh", "--optimize"])).contains("2.828427"));
}

#[test]
fn chsh_classical_has_sixteen_rows() {
    let o = run(&["chsh", "--classical", "--format", "csv"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    let max = rows
        .iter()
        .map(|r| r.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(max, 2.0);
}

#[test]
fn chsh_grid_row_count() {
    let o = run(&["chsh", "--grid", "--step", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let n = (std::f64::consts::TAU / 0.1).ceil() as usize + 1;
    assert_eq!(text.lines().count(), n * n + 1);
    assert_eq!(text.lines().next(), Some("a,b,E"));
}

#[test]
fn bell1964_reports_violation() {
    let o = run(&[
        "bell1964",
        "--a",
        "0",
        "--b",
        "1.0471975511965976",
        "--c",
        "2.0943951023931953",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["slack"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert_eq!(v["satisfied"], false);
    assert_eq!(v["precondition_holds"], true);
}

#[test]
fn boxes_reports_half_outcome_dependence() {
    let o = run(&["boxes", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["outcome_independence"]["max_violation"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["no_signalling"]["passed"], true);
}

#[test]
fn signmodel_is_seed_reproducible_and_seed_sensitive() {
    let args = |seed: &str| {
        run(&["signmodel", "--n", "20000", "--seed", seed, "--settings", "0,0.5,1.5", "--format", "csv"]).stdout
    };
    assert_eq!(args("3"), args("3"));
    assert_ne!(args("3"), args("4"));
    let text = String::from_utf8(args("3")).unwrap();
    assert!(text.lines().any(|l| l == "0,0,-1,-1"));
}

#[test]
fn timeline_checks_light_cones() {
    assert_eq!(run(&["timeline", data("timeline.json").to_str().unwrap()]).status.code(), Some(0));
    let early = scratch(
        "early.json",
        r#"[{"t": 1, "x": -2, "role": "MeasurementA", "label": "A"},
            {"t": 1, "x": 2, "role": "MeasurementB", "label": "B"},
            {"t": 2, "x": 0, "role": "Comparison", "label": "C"}]"#,
    );
    let o = run(&["timeline", "--format", "csv", early.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("comparison in future light cone of A,false"));
    let missing_b = scratch("no_b.json", r#"[{"t": 1, "x": -2, "role": "MeasurementA"}]"#);
    assert_eq!(run(&["timeline", missing_b.to_str().unwrap()]).status.code(), Some(2));
}
