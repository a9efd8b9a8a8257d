use std::process::{Command, Output};

fn accrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_accrlab"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn verify_is_deterministic_for_a_seed() {
    let a = accrlab(&["verify", "--seed", "7", "--json", "-"]);
    let b = accrlab(&["verify", "--seed", "7", "--json", "-"]);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&a), code(&b));
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["report_version"], 1);
    assert_eq!(v["seed"], 7);
}

#[test]
fn different_seeds_sample_different_points() {
    let a = accrlab(&[
        "run",
        "builtin:property-suite",
        "--n",
        "1",
        "--seed",
        "1",
        "--json",
        "-",
    ]);
    let b = accrlab(&[
        "run",
        "builtin:property-suite",
        "--n",
        "1",
        "--seed",
        "2",
        "--json",
        "-",
    ]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn empty_check_list_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(
        &path,
        r#"{"name": "empty", "n": 1, "structure": "builtin_f0", "checks": []}"#,
    )
    .unwrap();
    let out_json = dir.path().join("report.json");
    let o = accrlab(&[
        "run",
        path.to_str().unwrap(),
        "--json",
        out_json.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_json).unwrap()).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("scenario empty"));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    assert_eq!(code(&accrlab(&["run"])), 2);
    assert_eq!(code(&accrlab(&["run", "builtin:no-such-thing"])), 2);
    assert_eq!(code(&accrlab(&["run", "builtin:f0-flat", "--tol", "x"])), 2);
    assert_eq!(
        code(&accrlab(&["run", "builtin:f0-flat", "--tol", "x=-1"])),
        2
    );
    assert_eq!(
        code(&accrlab(&["run", "builtin:example-4.1", "--n", "3"])),
        2
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name": "bad", "n": 1, "structure": "builtin_f0", "cheks": []}"#,
    )
    .unwrap();
    let o = accrlab(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cheks"));
}

#[test]
fn unknown_check_fails_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unknown.json");
    std::fs::write(
        &path,
        r#"{"name": "u", "n": 1, "structure": "builtin_f0",
            "points": {"explicit": [[0.1, 0.2, 0.3]]},
            "checks": [{"name": "no_such_check"}]}"#,
    )
    .unwrap();
    let o = accrlab(&["run", path.to_str().unwrap(), "--json", "-"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"][0]["status"], "fail");
    assert!(v["checks"][0]["note"]
        .as_str()
        .unwrap()
        .contains("no_such_check"));
}

#[test]
fn passing_and_failing_scenarios_set_the_exit_code() {
    assert_eq!(
        code(&accrlab(&["run", "builtin:example-4.1-solved-soliton"])),
        0
    );
    // the literal relations fail on the G₀ example; their amended forms pass
    let o = accrlab(&["run", "builtin:example-5.1", "--n", "2", "--json", "-"]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let status = |name: &str| {
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == name)
            .map(|c| c["status"].as_str().unwrap().to_string())
            .unwrap()
    };
    assert_eq!(status("RbarR-F0"), "fail");
    assert_eq!(status("RbarR-F0/amended"), "pass");
}

#[test]
fn tolerance_overrides_apply_by_label_and_operation() {
    let o = accrlab(&[
        "run",
        "builtin:example-5.1",
        "--n",
        "2",
        "--tol",
        "RbarR-F0=10",
        "--tol",
        "scalar_relation_g0=10",
        "--tol",
        "s_tensor_trace=10",
        "--json",
        "-",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let check = |name: &str| {
        v["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == name)
            .unwrap()
            .clone()
    };
    assert_eq!(check("RbarR-F0")["tolerance"].as_f64(), Some(10.0));
    assert_eq!(check("RbarR-F0/amended")["tolerance"].as_f64(), Some(1e-8));
    assert_eq!(check("btt*-G0/amended")["tolerance"].as_f64(), Some(10.0));
    assert_eq!(code(&o), 0);
}

#[test]
fn negative_control_breaks_exactly_the_intended_checks() {
    let o = accrlab(&["verify", "--negative-control", "--json", "-"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = v["reports"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["structure_algebra", "associated_metric"]);
    assert_eq!(
        code(&accrlab(&["run", "builtin:f0-flat", "--negative-control"])),
        0
    );
}

#[test]
fn inverse_flag_round_trips_the_scenario() {
    let o = accrlab(&[
        "run",
        "builtin:property-suite",
        "--n",
        "1",
        "--inverse",
        "--json",
        "-",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["inverse"], true);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn text_output_is_rendered_from_json() {
    let o = accrlab(&["run", "builtin:f0-flat-negative-sigma"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("VACUOUS"));
    assert!(text.contains("[KNp]"));
}

#[test]
fn shipped_scenario_file_passes() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/small-transform.json");
    let o = accrlab(&["run", path]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("3 pass"));
}
