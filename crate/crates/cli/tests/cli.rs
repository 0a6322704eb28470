use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn catcher(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catcher"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.json"))
        .display()
        .to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let o = catcher(&[
        "run",
        "--config",
        &scenario("A"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(out.join("A_trace.csv")).unwrap();
    assert!(csv.starts_with(
        "time,ball_x,ball_y,ball_z,obs_x,obs_y,obs_z,pred_x,pred_y,pred_z,pred_err,uav_x,uav_y,uav_z,sp_x,sp_y,sp_z,intercepted\n"
    ));
    let summary = read_json(out.join("A_summary.json"));
    assert_eq!(summary["scenario_id"], "A");
    assert_eq!(summary["intercepted"], true);
    assert!(summary.get("records").is_none());
}

#[test]
fn missed_interception_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = catcher(&[
        "run",
        "--config",
        &scenario("B"),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        read_json(dir.path().join("B_summary.json"))["intercepted"],
        false
    );
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    let o = catcher(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.json"));
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let base = read_json(PathBuf::from(scenario("A")));
    let mut typo = base.clone();
    typo["sead"] = 3.into();
    let mut negative = base.clone();
    negative["camera"] = serde_json::json!({ "frame_rate": -1.0 });
    let mut wrong_type = base.clone();
    wrong_type["physics_dt"] = "fast".into();
    let mut missing = base.clone();
    missing.as_object_mut().unwrap().remove("max_sim_time");
    let cases = [
        (typo, "sead"),
        (negative, "camera.frame_rate"),
        (wrong_type, "physics_dt"),
        (missing, "max_sim_time"),
    ];
    for (i, (cfg, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&path, cfg.to_string()).unwrap();
        let o = catcher(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(2), "{field}");
        assert!(stderr(&o).contains(field), "{field}: {}", stderr(&o));
    }
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let o = catcher(&[
        "run",
        "--config",
        &scenario("A"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn seed_override_changes_only_noisy_quantities() {
    let dir = tempfile::tempdir().unwrap();
    let (d1, d7) = (dir.path().join("s1"), dir.path().join("s7"));
    for (seed, out) in [("1", &d1), ("7", &d7)] {
        let o = catcher(&[
            "run",
            "--config",
            &scenario("D"),
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (a, b) = (
        read_json(d1.join("D_summary.json")),
        read_json(d7.join("D_summary.json")),
    );
    assert_eq!(a["scenario_id"], b["scenario_id"]);
    assert_eq!(a["method"], b["method"]);
    assert_ne!(a["final_prediction_error"], b["final_prediction_error"]);

    // true ball columns agree row by row for as long as both runs last
    let ta = std::fs::read_to_string(d1.join("D_trace.csv")).unwrap();
    let tb = std::fs::read_to_string(d7.join("D_trace.csv")).unwrap();
    for (ra, rb) in ta.lines().zip(tb.lines()) {
        let ca: Vec<&str> = ra.split(',').take(4).collect();
        let cb: Vec<&str> = rb.split(',').take(4).collect();
        assert_eq!(ca, cb);
    }
}

#[test]
fn method_override_and_tilt_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = catcher(&[
        "run",
        "--config",
        &scenario("D"),
        "--method",
        "fastest",
        "--no-tilt-coupling",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        read_json(dir.path().join("D_summary.json"))["method"],
        "fastest_path"
    );

    let o = catcher(&[
        "run",
        "--config",
        &scenario("planar2d"),
        "--method",
        "shortest",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = catcher(&["run", "--config", &scenario("A"), "--method", "quickest"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn suite_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = catcher(&["suite", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let report = std::fs::read(a.join("suite_report.json")).unwrap();
    assert_eq!(report, std::fs::read(b.join("suite_report.json")).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&report).unwrap();
    assert_eq!(json["all_passed"], true);
    assert_eq!(json["scenarios"].as_array().unwrap().len(), 6);
    for id in ["A", "B", "C", "D", "E", "planar2d"] {
        assert!(a.join(format!("{id}_trace.csv")).exists());
        assert!(a.join(format!("{id}_summary.json")).exists());
        assert_eq!(
            std::fs::read(a.join(format!("{id}_trace.csv"))).unwrap(),
            std::fs::read(b.join(format!("{id}_trace.csv"))).unwrap()
        );
    }
}

#[test]
fn suite_with_crippled_vehicle_fails() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    std::fs::create_dir(&configs).unwrap();
    for id in ["D", "E"] {
        let mut cfg = read_json(PathBuf::from(scenario(id)));
        cfg["uav"]["limits"] = serde_json::json!({ "max_speed": 0.01 });
        std::fs::write(configs.join(format!("{id}.json")), cfg.to_string()).unwrap();
    }
    let o = catcher(&[
        "suite",
        "--config",
        configs.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("uav.limits"), "{}", stderr(&o));
}

#[test]
fn suite_reports_failed_expectations_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let configs = dir.path().join("configs");
    std::fs::create_dir(&configs).unwrap();
    // a stationary ball right in front: B's expected loss of view cannot happen
    let mut cfg = read_json(PathBuf::from(scenario("B")));
    cfg["ball"]["velocity"] = serde_json::json!([0.0, 0.0, 0.0]);
    cfg["ball"]["position"] = serde_json::json!([3.0, 0.0, 2.0]);
    std::fs::write(configs.join("B.json"), cfg.to_string()).unwrap();
    let out = dir.path().join("out");
    let o = catcher(&[
        "suite",
        "--config",
        configs.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let report = read_json(out.join("suite_report.json"));
    assert_eq!(report["all_passed"], false);
}
