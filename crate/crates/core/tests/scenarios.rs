use catcher_core::harness::{
    run_scenario, summary_json, trace_csv_string, ConfigError, ScenarioConfig, ScenarioId,
    Termination, TRACE_HEADER,
};
use catcher_core::physics::DragMode;
use catcher_core::Vec3;

#[test]
fn noiseless_drag_free_plane_crossing_matches_the_parabola() {
    let mut cfg = ScenarioConfig::bundled(ScenarioId::Planar2d);
    cfg.camera.noise_sigma = 0.0;
    cfg.ball.params.drag_mode = DragMode::None;
    cfg.ball.position = Vec3::new(0.0, 0.3, 1.5);
    cfg.ball.velocity = Vec3::new(7.0, 0.2, 4.0);
    let r = run_scenario(&cfg).unwrap();

    let (p0, v0, g) = (
        cfg.ball.position,
        cfg.ball.velocity,
        cfg.environment.gravity,
    );
    let plane_x = cfg.plane.unwrap().point.x;
    let tc = (plane_x - p0.x) / v0.x;
    let analytic = Vec3::new(
        plane_x,
        p0.y + v0.y * tc,
        p0.z + v0.z * tc - 0.5 * g * tc * tc,
    );

    let last = r
        .records
        .iter()
        .rev()
        .find_map(|x| x.predicted_point)
        .unwrap();
    assert!((last - analytic).norm() < 0.05, "{last:?} vs {analytic:?}");
    assert!(r.final_prediction_error.unwrap() < 0.05);
}

#[test]
fn ball_parallel_to_the_plane_never_crosses() {
    let mut cfg = ScenarioConfig::bundled(ScenarioId::Planar2d);
    cfg.ball.position = Vec3::new(2.0, -1.0, 2.0);
    cfg.ball.velocity = Vec3::new(0.0, 1.0, 2.0);
    let r = run_scenario(&cfg).unwrap();
    assert!(r.records.iter().all(|x| x.predicted_point.is_none()));
    assert_eq!(r.final_prediction_error, None);
    assert!(!r.intercepted);
}

#[test]
fn identical_configs_give_identical_results() {
    for id in ScenarioId::ALL {
        let cfg = ScenarioConfig::bundled(id);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}

#[test]
fn reloaded_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    for id in ScenarioId::ALL {
        let cfg = ScenarioConfig::bundled(id);
        let path = dir.path().join(format!("{id}.json"));
        std::fs::write(&path, cfg.to_json()).unwrap();
        let again = ScenarioConfig::load(&path).unwrap();
        assert_eq!(cfg, again);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&again).unwrap();
        assert_eq!(trace_csv_string(&a.records), trace_csv_string(&b.records));
        assert_eq!(summary_json(&a), summary_json(&b));
    }
}

#[test]
fn trace_has_the_fixed_header_and_one_row_per_tick() {
    let r = run_scenario(&ScenarioConfig::bundled(ScenarioId::D)).unwrap();
    let csv = trace_csv_string(&r.records);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    assert_eq!(lines.count(), r.records.len());
    assert_eq!(r.termination, Termination::Intercepted);
}

#[test]
fn seed_changes_observations_but_not_ground_truth() {
    let mut d = ScenarioConfig::bundled(ScenarioId::D);
    let base = run_scenario(&d).unwrap();
    d.seed = 99;
    let other = run_scenario(&d).unwrap();
    assert_ne!(other.final_prediction_error, base.final_prediction_error);
    for (x, y) in base.records.iter().zip(&other.records) {
        assert_eq!(x.ball_position, y.ball_position);
    }
}

#[test]
fn crippled_vehicle_is_rejected_for_prediction_scenarios() {
    for id in [ScenarioId::D, ScenarioId::E] {
        let mut cfg = ScenarioConfig::bundled(id);
        cfg.uav.limits.max_speed = 0.01;
        match ScenarioConfig::from_json(&cfg.to_json()) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "ball"),
            other => panic!("expected a geometry rejection, got {other:?}"),
        }
    }
}

#[test]
fn missing_and_unknown_fields_are_named() {
    let err = ScenarioConfig::from_json(r#"{"seed": 1}"#)
        .unwrap_err()
        .to_string();
    assert!(err.contains("scenario_id"), "{err}");
    let err = ScenarioConfig::from_json(r#"{"scenario_id": "A", "camera": {"fov": 1.0}}"#)
        .unwrap_err()
        .to_string();
    assert!(err.contains("fov"), "{err}");
}

fn schema() -> serde_json::Value {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../scenarios/schema.json"
    ))
    .unwrap();
    serde_json::from_str(&text).unwrap()
}

// Walks a serialized config alongside the schema: every key must be declared
// and every declared default must match what the loader fills in.
fn check_against_schema(value: &serde_json::Value, schema: &serde_json::Value, path: &str) {
    let Some(obj) = value.as_object() else { return };
    let props = schema["properties"]
        .as_object()
        .unwrap_or_else(|| panic!("{path}: schema has no properties"));
    assert_eq!(schema["additionalProperties"], false, "{path}");
    for (key, v) in obj {
        let sub = props
            .get(key)
            .unwrap_or_else(|| panic!("{path}.{key} missing from schema"));
        // set explicitly in the minimal config below
        let explicit = path == ".planner" && key == "yaw_enabled";
        if let (Some(default), false) = (sub.get("default"), explicit) {
            assert_eq!(default, v, "default of {path}.{key}");
        }
        check_against_schema(v, sub, &format!("{path}.{key}"));
    }
}

#[test]
fn schema_declares_every_field_with_the_loader_defaults() {
    let minimal = r#"{
        "scenario_id": "planar2d",
        "max_sim_time": 1.0,
        "ball": {"position": [0, 0, 1], "velocity": [1, 0, 1]},
        "planner": {"method": "plane_crossing", "yaw_enabled": true},
        "plane": {"point": [3, 0, 0], "normal": [1, 0, 0]}
    }"#;
    let cfg = ScenarioConfig::from_json(minimal).unwrap();
    let value: serde_json::Value = serde_json::from_str(&cfg.to_json()).unwrap();
    let schema = schema();
    check_against_schema(&value, &schema, "");
    // and every schema property is a real field
    fn count(schema: &serde_json::Value) -> usize {
        schema["properties"]
            .as_object()
            .map(|p| p.values().map(|s| 1 + count(s)).sum())
            .unwrap_or(0)
    }
    fn count_value(v: &serde_json::Value) -> usize {
        v.as_object()
            .map(|o| o.values().map(|x| 1 + count_value(x)).sum())
            .unwrap_or(0)
    }
    assert_eq!(count(&schema), count_value(&value));
}

#[test]
fn bundled_configs_only_use_schema_fields() {
    let schema = schema();
    for id in ScenarioId::ALL {
        let path = format!("{}/../../scenarios/{id}.json", env!("CARGO_MANIFEST_DIR"));
        let raw: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let full: serde_json::Value =
            serde_json::from_str(&ScenarioConfig::bundled(id).to_json()).unwrap();
        fn keys_subset(raw: &serde_json::Value, schema: &serde_json::Value) {
            if let Some(o) = raw.as_object() {
                for (k, v) in o {
                    let sub = &schema["properties"][k];
                    assert!(!sub.is_null(), "unknown key {k}");
                    keys_subset(v, sub);
                }
            }
        }
        keys_subset(&raw, &schema);
        keys_subset(&full, &schema);
    }
}
