use serde_json::Value;
use vibrecoil_core::scenarios::{self, ScenarioKind, Setup, SweepParam, SUMMARY_SCHEMA};

fn validate(doc: &Value) {
    let schema: Value = serde_json::from_str(SUMMARY_SCHEMA).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

fn kv(k: &str, v: &str) -> (String, String) {
    (k.into(), v.into())
}

#[test]
fn modes_summary_validates() {
    let s = Setup::new(ScenarioKind::Modes, None, &[]).unwrap();
    let a = scenarios::run(&s, 1).unwrap();
    validate(&a.summary);
    assert_eq!(a.summary["modes"].as_array().unwrap().len(), 3);
}

#[test]
fn run_summary_validates() {
    let over = [kv("basis.n_vib", "3"), kv("scenario.directions", "[\"z\"]")];
    let s = Setup::new(ScenarioKind::SingleDecay, None, &over).unwrap();
    let a = scenarios::run(&s, 1).unwrap();
    validate(&a.summary);
    assert_eq!(a.summary["config_hash"], s.config.hash());
    assert!(a.csv.starts_with("# vibrecoil "));
}

#[test]
fn steady_run_summary_validates() {
    let over = [kv("scenario.rows", "2"), kv("scenario.directions", "[\"x\"]"), kv("basis.n_vib", "2")];
    let s = Setup::new(ScenarioKind::ArraySteady, None, &over).unwrap();
    let a = scenarios::run(&s, 1).unwrap();
    validate(&a.summary);
    assert!(a.summary["headline"]["x"]["energy_per_photon"][0].is_number());
    assert!(a.csv.contains("# laser: rabi = 0.01"));
}

#[test]
fn sweep_summary_with_failed_point_validates() {
    let over = [kv("basis.n_vib", "2"), kv("scenario.directions", "[\"z\"]"), kv("trap.omega_t", "10")];
    let s = Setup::new(ScenarioKind::DecaySweep, None, &over).unwrap();
    let a = scenarios::sweep(&s, SweepParam::Spacing, &[0.5, 0.0], 2).unwrap();
    validate(&a.summary);
    assert_eq!((a.failed_points, a.total_points), (1, 2));
    let points = a.summary["points"].as_array().unwrap();
    assert_eq!(points[0]["value"], 0.0);
    assert_eq!(points[0]["error"]["kind"], "validation");
}

#[test]
fn schema_rejects_missing_fields() {
    let schema: Value = serde_json::from_str(SUMMARY_SCHEMA).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    assert!(!v.is_valid(&serde_json::json!({ "scenario": "modes" })));
}
