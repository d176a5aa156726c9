use lincon_wasm_demo::{bounds, simulate, simulate_view, solve, synth, MAX_HORIZON};
use serde_json::{json, Value};

const MU: [f64; 3] = [0.1, 0.9, 0.3];
const R: [f64; 3] = [1.0, 0.1, 0.2];

#[test]
fn solve_reports_mixture_and_thresholds() {
    let v: Value = serde_json::from_str(&solve(&MU, &R, 0.5)).unwrap();
    assert_eq!(v["support"], json!([0, 1]));
    assert!((v["objective"].as_f64().unwrap() - 0.095).abs() < 1e-12);
    assert!(v["xi"][0].is_null());
    assert!((v["xi"][2].as_f64().unwrap() - 0.4764705882352941).abs() < 1e-12);
}

#[test]
fn errors_are_json() {
    let v: Value = serde_json::from_str(&solve(&MU, &R, 0.95)).unwrap();
    assert!(v["error"].as_str().unwrap().contains("max mu"));
    let v: Value = serde_json::from_str(&solve(&MU, &R[..2], 0.5)).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn synth_uses_default_eta() {
    let v: Value = serde_json::from_str(&synth("edx", 7, f64::NAN, 2)).unwrap();
    assert_eq!(v["eta"], 0.5);
    assert_eq!(v["mu"].as_array().unwrap().len(), 7);
}

#[test]
fn simulate_returns_both_policies() {
    let v: Value = serde_json::from_str(&simulate(&MU, &R, 0.5, 2000, 2, 1, 0.0)).unwrap();
    let t = v["t"].as_array().unwrap();
    assert_eq!(t.last().unwrap(), 2000);
    let policies = v["policies"].as_array().unwrap();
    assert_eq!(policies.len(), 2);
    assert_eq!(policies[0]["regret"].as_array().unwrap().len(), t.len());
    assert!(simulate_view(&MU, &R, 0.5, MAX_HORIZON + 1, 1, 0, 0.0).is_err());
}

#[test]
fn bounds_match_the_library() {
    let v: Value = serde_json::from_str(&bounds(&MU, &R, 0.5, 1.0, std::f64::consts::E)).unwrap();
    assert!((v["regret_leading"].as_f64().unwrap() - 2.1687293163197146).abs() < 1e-9);
}
