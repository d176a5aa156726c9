//! Browser bindings for the interactive demo in `www/`.
//!
//! Every export takes plain numbers or typed arrays and returns a JSON
//! string. Failures come back as `{"error": "..."}` so the page can show
//! them inline.

use lincon::env::{synth_instance, BanditInstance, SynthKind};
use lincon::lp::{compute_dual_certificate, slack_threshold, solve_constrained_lp};
use lincon::metrics::{aggregate_runs, log_grid, MetricSeries};
use lincon::policy::{run_policy, PolicyKind};
use lincon::rng::seeded;
use lincon::theory::theorem_bounds;
use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Upper limits that keep a single call responsive in a browser tab.
pub const MAX_ARMS: usize = 200;
pub const MAX_HORIZON: u64 = 200_000;
pub const MAX_RUNS: u32 = 32;

fn instance(mus: &[f64], rs: &[f64], eta: f64) -> Result<BanditInstance, String> {
    if mus.len() != rs.len() {
        return Err(format!("{} means but {} rewards", mus.len(), rs.len()));
    }
    if mus.len() > MAX_ARMS {
        return Err(format!("at most {MAX_ARMS} arms"));
    }
    let pairs: Vec<(f64, f64)> = mus.iter().copied().zip(rs.iter().copied()).collect();
    BanditInstance::from_pairs("demo", &pairs, eta).map_err(|e| e.to_string())
}

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

#[derive(Serialize)]
struct LpView {
    x: Vec<f64>,
    objective: f64,
    support: Vec<usize>,
    lambda: Option<f64>,
    nu: Option<f64>,
    psi: Vec<f64>,
    /// Slack thresholds; `None` on the support or when undefined.
    xi: Vec<Option<f64>>,
}

pub fn solve_view(mus: &[f64], rs: &[f64], eta: f64) -> Result<Value, String> {
    let inst = instance(mus, rs, eta)?;
    inst.ensure_feasible().map_err(|e| e.to_string())?;
    let sol = solve_constrained_lp(&inst.arms, eta).map_err(|e| e.to_string())?;
    let duals = compute_dual_certificate(&inst.arms, eta, &sol).ok();
    let xi = match &duals {
        Some(d) => (0..inst.n_arms())
            .map(|i| {
                if sol.x[i] > 0.0 {
                    None
                } else {
                    slack_threshold(i, &inst.arms, d).ok()
                }
            })
            .collect(),
        None => vec![None; inst.n_arms()],
    };
    let view = LpView {
        x: sol.x.clone(),
        objective: sol.objective,
        support: sol.support.clone(),
        lambda: duals.as_ref().map(|d| d.lambda),
        nu: duals.as_ref().map(|d| d.nu),
        psi: duals.map(|d| d.psi).unwrap_or_default(),
        xi,
    };
    serde_json::to_value(view).map_err(|e| e.to_string())
}

pub fn synth_view(kind: &str, n: usize, eta: f64, seed: u64) -> Result<Value, String> {
    let kind: SynthKind = kind.parse().map_err(|e: lincon::Error| e.to_string())?;
    if n > MAX_ARMS {
        return Err(format!("at most {MAX_ARMS} arms"));
    }
    let eta = if eta.is_nan() {
        kind.default_eta()
    } else {
        eta
    };
    let inst = synth_instance(kind, n, eta, &mut seeded(seed)).map_err(|e| e.to_string())?;
    let (mus, rs): (Vec<f64>, Vec<f64>) = inst.arms.iter().map(|a| (a.mu, a.r)).unzip();
    Ok(json!({ "mu": mus, "r": rs, "eta": inst.eta }))
}

pub fn bounds_view(
    mus: &[f64],
    rs: &[f64],
    eta: f64,
    gamma: f64,
    horizon: f64,
) -> Result<Value, String> {
    let inst = instance(mus, rs, eta)?;
    let report = theorem_bounds(&inst, gamma, horizon).map_err(|e| e.to_string())?;
    serde_json::to_value(report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curves {
    name: &'static str,
    regret: Vec<f64>,
    regret_std: Vec<f64>,
    violation: Vec<f64>,
    violation_std: Vec<f64>,
}

pub fn simulate_view(
    mus: &[f64],
    rs: &[f64],
    eta: f64,
    horizon: u64,
    runs: u32,
    seed: u64,
    klucb_c: f64,
) -> Result<Value, String> {
    let inst = instance(mus, rs, eta)?;
    inst.ensure_feasible().map_err(|e| e.to_string())?;
    if horizon > MAX_HORIZON {
        return Err(format!("horizon is capped at {MAX_HORIZON} in the browser"));
    }
    if runs == 0 || runs > MAX_RUNS {
        return Err(format!("runs must be in 1..={MAX_RUNS}"));
    }
    let grid = log_grid(horizon, 120);
    let mut curves = Vec::new();
    for policy in [PolicyKind::LinConTs, PolicyKind::LinConKlUcb { c: klucb_c }] {
        let series = (0..runs as u64)
            .map(|r| {
                let trace = run_policy(policy, &inst, horizon, seed.wrapping_add(r))?;
                MetricSeries::from_trace(&trace, &inst, &grid)
            })
            .collect::<lincon::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let agg = aggregate_runs(&series).map_err(|e| e.to_string())?;
        curves.push(Curves {
            name: policy.name(),
            regret: agg.regret_mean,
            regret_std: agg.regret_std,
            violation: agg.violation_mean,
            violation_std: agg.violation_std,
        });
    }
    Ok(json!({ "t": grid, "policies": curves }))
}

/// Optimal selection, duals and slack thresholds.
#[wasm_bindgen]
pub fn solve(mus: &[f64], rs: &[f64], eta: f64) -> String {
    respond(solve_view(mus, rs, eta))
}

/// Synthetic instance of the given kind; pass `NaN` for the default eta.
#[wasm_bindgen]
pub fn synth(kind: &str, n: usize, eta: f64, seed: u32) -> String {
    respond(synth_view(kind, n, eta, seed as u64))
}

/// Explicit bound terms at `(gamma, horizon)`.
#[wasm_bindgen]
pub fn bounds(mus: &[f64], rs: &[f64], eta: f64, gamma: f64, horizon: f64) -> String {
    respond(bounds_view(mus, rs, eta, gamma, horizon))
}

/// Mean regret and violation curves of both policies over `runs` seeds.
#[wasm_bindgen]
pub fn simulate(
    mus: &[f64],
    rs: &[f64],
    eta: f64,
    horizon: u32,
    runs: u32,
    seed: u32,
    klucb_c: f64,
) -> String {
    respond(simulate_view(
        mus,
        rs,
        eta,
        horizon as u64,
        runs,
        seed as u64,
        klucb_c,
    ))
}
