//! Regret, violation and collected reward of a run.
//!
//! Regret and violation use the expected, count-based form
//!
//! ```text
//! R(t) = [ sum_i (r* - mu_i r_i) k_i(t + 1) ]_+
//! V(t) = [ sum_i (eta - mu_i)    k_i(t + 1) ]_+
//! ```
//!
//! where `k_i(t + 1)` counts plays of arm `i` in rounds `1..=t`. The clamp is
//! applied to the cumulative sum at each reporting point.

use serde::{Deserialize, Serialize};

use crate::env::BanditInstance;
use crate::error::{Error, Result};
use crate::lp::solve_constrained_lp;
use crate::policy::RunTrace;

/// Optimal stationary policy on the true means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryOptimum {
    pub x: Vec<f64>,
    pub r_star: f64,
}

pub fn stationary_optimum(instance: &BanditInstance) -> Result<StationaryOptimum> {
    instance.ensure_feasible()?;
    let sol = solve_constrained_lp(&instance.arms, instance.eta)?;
    Ok(StationaryOptimum {
        x: sol.x,
        r_star: sol.objective,
    })
}

fn check_consistent(trace: &RunTrace, instance: &BanditInstance) -> Result<()> {
    if trace.n_arms != instance.n_arms() {
        return Err(Error::LengthMismatch {
            expected: instance.n_arms(),
            actual: trace.n_arms,
        });
    }
    if let Some(rec) = trace.rounds.iter().find(|r| r.arm >= instance.n_arms()) {
        return Err(Error::IndexOutOfRange {
            index: rec.arm,
            len: instance.n_arms(),
        });
    }
    Ok(())
}

/// Clamped running sum of a per-arm weight over the played arms.
fn clamped_series(trace: &RunTrace, weights: &[f64]) -> Vec<f64> {
    let mut counts = vec![0u64; weights.len()];
    trace
        .rounds
        .iter()
        .map(|rec| {
            counts[rec.arm] += 1;
            let total: f64 = counts.iter().zip(weights).map(|(&k, w)| k as f64 * w).sum();
            total.max(0.0)
        })
        .collect()
}

/// `R(t)` for `t = 1..=T`.
pub fn regret_series(trace: &RunTrace, instance: &BanditInstance) -> Result<Vec<f64>> {
    check_consistent(trace, instance)?;
    let r_star = stationary_optimum(instance)?.r_star;
    let gaps: Vec<f64> = instance.arms.iter().map(|a| r_star - a.value()).collect();
    Ok(clamped_series(trace, &gaps))
}

/// `V(t)` for `t = 1..=T`.
pub fn violation_series(trace: &RunTrace, instance: &BanditInstance) -> Result<Vec<f64>> {
    check_consistent(trace, instance)?;
    let gaps: Vec<f64> = instance.arms.iter().map(|a| instance.eta - a.mu).collect();
    Ok(clamped_series(trace, &gaps))
}

/// Running total of the collected reward `c_t r_{i(t)}`.
pub fn cumulative_reward(trace: &RunTrace) -> Vec<f64> {
    let mut acc = 0.0;
    trace
        .rounds
        .iter()
        .map(|rec| {
            acc += rec.collected_reward;
            acc
        })
        .collect()
}

/// `cum_reward / violation`; `None` wherever the violation is zero.
pub fn reward_violation_ratio(cum_reward: &[f64], violation: &[f64]) -> Result<Vec<Option<f64>>> {
    if cum_reward.len() != violation.len() {
        return Err(Error::LengthMismatch {
            expected: cum_reward.len(),
            actual: violation.len(),
        });
    }
    Ok(cum_reward
        .iter()
        .zip(violation)
        .map(|(&c, &v)| (v > 0.0).then(|| c / v))
        .collect())
}

/// Roughly `points` logarithmically spaced rounds in `1..=horizon`,
/// always including both ends.
pub fn log_grid(horizon: u64, points: usize) -> Vec<u64> {
    if horizon == 0 {
        return Vec::new();
    }
    let points = points.max(2);
    let top = (horizon as f64).ln();
    let mut grid: Vec<u64> = (0..points)
        .map(|j| {
            let t = (top * j as f64 / (points - 1) as f64).exp().round() as u64;
            t.clamp(1, horizon)
        })
        .collect();
    grid.push(horizon);
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Metrics of one run sampled on a grid of rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub t_grid: Vec<u64>,
    pub regret: Vec<f64>,
    pub violation: Vec<f64>,
    pub cum_reward: Vec<f64>,
    /// `None` where the violation is zero.
    pub ratio: Vec<Option<f64>>,
}

impl MetricSeries {
    pub fn from_trace(trace: &RunTrace, instance: &BanditInstance, grid: &[u64]) -> Result<Self> {
        let horizon = trace.horizon() as u64;
        if let Some(&t) = grid.iter().find(|&&t| t == 0 || t > horizon) {
            return Err(Error::invalid(format!(
                "grid point {t} outside 1..={horizon}"
            )));
        }
        let regret = regret_series(trace, instance)?;
        let violation = violation_series(trace, instance)?;
        let cum = cumulative_reward(trace);
        let pick = |v: &[f64]| grid.iter().map(|&t| v[t as usize - 1]).collect::<Vec<_>>();
        let (regret, violation, cum_reward) = (pick(&regret), pick(&violation), pick(&cum));
        let ratio = reward_violation_ratio(&cum_reward, &violation)?;
        Ok(MetricSeries {
            t_grid: grid.to_vec(),
            regret,
            violation,
            cum_reward,
            ratio,
        })
    }
}

/// Pointwise mean and sample standard deviation across runs.
///
/// The ratio statistics only use runs where the ratio is defined at that
/// round; they are `None` when no run defines it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateSeries {
    pub t_grid: Vec<u64>,
    pub runs: usize,
    pub regret_mean: Vec<f64>,
    pub regret_std: Vec<f64>,
    pub violation_mean: Vec<f64>,
    pub violation_std: Vec<f64>,
    pub cum_reward_mean: Vec<f64>,
    pub cum_reward_std: Vec<f64>,
    pub ratio_mean: Vec<Option<f64>>,
    pub ratio_std: Vec<Option<f64>>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn aggregate_runs(series: &[MetricSeries]) -> Result<AggregateSeries> {
    let first = series
        .first()
        .ok_or_else(|| Error::invalid("no series to aggregate"))?;
    if let Some(bad) = series.iter().find(|s| s.t_grid != first.t_grid) {
        return Err(Error::LengthMismatch {
            expected: first.t_grid.len(),
            actual: bad.t_grid.len(),
        });
    }
    let len = first.t_grid.len();
    let column = |f: &dyn Fn(&MetricSeries) -> &Vec<f64>| -> (Vec<f64>, Vec<f64>) {
        (0..len)
            .map(|j| mean_std(&series.iter().map(|s| f(s)[j]).collect::<Vec<_>>()))
            .unzip()
    };
    let (regret_mean, regret_std) = column(&|s| &s.regret);
    let (violation_mean, violation_std) = column(&|s| &s.violation);
    let (cum_reward_mean, cum_reward_std) = column(&|s| &s.cum_reward);
    let (ratio_mean, ratio_std) = (0..len)
        .map(|j| {
            let defined: Vec<f64> = series.iter().filter_map(|s| s.ratio[j]).collect();
            if defined.is_empty() {
                (None, None)
            } else {
                let (m, sd) = mean_std(&defined);
                (Some(m), Some(sd))
            }
        })
        .unzip();
    Ok(AggregateSeries {
        t_grid: first.t_grid.clone(),
        runs: series.len(),
        regret_mean,
        regret_std,
        violation_mean,
        violation_std,
        cum_reward_mean,
        cum_reward_std,
        ratio_mean,
        ratio_std,
    })
}
