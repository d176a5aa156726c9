//! Explicit terms of the LinConTS regret and violation upper bounds.
//!
//! For each suboptimal arm `i` (zero mass in the stationary optimum) with
//! slack threshold `xi_i`, thresholds `mu_i < y_i < z_i < xi_i` are chosen so
//! that `d(y_i, xi_i) = d(mu_i, xi_i) / (1 + gamma)` and
//! `d(y_i, z_i) = d(mu_i, xi_i) / (1 + gamma)^2`. The leading terms are
//!
//! ```text
//! regret    <= [sum_i (1+gamma)^2 / d(mu_i, xi_i) * Delta_i^+] log T
//!              + Delta^+_max * 18 sqrt(2 T log 2) + O(N / gamma^2)
//! violation <= [sum_i (1+gamma)^2 / d(mu_i, xi_i) * delta_i^+] log T
//!              + delta^+_max * 18 sqrt(2 T log 2) + O(N / gamma^2)
//! ```
//!
//! The `O(.)` remainders have no stated constants and are only reported
//! symbolically.
//!
//! Arm labels follow the support: the "low" support arm has `mu < eta`
//! (higher expected reward), the "high" support arm has `mu > eta`.

use serde::{Deserialize, Serialize};

use crate::env::BanditInstance;
use crate::error::{Error, Result};
use crate::lp::{
    compute_dual_certificate, slack_threshold, solve_constrained_lp, DualCertificate, LpSolution,
    DEFAULT_TOL,
};

/// Symbolic remainder shared by both theorems.
pub const REMAINDER: &str = "O(N/gamma^2)";

/// Symbolic tail of the per-arm play bound.
pub const LEMMA2_TAIL: &str =
    "(1/eps1) * sum_{j<T} O(exp(-Delta'^2 j/2) + exp(-D j)/((j+1) Delta'^2) + 1/(exp(Delta'^2 j/4) - 1))";

/// Bernoulli KL divergence `d(p, q)`, with `0 log 0 = 0`.
///
/// Infinite when `q` is 0 or 1 and `p` differs from it.
pub fn bernoulli_kl(p: f64, q: f64) -> f64 {
    fn term(a: f64, b: f64) -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    }
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Bisects a monotone function on `(lo, hi)` for the point where it crosses
/// `target`. `increasing` gives the direction of monotonicity.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64, increasing: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = f(mid) > target;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Thresholds `(y, z)` with `mu < y < z < xi`.
pub fn choose_thresholds(mu: f64, xi: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&mu) || !(xi > mu && xi < 1.0) {
        return Err(Error::domain(format!(
            "thresholds need 0 <= mu < xi < 1 (mu = {mu}, xi = {xi})"
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!("gamma = {gamma} outside (0, 1]")));
    }
    let base = bernoulli_kl(mu, xi);
    let target_y = base / (1.0 + gamma);
    let target_z = base / (1.0 + gamma).powi(2);

    // d(y, xi) decreases in y on (0, xi); d(y, z) increases in z on (y, 1).
    let y = bisect(|y| bernoulli_kl(y, xi), target_y, mu, xi, false);
    let z = bisect(|z| bernoulli_kl(y, z), target_z, y, xi, true);
    if !(mu < y && y < z && z < xi) {
        return Err(Error::domain(format!(
            "no interior threshold found (mu = {mu}, y = {y}, z = {z}, xi = {xi})"
        )));
    }
    Ok((y, z))
}

/// Unvalidated `kappa_j = z_i (r_i - lambda) / (r_j - lambda)`, `kappa_i = z_i`.
fn kappa_raw(z_i: f64, rewards: &[f64], lambda: f64, i: usize) -> Vec<f64> {
    rewards
        .iter()
        .enumerate()
        .map(|(j, &r_j)| {
            if j == i {
                z_i
            } else {
                z_i * (rewards[i] - lambda) / (r_j - lambda)
            }
        })
        .collect()
}

/// Points `kappa_j` such that the line through `(z_i, z_i r_i)` and
/// `(kappa_j, kappa_j r_j)` has slope `lambda`.
pub fn kappa_vector(z_i: f64, rewards: &[f64], lambda: f64, i: usize) -> Result<Vec<f64>> {
    if i >= rewards.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: rewards.len(),
        });
    }
    let kappa = kappa_raw(z_i, rewards, lambda, i);
    for (j, (&k, &r_j)) in kappa.iter().zip(rewards).enumerate() {
        if j != i && r_j == lambda {
            return Err(Error::ThresholdOutOfRange {
                arm: j,
                reason: format!("r_{j} equals lambda = {lambda}"),
            });
        }
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::ThresholdOutOfRange {
                arm: j,
                reason: format!("kappa = {k} outside (0, 1)"),
            });
        }
    }
    Ok(kappa)
}

/// `eps_1 = (kappa_2 - eta) / (kappa_2 - kappa_1)`.
pub fn epsilon_one(kappa1: f64, kappa2: f64, eta: f64) -> Result<f64> {
    if !(kappa2 > eta) {
        return Err(Error::domain(format!(
            "kappa_2 = {kappa2} must exceed eta = {eta}"
        )));
    }
    if !(kappa2 > kappa1) {
        return Err(Error::domain(format!(
            "kappa_2 = {kappa2} must exceed kappa_1 = {kappa1}"
        )));
    }
    Ok((kappa2 - eta) / (kappa2 - kappa1))
}

/// Threshold quantities of one suboptimal arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmAnalysis {
    pub arm: usize,
    pub mu: f64,
    pub xi: f64,
    /// `d(mu_i, xi_i)`.
    pub kl_mu_xi: f64,
    pub y: f64,
    pub z: f64,
    /// `L_i(T) = log T / d(y_i, z_i)`.
    pub l_t: f64,
    pub kappa: Vec<f64>,
    pub epsilon1: Option<f64>,
    /// `Delta'_i = mu_low - kappa_low`.
    pub delta_prime: Option<f64>,
    /// `D_i = d(z_i, mu_low)`.
    pub d_term: f64,
    pub delta_plus: f64,
    pub small_delta_plus: f64,
    /// Why the per-arm play bound is vacuous, if it is.
    pub vacuous: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub horizon: f64,
    pub r_star: f64,
    pub regret_leading: f64,
    pub regret_sqrt: f64,
    pub violation_leading: f64,
    pub violation_sqrt: f64,
    pub remainder: String,
    pub arms: Vec<ArmAnalysis>,
}

/// LP, duals and the support split for a feasible, nondegenerate instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalStructure {
    pub solution: LpSolution,
    pub duals: DualCertificate,
    /// Support arm with `mu < eta`, if the support has two arms.
    pub low: Option<usize>,
    /// Support arm with the largest `mu`.
    pub high: usize,
    pub suboptimal: Vec<usize>,
    /// `xi_i` per arm; `None` on the support.
    pub xi: Vec<Option<f64>>,
}

pub fn optimal_structure(instance: &BanditInstance) -> Result<OptimalStructure> {
    instance.ensure_feasible()?;
    let arms = &instance.arms;
    let solution = solve_constrained_lp(arms, instance.eta)?;
    let duals = compute_dual_certificate(arms, instance.eta, &solution)?;
    let suboptimal: Vec<usize> = (0..arms.len())
        .filter(|i| !solution.support.contains(i))
        .collect();
    if let Some(&i) = suboptimal.iter().find(|&&i| duals.psi[i] <= DEFAULT_TOL) {
        return Err(Error::Degenerate(format!(
            "arm {i} is off the support with psi = {:e}; the optimum is not unique",
            duals.psi[i]
        )));
    }
    let (low, high) = match *solution.support.as_slice() {
        [a, b] if arms[a].mu < arms[b].mu => (Some(a), b),
        [a, b] => (Some(b), a),
        [s] => (None, s),
        _ => unreachable!("dual certificate accepts supports of size 1 or 2 only"),
    };
    let xi = (0..arms.len())
        .map(|i| {
            if solution.support.contains(&i) {
                Ok(None)
            } else {
                slack_threshold(i, arms, &duals).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OptimalStructure {
        solution,
        duals,
        low,
        high,
        suboptimal,
        xi,
    })
}

fn analyze_arm(
    instance: &BanditInstance,
    structure: &OptimalStructure,
    r_star: f64,
    arm: usize,
    gamma: f64,
    horizon: f64,
) -> Result<ArmAnalysis> {
    let params = instance.arms[arm];
    let xi =
        structure.xi[arm].ok_or_else(|| Error::domain(format!("arm {arm} is on the support")))?;
    // xi >= 1 makes d(mu, xi) infinite: the arm cannot enter the support.
    let kl_mu_xi = bernoulli_kl(params.mu, xi.min(1.0));
    let mut vacuous = None;

    let (y, z) = if xi < 1.0 {
        choose_thresholds(params.mu, xi, gamma)?
    } else {
        vacuous = Some(format!("xi = {xi} >= 1"));
        (f64::NAN, f64::NAN)
    };
    let l_t = horizon.ln() / bernoulli_kl(y, z);

    let rewards = instance.rewards();
    let kappa = kappa_raw(z, &rewards, structure.duals.lambda, arm);
    let (epsilon1, delta_prime, d_term) = match structure.low {
        Some(low) => {
            let mu_low = instance.arms[low].mu;
            let eps = epsilon_one(kappa[low], kappa[structure.high], instance.eta);
            if let Err(e) = &eps {
                vacuous.get_or_insert_with(|| e.to_string());
            }
            if let Err(e) = kappa_vector(z, &rewards, structure.duals.lambda, arm) {
                vacuous.get_or_insert_with(|| e.to_string());
            }
            let dp = mu_low - kappa[low];
            if !(dp > 0.0) {
                vacuous.get_or_insert_with(|| format!("Delta' = {dp} <= 0"));
            }
            (eps.ok(), Some(dp), bernoulli_kl(z, mu_low))
        }
        None => {
            vacuous.get_or_insert_with(|| "single-arm support".to_owned());
            (None, None, f64::NAN)
        }
    };

    Ok(ArmAnalysis {
        arm,
        mu: params.mu,
        xi,
        kl_mu_xi,
        y,
        z,
        l_t,
        kappa,
        epsilon1,
        delta_prime,
        d_term,
        delta_plus: (r_star - params.value()).max(0.0),
        small_delta_plus: (instance.eta - params.mu).max(0.0),
        vacuous,
    })
}

fn check_bound_args(gamma: f64, horizon: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::domain(format!("gamma = {gamma} outside (0, 1]")));
    }
    if !(horizon >= 1.0) || !horizon.is_finite() {
        return Err(Error::domain(format!("horizon = {horizon} must be >= 1")));
    }
    Ok(())
}

/// `18 sqrt(2 T log 2)`, the per-unit-gap cost of the optimal arms.
pub fn optimal_arm_term(horizon: f64) -> f64 {
    18.0 * (2.0 * horizon * std::f64::consts::LN_2).sqrt()
}

/// Evaluates the explicit regret and violation bound terms.
///
/// Per-arm threshold failures are flagged in [`ArmAnalysis::vacuous`]; they
/// do not affect the leading terms.
pub fn theorem_bounds(instance: &BanditInstance, gamma: f64, horizon: f64) -> Result<BoundReport> {
    check_bound_args(gamma, horizon)?;
    let structure = optimal_structure(instance)?;
    let r_star = structure.solution.objective;
    let log_t = horizon.ln();
    let scale = (1.0 + gamma).powi(2);

    let arms = structure
        .suboptimal
        .iter()
        .map(|&i| analyze_arm(instance, &structure, r_star, i, gamma, horizon))
        .collect::<Result<Vec<_>>>()?;
    let regret_coef: f64 = arms.iter().map(|a| scale / a.kl_mu_xi * a.delta_plus).sum();
    let violation_coef: f64 = arms
        .iter()
        .map(|a| scale / a.kl_mu_xi * a.small_delta_plus)
        .sum();

    let delta_plus_max = instance
        .arms
        .iter()
        .map(|a| (r_star - a.value()).max(0.0))
        .fold(0.0, f64::max);
    let small_delta_plus_max = instance
        .arms
        .iter()
        .map(|a| (instance.eta - a.mu).max(0.0))
        .fold(0.0, f64::max);
    let sqrt_term = optimal_arm_term(horizon);

    Ok(BoundReport {
        gamma,
        horizon,
        r_star,
        regret_leading: regret_coef * log_t,
        regret_sqrt: delta_plus_max * sqrt_term,
        violation_leading: violation_coef * log_t,
        violation_sqrt: small_delta_plus_max * sqrt_term,
        remainder: REMAINDER.to_owned(),
        arms,
    })
}

/// Explicit part of the per-arm play bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Bound {
    pub value: f64,
    pub l_t: f64,
    pub inv_kl_y_xi: f64,
    pub concentration: f64,
    /// The omitted tail sum, symbolic.
    pub tail: String,
}

/// `2 + L_i(T) + 1/d(y_i, xi_i) + 24 / (eps_1 Delta'^2)` for suboptimal `arm`.
pub fn lemma2_bound(
    instance: &BanditInstance,
    arm: usize,
    gamma: f64,
    horizon: f64,
) -> Result<Lemma2Bound> {
    check_bound_args(gamma, horizon)?;
    if arm >= instance.n_arms() {
        return Err(Error::IndexOutOfRange {
            index: arm,
            len: instance.n_arms(),
        });
    }
    let structure = optimal_structure(instance)?;
    if structure.xi[arm].is_none() {
        return Err(Error::domain(format!(
            "arm {arm} is on the optimal support"
        )));
    }
    let analysis = analyze_arm(
        instance,
        &structure,
        structure.solution.objective,
        arm,
        gamma,
        horizon,
    )?;
    let threshold_err = |reason: String| Error::ThresholdOutOfRange { arm, reason };
    if let Some(reason) = &analysis.vacuous {
        return Err(threshold_err(reason.clone()));
    }
    let eps = analysis
        .epsilon1
        .ok_or_else(|| threshold_err("eps_1 undefined".into()))?;
    let dp = analysis
        .delta_prime
        .ok_or_else(|| threshold_err("Delta' undefined".into()))?;

    let inv_kl_y_xi = 1.0 / bernoulli_kl(analysis.y, analysis.xi);
    let concentration = 24.0 / (eps * dp * dp);
    Ok(Lemma2Bound {
        value: 2.0 + analysis.l_t + inv_kl_y_xi + concentration,
        l_t: analysis.l_t,
        inv_kl_y_xi,
        concentration,
        tail: LEMMA2_TAIL.to_owned(),
    })
}
