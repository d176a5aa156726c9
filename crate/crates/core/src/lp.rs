//! The per-round linear program and its dual.
//!
//! ```text
//! maximize   sum_i x_i mu_i r_i
//! subject to sum_i x_i mu_i >= eta
//!            sum_i x_i       = 1
//!            x_i >= 0
//! ```
//!
//! With only two structural constraints every basic solution has at most two
//! nonzero entries, so the optimum is found exactly by enumerating single-arm
//! solutions (`mu_i >= eta`) and two-arm mixtures straddling `eta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for equality constraints and dual sign checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Reward-event mean `mu` and deterministic reward value `r` of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmParams {
    pub mu: f64,
    pub r: f64,
}

impl ArmParams {
    pub fn new(mu: f64, r: f64) -> Result<Self> {
        let arm = ArmParams { mu, r };
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::invalid(format!("mu = {} outside [0, 1]", self.mu)));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::invalid(format!("r = {} outside (0, 1]", self.r)));
        }
        Ok(())
    }

    /// Expected reward per play, `mu * r`.
    #[inline]
    pub fn value(&self) -> f64 {
        self.mu * self.r
    }
}

/// Tolerances for [`solve_constrained_lp_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Entries with `x_i > support_tol` form the support.
    pub support_tol: f64,
    /// A later basis must beat the incumbent by more than this to replace it.
    pub tie_tol: f64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            support_tol: 0.0,
            tie_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    /// Selection probabilities, one per arm. All zero when infeasible.
    pub x: Vec<f64>,
    /// Expected reward per round under `x`.
    pub objective: f64,
    /// Arms with positive selection probability, ascending.
    pub support: Vec<usize>,
    pub feasible: bool,
}

impl LpSolution {
    fn infeasible(n: usize) -> Self {
        LpSolution {
            x: vec![0.0; n],
            objective: 0.0,
            support: Vec::new(),
            feasible: false,
        }
    }

    /// `sum_i x_i mu_i` for the given arms.
    pub fn event_rate(&self, arms: &[ArmParams]) -> f64 {
        self.x.iter().zip(arms).map(|(x, a)| x * a.mu).sum()
    }
}

/// Lagrange multipliers of the constraint row (`lambda`), the simplex row
/// (`nu`) and the nonnegativity constraints (`psi`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub lambda: f64,
    pub nu: f64,
    pub psi: Vec<f64>,
}

impl DualCertificate {
    /// Dual objective `nu - lambda * eta`.
    pub fn dual_objective(&self, eta: f64) -> f64 {
        self.nu - self.lambda * eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Basis {
    Single(usize),
    /// `(low, high, x_low)`: `mu_low < eta <= mu_high`, `x_high = 1 - x_low`.
    Pair(usize, usize, f64),
}

pub(crate) fn validate_problem(arms: &[ArmParams], eta: f64) -> Result<()> {
    if arms.is_empty() {
        return Err(Error::NoArms);
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta = {eta} outside [0, 1]")));
    }
    for (i, arm) in arms.iter().enumerate() {
        arm.validate()
            .map_err(|e| Error::invalid(format!("arm {i}: {e}")))?;
    }
    Ok(())
}

/// Solves the constrained LP with default tolerances.
pub fn solve_constrained_lp(arms: &[ArmParams], eta: f64) -> Result<LpSolution> {
    solve_constrained_lp_with(arms, eta, &LpOptions::default())
}

/// Solves the constrained LP by basic-solution enumeration.
///
/// Ties are broken towards smaller support, then towards the
/// lexicographically smallest index pair.
pub fn solve_constrained_lp_with(
    arms: &[ArmParams],
    eta: f64,
    opts: &LpOptions,
) -> Result<LpSolution> {
    validate_problem(arms, eta)?;
    let n = arms.len();
    let Some(basis) = best_basis(arms, eta, opts.tie_tol) else {
        return Ok(LpSolution::infeasible(n));
    };

    let mut x = vec![0.0; n];
    match basis {
        Basis::Single(i) => x[i] = 1.0,
        Basis::Pair(lo, hi, x_lo) => {
            x[lo] = x_lo;
            x[hi] = 1.0 - x_lo;
        }
    }
    let objective = x.iter().zip(arms).map(|(x, a)| x * a.value()).sum();
    let support = (0..n).filter(|&i| x[i] > opts.support_tol).collect();
    Ok(LpSolution {
        x,
        objective,
        support,
        feasible: true,
    })
}

fn best_basis(arms: &[ArmParams], eta: f64, tie_tol: f64) -> Option<Basis> {
    let mut best: Option<(Basis, f64)> = None;
    let mut consider = |basis: Basis, value: f64| match best {
        Some((_, incumbent)) if value <= incumbent + tie_tol => {}
        _ => best = Some((basis, value)),
    };

    for (i, arm) in arms.iter().enumerate() {
        if arm.mu >= eta {
            consider(Basis::Single(i), arm.value());
        }
    }
    for a in 0..arms.len() {
        for b in (a + 1)..arms.len() {
            let (lo, hi) = if arms[a].mu < eta && eta <= arms[b].mu {
                (a, b)
            } else if arms[b].mu < eta && eta <= arms[a].mu {
                (b, a)
            } else {
                continue;
            };
            let (l, h) = (&arms[lo], &arms[hi]);
            let x_lo = (h.mu - eta) / (h.mu - l.mu);
            let value = x_lo * l.value() + (1.0 - x_lo) * h.value();
            consider(Basis::Pair(lo, hi, x_lo), value);
        }
    }
    best.map(|(basis, _)| basis)
}

/// Optimal multipliers for an optimal solution with support of size 1 or 2.
pub fn compute_dual_certificate(
    arms: &[ArmParams],
    eta: f64,
    solution: &LpSolution,
) -> Result<DualCertificate> {
    validate_problem(arms, eta)?;
    if !solution.feasible {
        return Err(Error::domain(
            "dual certificate requested for an infeasible LP",
        ));
    }
    if solution.x.len() != arms.len() {
        return Err(Error::LengthMismatch {
            expected: arms.len(),
            actual: solution.x.len(),
        });
    }

    let (lambda, nu) = match *solution.support.as_slice() {
        [a, b] => {
            let (a, b) = if arms[a].mu <= arms[b].mu {
                (a, b)
            } else {
                (b, a)
            };
            let (pa, pb) = (arms[a], arms[b]);
            if pa.mu == pb.mu {
                return Err(Error::Degenerate(format!(
                    "support arms {a} and {b} share mu = {}",
                    pa.mu
                )));
            }
            let gap = pb.mu - pa.mu;
            let lambda = (pa.value() - pb.value()) / gap;
            let nu = (pa.r - pb.r) * pa.mu * pb.mu / gap;
            (lambda, nu)
        }
        [s] => {
            let ps = arms[s];
            // Tight singleton: smallest lambda >= 0 keeping every psi_i >= 0
            // for arms below the threshold.
            let lambda = if ps.mu > eta {
                0.0
            } else {
                arms.iter()
                    .filter(|a| a.mu < eta)
                    .map(|a| (a.value() - ps.value()) / (eta - a.mu))
                    .fold(0.0, f64::max)
            };
            (lambda, ps.value() + lambda * ps.mu)
        }
        _ => {
            return Err(Error::Degenerate(format!(
                "support of size {} (expected 1 or 2)",
                solution.support.len()
            )))
        }
    };

    let psi = arms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if solution.support.contains(&i) {
                0.0
            } else {
                nu - a.mu * (a.r + lambda)
            }
        })
        .collect();
    Ok(DualCertificate { lambda, nu, psi })
}

/// Largest mean `xi_i = nu / (r_i + lambda)` that keeps the suboptimal arm
/// `arm` out of the optimal support.
pub fn slack_threshold(arm: usize, arms: &[ArmParams], duals: &DualCertificate) -> Result<f64> {
    let params = arms.get(arm).ok_or(Error::IndexOutOfRange {
        index: arm,
        len: arms.len(),
    })?;
    let psi = duals.psi.get(arm).copied().ok_or(Error::LengthMismatch {
        expected: arms.len(),
        actual: duals.psi.len(),
    })?;
    if psi <= DEFAULT_TOL {
        return Err(Error::domain(format!(
            "arm {arm} has psi = {psi:e} and is not strictly suboptimal"
        )));
    }
    Ok(duals.nu / (params.r + duals.lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KktCondition {
    PrimalFeasibility,
    DualFeasibility,
    Stationarity,
    ComplementarySlackness,
    DualityGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktCheck {
    pub condition: KktCondition,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub checks: Vec<KktCheck>,
}

impl KktReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, condition: KktCondition) -> Option<&KktCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn passed(&self, condition: KktCondition) -> bool {
        self.get(condition).is_some_and(|c| c.passed)
    }
}

/// Checks a primal/dual pair against the KKT conditions. Failures are
/// reported per condition, never raised.
pub fn verify_kkt(
    arms: &[ArmParams],
    eta: f64,
    solution: &LpSolution,
    duals: &DualCertificate,
    tol: f64,
) -> KktReport {
    let x = &solution.x;
    let sum_x: f64 = x.iter().sum();
    let rate: f64 = x.iter().zip(arms).map(|(x, a)| x * a.mu).sum();
    let objective: f64 = x.iter().zip(arms).map(|(x, a)| x * a.value()).sum();
    let psi = |i: usize| duals.psi.get(i).copied().unwrap_or(f64::NAN);

    let shape_ok = x.len() == arms.len() && duals.psi.len() == arms.len();
    let worst = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0_f64, |m, v| m.max(v));

    let primal = (sum_x - 1.0)
        .abs()
        .max(eta - rate)
        .max(worst(&mut x.iter().map(|&v| -v)));
    let dual = (-duals.lambda).max(worst(&mut (0..arms.len()).map(|i| -psi(i))));
    let stationarity = worst(
        &mut arms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.value() + duals.lambda * a.mu - duals.nu + psi(i)).abs()),
    );
    let slackness =
        worst(&mut (0..arms.len()).map(|i| (x.get(i).copied().unwrap_or(0.0) * psi(i)).abs()))
            .max((duals.lambda * (eta - rate)).abs());
    let gap = (objective - duals.dual_objective(eta)).abs();

    let check = |condition, residual: f64| {
        let residual = if shape_ok {
            residual.max(0.0)
        } else {
            f64::INFINITY
        };
        KktCheck {
            condition,
            residual,
            passed: residual <= tol,
        }
    };
    KktReport {
        checks: vec![
            check(KktCondition::PrimalFeasibility, primal),
            check(KktCondition::DualFeasibility, dual),
            check(KktCondition::Stationarity, stationarity),
            check(KktCondition::ComplementarySlackness, slackness),
            check(KktCondition::DualityGap, gap),
        ],
    }
}
