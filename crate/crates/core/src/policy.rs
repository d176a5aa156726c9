//! LinConTS and LinCon-KL-UCB.
//!
//! Both policies share the same round structure: for `t < N` arm `t - 1` is
//! played unconditionally (arm `N - 1` is never force-played). Afterwards a
//! per-arm mean estimate is formed (a Beta posterior sample or a KL-UCB
//! index), the constrained LP is solved on those estimates and the arm is
//! drawn from the LP's selection vector. When the LP is infeasible the arm
//! is drawn uniformly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{sample_reward_event, BanditInstance};
use crate::error::{Error, Result};
use crate::lp::{solve_constrained_lp, ArmParams};
use crate::rng::{sample_beta, sample_index, seeded};
use crate::theory::bernoulli_kl;

/// Per-arm `Beta(alpha, beta)` posteriors, starting from the uniform prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorState {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl PosteriorState {
    pub fn uniform(n: usize) -> Self {
        PosteriorState {
            alpha: vec![1.0; n],
            beta: vec![1.0; n],
        }
    }

    pub fn n_arms(&self) -> usize {
        self.alpha.len()
    }

    pub fn plays(&self, arm: usize) -> f64 {
        self.alpha[arm] + self.beta[arm] - 2.0
    }

    pub fn successes(&self, arm: usize) -> f64 {
        self.alpha[arm] - 1.0
    }

    fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.beta.len() {
            return Err(Error::LengthMismatch {
                expected: self.alpha.len(),
                actual: self.beta.len(),
            });
        }
        if self
            .alpha
            .iter()
            .chain(&self.beta)
            .any(|v| !(*v >= 1.0) || !v.is_finite())
        {
            return Err(Error::invalid(
                "posterior parameters must be finite and >= 1",
            ));
        }
        Ok(())
    }
}

/// Play counts `k_i` and success counts `s_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountState {
    pub plays: Vec<u64>,
    pub successes: Vec<u64>,
}

impl CountState {
    pub fn new(n: usize) -> Self {
        CountState {
            plays: vec![0; n],
            successes: vec![0; n],
        }
    }

    pub fn n_arms(&self) -> usize {
        self.plays.len()
    }

    /// Empirical mean, 1 for an unplayed arm.
    pub fn empirical_mean(&self, arm: usize) -> f64 {
        match self.plays[arm] {
            0 => 1.0,
            k => self.successes[arm] as f64 / k as f64,
        }
    }

    pub fn update(&mut self, arm: usize, event: bool) -> Result<()> {
        let len = self.n_arms();
        let plays = self
            .plays
            .get_mut(arm)
            .ok_or(Error::IndexOutOfRange { index: arm, len })?;
        *plays += 1;
        self.successes[arm] += u64::from(event);
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.plays.len() != self.successes.len() {
            return Err(Error::LengthMismatch {
                expected: self.plays.len(),
                actual: self.successes.len(),
            });
        }
        if self.successes.iter().zip(&self.plays).any(|(s, k)| s > k) {
            return Err(Error::invalid("successes exceed plays"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    /// Initial round-robin round (`t < N`).
    Forced,
    /// Arm drawn from the LP selection vector.
    Lp,
    /// LP infeasible; arm drawn uniformly.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundDecision {
    /// Posterior samples or KL-UCB indices; empty on forced rounds.
    pub sampled_means: Vec<f64>,
    pub selection: Vec<f64>,
    pub chosen_arm: usize,
    pub lp_feasible: bool,
    pub kind: DecisionKind,
}

fn check_round(n: usize, t: u64, rewards: &[f64], eta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::NoArms);
    }
    if t == 0 {
        return Err(Error::invalid("rounds are 1-indexed; got t = 0"));
    }
    if rewards.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: rewards.len(),
        });
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid(format!("eta = {eta} outside [0, 1]")));
    }
    Ok(())
}

fn forced(n: usize, t: u64) -> Option<RoundDecision> {
    if t >= n as u64 {
        return None;
    }
    let arm = (t - 1) as usize;
    let mut selection = vec![0.0; n];
    selection[arm] = 1.0;
    Some(RoundDecision {
        sampled_means: Vec::new(),
        selection,
        chosen_arm: arm,
        lp_feasible: true,
        kind: DecisionKind::Forced,
    })
}

/// Solves the LP on estimated means and draws the arm.
fn decide_from_estimates<R: Rng + ?Sized>(
    estimates: Vec<f64>,
    rewards: &[f64],
    eta: f64,
    rng: &mut R,
) -> Result<RoundDecision> {
    let n = estimates.len();
    let arms: Vec<ArmParams> = estimates
        .iter()
        .zip(rewards)
        .map(|(&mu, &r)| ArmParams { mu, r })
        .collect();
    let solution = solve_constrained_lp(&arms, eta)?;
    let (selection, kind) = if solution.feasible {
        (solution.x, DecisionKind::Lp)
    } else {
        (vec![1.0 / n as f64; n], DecisionKind::Uniform)
    };
    let chosen_arm = sample_index(rng, &selection);
    Ok(RoundDecision {
        sampled_means: estimates,
        selection,
        chosen_arm,
        lp_feasible: solution.feasible,
        kind,
    })
}

/// One LinConTS round at 1-indexed time `t`.
pub fn linconts_round<R: Rng + ?Sized>(
    state: &PosteriorState,
    rewards: &[f64],
    eta: f64,
    t: u64,
    rng: &mut R,
) -> Result<RoundDecision> {
    let n = state.n_arms();
    check_round(n, t, rewards, eta)?;
    state.validate()?;
    if let Some(decision) = forced(n, t) {
        return Ok(decision);
    }
    let samples = state
        .alpha
        .iter()
        .zip(&state.beta)
        .map(|(&a, &b)| sample_beta(rng, a, b))
        .collect();
    decide_from_estimates(samples, rewards, eta, rng)
}

/// Conjugate update after observing `event` on `arm`.
pub fn posterior_update(state: &mut PosteriorState, arm: usize, event: bool) -> Result<()> {
    let len = state.n_arms();
    if arm >= len {
        return Err(Error::IndexOutOfRange { index: arm, len });
    }
    if event {
        state.alpha[arm] += 1.0;
    } else {
        state.beta[arm] += 1.0;
    }
    Ok(())
}

/// KL-UCB index: the largest `q` in `[s/k, 1]` with
/// `k * d(s/k, q) <= log t + c log log t`.
///
/// Returns 1 for an unplayed arm. A negative exploration budget (possible
/// for `2 <= t < e` with `c > 0`) is clamped to zero.
pub fn klucb_index(successes: u64, plays: u64, t: u64, c: f64) -> Result<f64> {
    if successes > plays {
        return Err(Error::invalid(format!(
            "successes {successes} exceed plays {plays}"
        )));
    }
    if plays == 0 {
        return Ok(1.0);
    }
    if t == 0 {
        return Err(Error::domain("klucb_index needs t >= 1"));
    }
    if c != 0.0 && t < 2 {
        return Err(Error::domain(format!(
            "log log t undefined for t = {t} with c = {c}"
        )));
    }
    let log_t = (t as f64).ln();
    let mut budget = log_t;
    if c != 0.0 {
        budget += c * log_t.ln();
    }
    let budget = budget.max(0.0) / plays as f64;

    let p = successes as f64 / plays as f64;
    if budget == 0.0 {
        return Ok(p);
    }
    if successes == plays {
        // d(1, q) = log(1 / q)
        return Ok((-budget).exp());
    }
    Ok(kl_upper(p, budget))
}

/// Largest `q` in `[p, 1)` with `d(p, q) <= budget`, bisected until the
/// bracket stops shrinking in floating point.
fn kl_upper(p: f64, budget: f64) -> f64 {
    let (mut lo, mut hi) = (p, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bernoulli_kl(p, mid) > budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// One LinCon-KL-UCB round at 1-indexed time `t`.
pub fn linconklucb_round<R: Rng + ?Sized>(
    state: &CountState,
    rewards: &[f64],
    eta: f64,
    t: u64,
    c: f64,
    rng: &mut R,
) -> Result<RoundDecision> {
    let n = state.n_arms();
    check_round(n, t, rewards, eta)?;
    state.validate()?;
    if let Some(decision) = forced(n, t) {
        return Ok(decision);
    }
    let indices = state
        .successes
        .iter()
        .zip(&state.plays)
        .map(|(&s, &k)| klucb_index(s, k, t, c))
        .collect::<Result<Vec<_>>>()?;
    decide_from_estimates(indices, rewards, eta, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum PolicyKind {
    #[serde(rename = "linconts")]
    LinConTs,
    #[serde(rename = "linconklucb")]
    LinConKlUcb { c: f64 },
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::LinConTs => "linconts",
            PolicyKind::LinConKlUcb { .. } => "linconklucb",
        }
    }
}

/// Compact record of the selection vector used in a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Selection {
    Forced,
    /// Nonzero entries of the LP solution as `(arm, probability)`.
    Support(Vec<(usize, f64)>),
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    pub arm: usize,
    pub reward_event: bool,
    pub collected_reward: f64,
    pub selection: Selection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub policy: PolicyKind,
    pub seed: u64,
    pub n_arms: usize,
    pub rounds: Vec<RoundRecord>,
}

impl RunTrace {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    /// `k_i(t + 1)`: plays of each arm during rounds `1..=t`.
    pub fn play_counts(&self, t: usize) -> Vec<u64> {
        let mut counts = vec![0; self.n_arms];
        for rec in self.rounds.iter().take(t) {
            counts[rec.arm] += 1;
        }
        counts
    }
}

enum PolicyState {
    Ts(PosteriorState),
    KlUcb(CountState, f64),
}

/// Simulates `horizon` rounds of `policy` on `instance`.
///
/// The whole run, including reward events, draws from one stream seeded with
/// `seed`, so the trace is a pure function of its arguments.
pub fn run_policy(
    policy: PolicyKind,
    instance: &BanditInstance,
    horizon: u64,
    seed: u64,
) -> Result<RunTrace> {
    let n = instance.n_arms();
    if horizon < n as u64 {
        return Err(Error::invalid(format!(
            "horizon {horizon} shorter than the number of arms {n}"
        )));
    }
    let rewards = instance.rewards();
    let mut rng = seeded(seed);
    let mut state = match policy {
        PolicyKind::LinConTs => PolicyState::Ts(PosteriorState::uniform(n)),
        PolicyKind::LinConKlUcb { c } => {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::invalid(format!(
                    "KL-UCB constant c = {c} must be >= 0"
                )));
            }
            PolicyState::KlUcb(CountState::new(n), c)
        }
    };

    let mut rounds = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let decision = match &state {
            PolicyState::Ts(post) => linconts_round(post, &rewards, instance.eta, t, &mut rng)?,
            PolicyState::KlUcb(counts, c) => {
                linconklucb_round(counts, &rewards, instance.eta, t, *c, &mut rng)?
            }
        };
        let arm = decision.chosen_arm;
        let event = sample_reward_event(instance, arm, &mut rng)?;
        match &mut state {
            PolicyState::Ts(post) => posterior_update(post, arm, event)?,
            PolicyState::KlUcb(counts, _) => counts.update(arm, event)?,
        }
        let selection = match decision.kind {
            DecisionKind::Forced => Selection::Forced,
            DecisionKind::Uniform => Selection::Uniform,
            DecisionKind::Lp => Selection::Support(
                decision
                    .selection
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(i, &p)| (i, p))
                    .collect(),
            ),
        };
        rounds.push(RoundRecord {
            t,
            arm,
            reward_event: event,
            collected_reward: if event { rewards[arm] } else { 0.0 },
            selection,
        });
    }
    Ok(RunTrace {
        policy,
        seed,
        n_arms: n,
        rounds,
    })
}
