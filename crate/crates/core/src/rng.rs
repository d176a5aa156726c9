//! Seeded random source and the sampling recipes used by the simulator.
//!
//! Every run draws from a single [`SimRng`] stream (ChaCha with 8 rounds,
//! seeded through `seed_from_u64`). Within a round the draws happen in a
//! fixed order: one Beta sample per arm in index order, one uniform for the
//! arm choice, one uniform for the reward event.
//!
//! `Beta(a, b)` is sampled as `X / (X + Y)` with independent
//! `X ~ Gamma(a, 1)` and `Y ~ Gamma(b, 1)` (Marsaglia-Tsang for shape >= 1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Draws from `Beta(alpha, beta)`; both parameters must be positive and finite.
pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let x = Gamma::new(alpha, 1.0)
        .expect("alpha must be positive")
        .sample(rng);
    let y = Gamma::new(beta, 1.0)
        .expect("beta must be positive")
        .sample(rng);
    let sum = x + y;
    if sum > 0.0 {
        x / sum
    } else {
        // Both gamma draws underflowed; only possible for tiny shapes.
        alpha / (alpha + beta)
    }
}

/// Inverse-CDF draw from a probability vector using one uniform.
///
/// Falls back to the last index with positive mass if rounding leaves the
/// uniform above the final cumulative sum.
pub fn sample_index<R: Rng + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last_positive = i;
        if u < acc {
            return i;
        }
    }
    last_positive
}
