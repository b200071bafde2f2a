use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::random_episode;
use crate::gdl::{GameDescription, RewardBounds};

/// Levin-style complexity of a game: description length plus log2 of the
/// expected per-episode engine cost under a random agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub tau: f64,
    pub k_bits: f64,
    pub weight: f64,
}

impl ComplexityProfile {
    pub fn new(desc_len_bits: f64, tau: f64) -> Self {
        assert!(tau >= 1.0, "tau must be at least 1, got {tau}");
        let k_bits = desc_len_bits + tau.log2();
        ComplexityProfile {
            tau,
            k_bits,
            weight: (-k_bits).exp2(),
        }
    }
}

pub fn complexity(desc: &GameDescription, tau: f64) -> ComplexityProfile {
    ComplexityProfile::new(desc.desc_len_bits, tau)
}

/// Mean total engine cost of `n_rollouts` random-agent episodes with seeds
/// `seed, seed+1, ...`.
pub fn estimate_tau(desc: &Arc<GameDescription>, n_rollouts: u32, seed: u64) -> f64 {
    assert!(n_rollouts >= 1);
    let total: u64 = (0..u64::from(n_rollouts))
        .map(|k| random_episode(desc, seed.wrapping_add(k)).cost_units)
        .sum();
    total as f64 / f64::from(n_rollouts)
}

/// Min-max normalization of an episode score into [0, 1].
pub fn normalize(score: i32, bounds: RewardBounds) -> f64 {
    let span = f64::from(bounds.r_max - bounds.r_min);
    (f64::from(score - bounds.r_min) / span).clamp(0.0, 1.0)
}
