use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{random_episode, Action, GameState, Player};
use crate::gdl::{compute_bounds, GameDescription};
use crate::measure::normalize;
use crate::seed::{derive_seed, tags};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Playable,
    Trivial,
    Impossible,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Playability {
    pub verdict: Verdict,
    pub random_mean_v: f64,
    pub probe_mean_v: f64,
    pub episodes_tested: u32,
}

impl Playability {
    /// Headroom of the greedy probe over random play.
    pub fn headroom(&self) -> f64 {
        self.probe_mean_v - self.random_mean_v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PretestConfig {
    pub episodes: u32,
    pub trivial_threshold: f64,
    pub probe_depth: u32,
    /// Actions considered per probe node; larger sets are subsampled.
    pub probe_branching: usize,
    /// Minimum `probe_mean_v - random_mean_v` for a game to count as learnable.
    pub learnable_margin: f64,
}

impl Default for PretestConfig {
    fn default() -> Self {
        PretestConfig {
            episodes: 32,
            trivial_threshold: 0.9,
            probe_depth: 3,
            probe_branching: 8,
            learnable_margin: 0.2,
        }
    }
}

/// Best total reward reachable within `depth` ticks from `s`.
fn lookahead(s: &GameState, depth: u32, cfg: &PretestConfig, rng: &mut ChaCha8Rng) -> i64 {
    if depth == 0 || s.is_terminal() {
        return 0;
    }
    let mut legal = s.legal_actions(Player::One);
    if legal.is_empty() {
        legal.push(Action::Pass);
    }
    if legal.len() > cfg.probe_branching {
        legal.shuffle(rng);
        legal.truncate(cfg.probe_branching);
    }
    legal
        .into_iter()
        .map(|a| {
            let mut next = s.clone();
            let r = i64::from(next.step(a).expect("legal").reward_delta);
            r + lookahead(&next, depth - 1, cfg, rng)
        })
        .max()
        .expect("non-empty")
}

/// One episode of depth-limited greedy search on clones of the true state.
fn probe_episode(desc: &Arc<GameDescription>, seed: u64, cfg: &PretestConfig) -> i32 {
    let mut s = GameState::new(Arc::clone(desc), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::ROLLOUT, 0));
    while !s.is_terminal() {
        let mut legal = s.legal_actions(Player::One);
        if legal.is_empty() {
            legal.push(Action::Pass);
        }
        if legal.len() > cfg.probe_branching {
            legal.shuffle(&mut rng);
            legal.truncate(cfg.probe_branching);
        }
        let mut best = Vec::new();
        let mut best_v = i64::MIN;
        for &a in &legal {
            let mut next = s.clone();
            let r = i64::from(next.step(a).expect("legal").reward_delta);
            let v = r + lookahead(&next, cfg.probe_depth.saturating_sub(1), cfg, &mut rng);
            if v > best_v {
                best_v = v;
                best.clear();
            }
            if v == best_v {
                best.push(a);
            }
        }
        let a = best[rng.random_range(0..best.len())];
        s.step(a).expect("legal");
    }
    s.score()
}

/// Screens a game with random-agent episodes and greedy-search probes.
///
/// Impossible when no probe episode scores above the lower bound; Trivial
/// when random play already averages above the threshold.
pub fn pretest(desc: &Arc<GameDescription>, seed: u64, cfg: &PretestConfig) -> Playability {
    let n = cfg.episodes.max(1);
    let bounds = compute_bounds(desc);
    let mean = |f: &dyn Fn(u64) -> i32, tag: u64| {
        (0..u64::from(n))
            .map(|k| normalize(f(derive_seed(seed, tag, k)), bounds))
            .sum::<f64>()
            / f64::from(n)
    };
    let random_mean_v = mean(&|s| random_episode(desc, s).score, tags::LEARN_EPISODE);
    let probe_mean_v = mean(&|s| probe_episode(desc, s, cfg), tags::EVAL_EPISODE);
    let verdict = if probe_mean_v == 0.0 {
        Verdict::Impossible
    } else if random_mean_v > cfg.trivial_threshold {
        Verdict::Trivial
    } else {
        Verdict::Playable
    };
    Playability {
        verdict,
        random_mean_v,
        probe_mean_v,
        episodes_tested: n,
    }
}
