//! Deterministic MicroGDL interpreter.
//!
//! Each tick resolves in a fixed order: player one's action (with move
//! noise), player two's action (scripted opponent, random stand-in or a
//! second agent), rules in authored order, step delta, tick advance and
//! terminal bonus. Given the same description, seed and action sequence
//! every trajectory, score and cost is reproduced exactly.

mod action;
mod state;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use action::{Action, UnknownAction};
pub use state::{Control, EngineError, GameState, Player, StepOutcome, Terminal};

use crate::gdl::GameDescription;
use crate::seed::{derive_seed, tags};

/// Starts an episode at tick 0.
pub fn new_episode(desc: Arc<GameDescription>, seed: u64) -> GameState {
    GameState::new(desc, seed)
}

/// Summary of one finished episode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpisodeStats {
    pub score: i32,
    pub ticks: u16,
    pub cost_units: u64,
    pub terminal: Terminal,
}

/// Plays one full episode with a uniformly random player one.
///
/// The engine uses `seed`; the random player draws from an independent
/// stream derived from it.
pub fn random_episode(desc: &Arc<GameDescription>, seed: u64) -> EpisodeStats {
    let mut state = GameState::new(Arc::clone(desc), seed);
    let mut chooser = ChaCha8Rng::seed_from_u64(derive_seed(seed, tags::ROLLOUT, 0));
    let mut cost = 0;
    loop {
        let legal = state.legal_actions(Player::One);
        let action = if legal.is_empty() {
            Action::Pass
        } else {
            legal[chooser.random_range(0..legal.len())]
        };
        let out = state.step(action).expect("legal action on a live state");
        cost += out.cost_units;
        if let Some(terminal) = out.terminal {
            return EpisodeStats {
                score: state.score(),
                ticks: state.tick(),
                cost_units: cost,
                terminal,
            };
        }
    }
}

/// One line of an exported trajectory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub tick: u16,
    pub action: Action,
    pub observation: String,
    pub reward: i32,
}

#[cfg(test)]
mod tests;
