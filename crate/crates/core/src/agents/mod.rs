//! Agent interface and the in-process baselines.
//!
//! An agent sees one [`Percept`] per decision and answers with an action,
//! `pass` or the one-time `switch` that ends its learning phase. Each
//! decision carries a cost in virtual clock units.

mod mcts;
mod qlearn;
mod random;
mod scripted;
mod spec;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, Control, GameState, Player};
use crate::gdl::{GameDescription, RewardBounds};
use crate::proto::ProtocolError;

pub use mcts::{MctsAgent, MctsConfig};
pub use qlearn::{QLearnAgent, QLearnConfig};
pub use random::RandomAgent;
pub use scripted::ScriptedAgent;
pub use spec::{AgentSpec, SpecError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Learn,
    Eval,
}

/// How decision costs are charged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    /// Costs declared by the agent; runs are reproducible.
    Deterministic,
    /// Costs derived from measured wall time.
    WallClock,
}

/// Everything an agent is told before its first decision on a game.
#[derive(Clone, Debug)]
pub struct GameInfo {
    pub game_id: String,
    pub desc: Arc<GameDescription>,
    pub seat: Player,
    pub budget: u64,
    /// Bounds on the score of this agent's seat.
    pub bounds: RewardBounds,
    /// Seed for the agent's own randomness.
    pub seed: u64,
    /// How the other seat (if any) is driven while this agent learns.
    pub other: Control,
}

/// One observation.
///
/// `done` reports that the previous action ended an episode (or that the
/// switch abandoned one); `cells` then already shows the fresh episode and
/// `reward_delta` is the final reward of the finished one.
#[derive(Clone, Debug)]
pub struct Percept<'a> {
    pub tick: u16,
    pub phase: Phase,
    pub episode: u32,
    pub cells: String,
    pub reward_delta: i32,
    pub done: bool,
    pub clock_remaining: u64,
    pub legal: &'a [Action],
    /// The live engine state; only white-box agents may look at it.
    pub state: &'a GameState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Response {
    Act(Action),
    Pass,
    Switch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub response: Response,
    /// Virtual clock units charged for making the decision.
    pub cost: u64,
}

impl Decision {
    pub fn new(response: Response, cost: u64) -> Self {
        Decision { response, cost }
    }
}

/// Final report sent to an agent after an evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub v: f64,
    pub switched: bool,
    pub episodes: u32,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("agent sent a second switch")]
    DoubleSwitch,
    #[error("agent chose illegal action `{0}`")]
    IllegalAction(Action),
    #[error("agent transport failed: {0}")]
    Transport(String),
}

pub trait Agent: Send {
    fn id(&self) -> &str;

    /// True for agents that read the engine state directly.
    fn white_box(&self) -> bool {
        false
    }

    fn clock_mode(&self) -> ClockMode {
        ClockMode::Deterministic
    }

    /// Called once per evaluation; resets any per-game memory.
    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError>;

    fn decide(&mut self, percept: &Percept<'_>) -> Result<Decision, AgentError>;

    fn finish(&mut self, _outcome: &Outcome) -> Result<(), AgentError> {
        Ok(())
    }
}

impl fmt::Debug for dyn Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Agent({})", self.id())
    }
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn white_box(&self) -> bool {
        (**self).white_box()
    }
    fn clock_mode(&self) -> ClockMode {
        (**self).clock_mode()
    }
    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError> {
        (**self).init(info)
    }
    fn decide(&mut self, percept: &Percept<'_>) -> Result<Decision, AgentError> {
        (**self).decide(percept)
    }
    fn finish(&mut self, outcome: &Outcome) -> Result<(), AgentError> {
        (**self).finish(outcome)
    }
}
