//! General game intelligence measurement.
//!
//! Games are described in MicroGDL ([`gdl`]), sampled from the grammar
//! prior ([`sampler`]), interpreted by a deterministic engine ([`engine`])
//! and played by agents ([`agents`], or external processes through
//! [`proto`]) under a two-phase, virtual-clock budget ([`measure`]).
//! Two-player games can additionally be ranked on an Elo ladder ([`arena`]).

pub mod agents;
pub mod arena;
pub mod engine;
pub mod gdl;
pub mod measure;
pub mod proto;
pub mod sampler;
pub mod seed;

pub use agents::{Agent, AgentSpec};
pub use engine::{Action, GameState, Player};
pub use gdl::{GameDescription, RewardBounds};
pub use measure::{ComplexityProfile, EvalResult, IntelligenceEstimate};
pub use sampler::{FilterPolicy, SampleConfig, SampledGame};
