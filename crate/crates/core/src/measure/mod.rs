//! Complexity, two-phase evaluation and the anytime intelligence estimate.
//!
//! A game's complexity is `K = l + log2(tau)`: its description length in
//! bits plus the log of its expected per-episode engine cost under a random
//! agent. Each game is played under a virtual-clock budget `T`: the agent
//! learns until it switches, after which only evaluation episodes count.
//! Normalized per-game values are averaged into the estimate, either plainly
//! or reweighted by `1/tau` when games were drawn in proportion to `2^-l`.

mod complexity;
mod estimate;
mod protocol;

pub use complexity::{complexity, estimate_tau, normalize, ComplexityProfile};
pub use estimate::{
    doubling_schedule, estimate_upsilon, estimate_upsilon_parallel, evaluation_seed, Accumulator,
    EstimateMode, GameRecord, IntelligenceEstimate, PerGame, RunLog, Task,
};
pub(crate) use protocol::{drive, game_info, resolve, seat_bounds};
pub use protocol::{evaluate_two_phase, evaluate_with, EvalOptions, EvalResult};
