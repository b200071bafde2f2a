//! MicroGDL: a compact parenthesized language for turn-based grid games.
//!
//! ```text
//! (game (grid 4 4) (players 1) (obs full) (noise 0) (horizon 16)
//!       (init (avatar 0 0) (goal 3 3))
//!       (actions up down left right)
//!       (rules (when (overlap avatar goal) (end win)))
//!       (score 0 4 0))
//! ```
//!
//! Every string derivable from the grammar prior (see [`code`]) is a valid
//! game, and the description length of a game is the exact code length of
//! its derivation.

mod bounds;
pub mod code;
mod text;
mod types;
mod validate;

pub use bounds::{compute_bounds, RewardBounds};
pub use code::{derive, description_length, encode, Choice, ChoiceSource, ReplaySource};
pub use text::{parse, parse_batch, serialize, GdlError, ParseError};
pub use types::*;
pub use validate::{validate, Issue, IssueCode, Severity, ValidationReport};

#[cfg(test)]
mod tests;
