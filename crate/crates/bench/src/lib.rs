//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use ggb_core::gdl::{self, GameDescription};

/// A mid-sized game with an opponent, noise and several rules.
pub const CHASE: &str = "(game (grid 6 6) (players 1) (obs full) (noise 1/8) (horizon 64) (opponent chase avatar) (init (avatar 0 0) (opp 5 5) (wall 2 2) (wall 3 3) (item 1 4) (item 4 1) (goal 5 0)) (actions up down left right stay) (rules (when (overlap avatar item) (reward 2) (remove item)) (when (overlap avatar opp) (end lose)) (when (overlap avatar goal) (end win)) (when (tick eq 32) (spawn hazard random))) (score 0 6 -4))";

pub fn chase() -> Arc<GameDescription> {
    Arc::new(gdl::parse(CHASE).expect("fixture parses"))
}
