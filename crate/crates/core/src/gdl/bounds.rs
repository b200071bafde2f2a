use serde::{Deserialize, Serialize};

use super::types::{Effect, GameDescription};

/// Static, conservative bounds on the episode score of player one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardBounds {
    pub r_min: i32,
    pub r_max: i32,
}

impl RewardBounds {
    /// Bounds as seen by player two, whose score is the negation of player one's.
    pub fn negated(self) -> RewardBounds {
        RewardBounds {
            r_min: -self.r_max,
            r_max: -self.r_min,
        }
    }

    pub fn contains(&self, score: i32) -> bool {
        self.r_min <= score && score <= self.r_max
    }
}

/// Terminal reward plus the horizon times the per-tick extremes: step delta
/// and every reward effect firing once per tick.
///
/// A game that can never change its score would get `r_min == r_max`; its
/// upper bound is lifted by one so normalization stays defined.
pub fn compute_bounds(desc: &GameDescription) -> RewardBounds {
    let horizon = i32::from(desc.horizon);
    let step = i32::from(desc.scoring.step_delta);
    let (mut pos, mut neg) = (0i32, 0i32);
    for effect in desc.rules.iter().flat_map(|r| r.effects.iter()) {
        if let Effect::Reward(d) = *effect {
            let d = i32::from(d);
            if d > 0 {
                pos += d;
            } else {
                neg += d;
            }
        }
    }
    let r_max = i32::from(desc.scoring.win_reward) + horizon * step.max(0) + horizon * pos;
    let r_min = i32::from(desc.scoring.lose_reward) + horizon * step.min(0) + horizon * neg;
    RewardBounds {
        r_min,
        r_max: r_max.max(r_min + 1),
    }
}
