use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentError, Decision, GameInfo, Percept, Phase, Response};

/// Switches at its first decision, then acts uniformly over legal actions.
#[derive(Clone, Debug)]
pub struct RandomAgent {
    id: String,
    cost: u64,
    rng: ChaCha8Rng,
}

impl RandomAgent {
    pub fn new() -> Self {
        Self::with_cost(1)
    }

    /// A random agent charging `cost` virtual units per decision.
    pub fn with_cost(cost: u64) -> Self {
        let id = if cost == 1 {
            "random".to_string()
        } else {
            format!("random:cost={cost}")
        };
        RandomAgent {
            id,
            cost: cost.max(1),
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }
}

impl Default for RandomAgent {
    fn default() -> Self {
        Self::new()
    }
}

impl Agent for RandomAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError> {
        self.rng = ChaCha8Rng::seed_from_u64(info.seed);
        Ok(())
    }

    fn decide(&mut self, p: &Percept<'_>) -> Result<Decision, AgentError> {
        let response = if p.phase == Phase::Learn {
            Response::Switch
        } else if p.legal.is_empty() {
            Response::Act(crate::engine::Action::Pass)
        } else {
            Response::Act(p.legal[self.rng.random_range(0..p.legal.len())])
        };
        Ok(Decision::new(response, self.cost))
    }
}
