use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentError, Decision, GameInfo, Percept, Phase, Response};
use crate::engine::Action;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QLearnConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Fraction of the budget spent learning before the switch.
    pub switch_fraction: f64,
    /// Exploration rate after the switch.
    pub eval_epsilon: f64,
}

impl Default for QLearnConfig {
    fn default() -> Self {
        QLearnConfig {
            alpha: 0.2,
            gamma: 0.95,
            epsilon: 0.1,
            switch_fraction: 0.5,
            eval_epsilon: 0.0,
        }
    }
}

/// Tabular Q-learning keyed on the raw observation string.
#[derive(Clone, Debug)]
pub struct QLearnAgent {
    id: String,
    cfg: QLearnConfig,
    budget: u64,
    pub(super) q: HashMap<(String, Action), f64>,
    last: Option<(String, Action)>,
    rng: ChaCha8Rng,
}

impl QLearnAgent {
    pub fn new(cfg: QLearnConfig) -> Self {
        let id = format!(
            "qlearn:alpha={},gamma={},eps={},switch={},eval_eps={}",
            cfg.alpha, cfg.gamma, cfg.epsilon, cfg.switch_fraction, cfg.eval_epsilon
        );
        QLearnAgent {
            id,
            cfg,
            budget: 0,
            q: HashMap::new(),
            last: None,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn config(&self) -> &QLearnConfig {
        &self.cfg
    }

    fn value(&self, obs: &str, a: Action) -> f64 {
        self.q.get(&(obs.to_string(), a)).copied().unwrap_or(0.0)
    }

    fn best_value(&self, obs: &str, legal: &[Action]) -> f64 {
        if legal.is_empty() {
            return 0.0;
        }
        legal
            .iter()
            .map(|&a| self.value(obs, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Greedy action, breaking ties uniformly at random.
    fn greedy(&mut self, obs: &str, legal: &[Action]) -> Action {
        let best = self.best_value(obs, legal);
        let ties: Vec<Action> = legal
            .iter()
            .copied()
            .filter(|&a| self.value(obs, a) == best)
            .collect();
        ties[self.rng.random_range(0..ties.len())]
    }

    fn learn(&mut self, p: &Percept<'_>) {
        let Some(key) = self.last.take() else {
            return;
        };
        let future = if p.done {
            0.0
        } else {
            self.cfg.gamma * self.best_value(&p.cells, p.legal)
        };
        let target = f64::from(p.reward_delta) + future;
        let q = self.q.entry(key).or_insert(0.0);
        *q += self.cfg.alpha * (target - *q);
    }
}

impl Agent for QLearnAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError> {
        self.budget = info.budget;
        self.q.clear();
        self.last = None;
        self.rng = ChaCha8Rng::seed_from_u64(info.seed);
        Ok(())
    }

    fn decide(&mut self, p: &Percept<'_>) -> Result<Decision, AgentError> {
        self.learn(p);
        if p.phase == Phase::Learn {
            let spent = self.budget.saturating_sub(p.clock_remaining);
            if spent as f64 >= self.cfg.switch_fraction * self.budget as f64 {
                return Ok(Decision::new(Response::Switch, 1));
            }
        }
        if p.legal.is_empty() {
            return Ok(Decision::new(Response::Act(Action::Pass), 1));
        }
        let eps = match p.phase {
            Phase::Learn => self.cfg.epsilon,
            Phase::Eval => self.cfg.eval_epsilon,
        };
        let action = if self.rng.random::<f64>() < eps {
            p.legal[self.rng.random_range(0..p.legal.len())]
        } else {
            self.greedy(&p.cells, p.legal)
        };
        self.last = Some((p.cells.clone(), action));
        Ok(Decision::new(Response::Act(action), 1))
    }
}
