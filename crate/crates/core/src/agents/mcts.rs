use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Agent, AgentError, Decision, GameInfo, Percept, Phase, Response};
use crate::engine::{Action, Control, GameState, Player};
use crate::seed::{derive_seed, tags};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MctsConfig {
    /// Rollouts per legal action and decision.
    pub simulations: u32,
    /// Maximum ticks per rollout.
    pub horizon: u16,
    pub switch_fraction: f64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        MctsConfig {
            simulations: 4,
            horizon: 8,
            switch_fraction: 0.0,
        }
    }
}

/// Flat Monte-Carlo search on clones of the true engine state.
///
/// White-box: it reads the engine instead of learning a model, and pays for
/// every simulated tick on the virtual clock.
#[derive(Clone, Debug)]
pub struct MctsAgent {
    id: String,
    cfg: MctsConfig,
    budget: u64,
    seat: Player,
    other: Control,
    seed: u64,
    rollouts: u64,
    horizon: u16,
    /// Rollout depth, fixed at the first evaluation decision.
    depth: Option<u32>,
    rng: ChaCha8Rng,
}

impl MctsAgent {
    pub fn new(cfg: MctsConfig) -> Self {
        let id = format!(
            "mcts:sims={},horizon={},switch={}",
            cfg.simulations, cfg.horizon, cfg.switch_fraction
        );
        MctsAgent {
            id,
            cfg,
            budget: 0,
            seat: Player::One,
            other: Control::Auto,
            seed: 0,
            rollouts: 0,
            horizon: 0,
            depth: None,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn config(&self) -> &MctsConfig {
        &self.cfg
    }

    fn joint(&self, mine: Control) -> (Control, Control) {
        match self.seat {
            Player::One => (mine, self.other),
            Player::Two => (self.other, mine),
        }
    }

    /// Return to this seat, ticks played and engine cost of one rollout.
    /// A rollout cut off before the end is extrapolated at its average
    /// reward per tick up to the horizon.
    fn rollout(&self, root: &GameState, first: Action, depth: u32, seed: u64) -> (f64, u32, u64) {
        let mut s = root.clone();
        s.reseed(seed);
        let sign = if self.seat == Player::One { 1 } else { -1 };
        let (mut ret, mut ticks, mut cost) = (0i64, 0u32, 0u64);
        let mut control = Control::Agent(first);
        while !s.is_terminal() && ticks < depth {
            let (p1, p2) = self.joint(control);
            let out = s.step_with(p1, p2).expect("rollout actions are legal");
            ret += sign * i64::from(out.reward_delta);
            cost += out.cost_units;
            ticks += 1;
            control = Control::Random;
        }
        let mut value = ret as f64;
        if !s.is_terminal() && ticks > 0 {
            let left = f64::from(self.horizon.saturating_sub(s.tick()));
            value += left * ret as f64 / f64::from(ticks);
        }
        (value, ticks, cost)
    }
}

impl MctsAgent {
    /// Rollout depth: the configured cap, cut down so that the clock left
    /// at the first evaluation decision covers one full-horizon episode.
    /// Kept fixed afterwards so every evaluation episode gets the same care.
    fn depth(&mut self, p: &Percept<'_>, k: u32) -> u32 {
        if let Some(d) = self.depth {
            return d;
        }
        let cap = u32::from(self.cfg.horizon.max(1));
        let per_tick = 1 + p.state.desc().rules.len() as u64;
        // Each real step also pays its own decision unit and tick.
        let per_decision =
            (p.clock_remaining / (u64::from(self.horizon) + 1)).saturating_sub(1 + per_tick);
        let per_rollout = per_decision / (p.legal.len() as u64 * u64::from(k) * per_tick).max(1);
        let d = (per_rollout.min(u64::from(cap)) as u32).max(1);
        self.depth = Some(d);
        d
    }
}

impl Agent for MctsAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn white_box(&self) -> bool {
        true
    }

    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError> {
        self.budget = info.budget;
        self.seat = info.seat;
        self.other = info.other;
        self.seed = info.seed;
        self.rollouts = 0;
        self.horizon = info.desc.horizon;
        self.depth = None;
        self.rng = ChaCha8Rng::seed_from_u64(info.seed);
        Ok(())
    }

    fn decide(&mut self, p: &Percept<'_>) -> Result<Decision, AgentError> {
        if p.phase == Phase::Learn {
            let spent = self.budget.saturating_sub(p.clock_remaining);
            if spent as f64 >= self.cfg.switch_fraction * self.budget as f64 {
                return Ok(Decision::new(Response::Switch, 1));
            }
            // Nothing to learn: any pre-switch action is a random probe.
            if !p.legal.is_empty() {
                let a = p.legal[self.rng.random_range(0..p.legal.len())];
                return Ok(Decision::new(Response::Act(a), 1));
            }
        }
        if p.legal.is_empty() {
            return Ok(Decision::new(Response::Act(Action::Pass), 1));
        }
        let k = self.cfg.simulations.max(1);
        let depth = self.depth(p, k);
        let mut cost = 1u64;
        let mut best: Option<(Action, f64, u64)> = None;
        // The j-th rollout of every action shares one seed, so actions are
        // compared under the same chance outcomes.
        let seeds: Vec<u64> = (0..u64::from(k))
            .map(|j| derive_seed(self.seed, tags::ROLLOUT, self.rollouts + j))
            .collect();
        self.rollouts += u64::from(k);
        for &a in p.legal {
            let (mut total, mut length) = (0.0, 0u64);
            for &seed in &seeds {
                let (r, t, c) = self.rollout(p.state, a, depth, seed);
                total += r;
                length += u64::from(t);
                cost += c;
            }
            // Same k for every action: compare sums. On equal positive
            // returns the faster action wins, on equal negative ones the
            // slower; otherwise declared order decides.
            let better = match best {
                None => true,
                Some((_, bt, bl)) => {
                    total > bt
                        || (total == bt && total > 0.0 && length < bl)
                        || (total == bt && total < 0.0 && length > bl)
                }
            };
            if better {
                best = Some((a, total, length));
            }
        }
        let (action, _, _) = best.expect("non-empty legal set");
        Ok(Decision::new(Response::Act(action), cost))
    }
}
