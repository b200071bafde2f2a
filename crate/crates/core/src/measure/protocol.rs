use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::normalize;
use crate::agents::{Agent, AgentError, GameInfo, Outcome, Percept, Phase, Response};
use crate::engine::{Action, Control, GameState, Player, StepOutcome};
use crate::gdl::{compute_bounds, GameDescription, RewardBounds};
use crate::seed::{derive_seed, tags};

/// Outcome of one two-phase evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub v: f64,
    /// Clock reading right after the switch decision.
    pub switched_at: Option<u64>,
    /// Scores of completed evaluation episodes.
    pub eval_episode_scores: Vec<i32>,
    /// Score of the evaluation episode in flight when the budget ran out.
    pub partial_accumulated: i32,
    pub clock_spent: u64,
    pub budget: u64,
    pub learn_episodes: u32,
    pub decisions: u64,
    pub passes: u64,
}

impl EvalResult {
    fn finish(&mut self, bounds: RewardBounds) {
        self.v = if self.switched_at.is_none() {
            0.0
        } else if self.eval_episode_scores.is_empty() {
            normalize(self.partial_accumulated, bounds)
        } else {
            let sum: f64 = self
                .eval_episode_scores
                .iter()
                .map(|&s| normalize(s, bounds))
                .sum();
            sum / self.eval_episode_scores.len() as f64
        };
    }
}

/// Who the agent is and what drives the other seat.
#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub game_id: String,
    pub seat: Player,
    /// Control of the other seat.
    pub other: Control,
    /// End the run as soon as the agent switches (used for arena learning).
    pub stop_at_switch: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            game_id: "game".into(),
            seat: Player::One,
            other: Control::Auto,
            stop_at_switch: false,
        }
    }
}

pub(crate) fn seat_bounds(desc: &GameDescription, seat: Player) -> RewardBounds {
    let b = compute_bounds(desc);
    match seat {
        Player::One => b,
        Player::Two => b.negated(),
    }
}

pub(crate) fn game_info(
    desc: &Arc<GameDescription>,
    budget: u64,
    seed: u64,
    opts: &EvalOptions,
) -> GameInfo {
    GameInfo {
        game_id: opts.game_id.clone(),
        desc: Arc::clone(desc),
        seat: opts.seat,
        budget,
        bounds: seat_bounds(desc, opts.seat),
        seed: derive_seed(seed, tags::AGENT, 0),
        other: opts.other,
    }
}

/// Steps `state` with `action` for `seat` and `other` for the other seat.
pub(crate) fn step_seat(
    state: &mut GameState,
    seat: Player,
    action: Action,
    other: Control,
) -> StepOutcome {
    let mine = Control::Agent(action);
    let r = match seat {
        Player::One => state.step_with(mine, other),
        Player::Two => state.step_with(other, mine),
    };
    r.expect("action checked for legality")
}

pub(crate) fn resolve(
    response: Response,
    state: &GameState,
    seat: Player,
) -> Result<Action, AgentError> {
    match response {
        Response::Pass | Response::Act(Action::Pass) => Ok(Action::Pass),
        Response::Act(a) if state.is_legal(seat, a) => Ok(a),
        Response::Act(a) => Err(AgentError::IllegalAction(a)),
        Response::Switch => unreachable!("switch handled by the caller"),
    }
}

/// Runs the learning/evaluation protocol for player one against the game's
/// own opponent.
pub fn evaluate_two_phase(
    agent: &mut dyn Agent,
    desc: &Arc<GameDescription>,
    budget: u64,
    seed: u64,
) -> Result<EvalResult, AgentError> {
    evaluate_with(agent, desc, budget, seed, &EvalOptions::default())
}

/// Two-phase evaluation on a virtual clock.
///
/// The clock is charged the agent's decision cost, then the engine cost of
/// the resulting tick. Nothing runs once the clock reaches the budget; a
/// decision that exhausts it is not executed. Learning episodes use seeds
/// from one stream, evaluation episodes from another, so what happens before
/// the switch cannot influence the evaluation environment.
pub fn evaluate_with(
    agent: &mut dyn Agent,
    desc: &Arc<GameDescription>,
    budget: u64,
    seed: u64,
    opts: &EvalOptions,
) -> Result<EvalResult, AgentError> {
    assert!(budget >= 1, "budget must be positive");
    let info = game_info(desc, budget, seed, opts);
    agent.init(&info)?;
    let res = drive(agent, desc, budget, seed, opts)?;
    agent.finish(&Outcome {
        v: res.v,
        switched: res.switched_at.is_some(),
        episodes: res.eval_episode_scores.len() as u32,
    })?;
    Ok(res)
}

/// Runs the protocol on an initialized agent without finishing it.
pub(crate) fn drive(
    agent: &mut dyn Agent,
    desc: &Arc<GameDescription>,
    budget: u64,
    seed: u64,
    opts: &EvalOptions,
) -> Result<EvalResult, AgentError> {
    let bounds = seat_bounds(desc, opts.seat);
    let sign = if opts.seat == Player::One { 1 } else { -1 };
    let episode_seed = |phase: Phase, k: u32| {
        let tag = match phase {
            Phase::Learn => tags::LEARN_EPISODE,
            Phase::Eval => tags::EVAL_EPISODE,
        };
        derive_seed(seed, tag, u64::from(k))
    };
    let mut res = EvalResult {
        v: 0.0,
        switched_at: None,
        eval_episode_scores: Vec::new(),
        partial_accumulated: 0,
        clock_spent: 0,
        budget,
        learn_episodes: 0,
        decisions: 0,
        passes: 0,
    };
    let mut phase = Phase::Learn;
    let mut episode = 0u32;
    let mut state = GameState::new(Arc::clone(desc), episode_seed(phase, 0));
    let mut clock = 0u64;
    let mut reward_delta = 0;
    let mut done = false;

    while clock < budget {
        let legal = state.legal_actions(opts.seat);
        let percept = Percept {
            tick: state.tick(),
            phase,
            episode,
            cells: state.observe(opts.seat),
            reward_delta,
            done,
            clock_remaining: budget - clock,
            legal: &legal,
            state: &state,
        };
        let decision = agent.decide(&percept)?;
        res.decisions += 1;
        clock = clock.saturating_add(decision.cost);

        if decision.response == Response::Switch {
            if phase == Phase::Eval {
                return Err(AgentError::DoubleSwitch);
            }
            phase = Phase::Eval;
            res.switched_at = Some(clock);
            if opts.stop_at_switch {
                break;
            }
            episode = 0;
            state = GameState::new(Arc::clone(desc), episode_seed(phase, 0));
            reward_delta = 0;
            done = true;
            continue;
        }
        if clock >= budget {
            break;
        }
        let action = resolve(decision.response, &state, opts.seat)?;
        if action == Action::Pass {
            res.passes += 1;
        }
        let out = step_seat(&mut state, opts.seat, action, opts.other);
        clock = clock.saturating_add(out.cost_units);
        reward_delta = sign * out.reward_delta;
        done = false;
        if phase == Phase::Eval {
            res.partial_accumulated += reward_delta;
        }
        if out.terminal.is_some() {
            match phase {
                Phase::Learn => res.learn_episodes += 1,
                Phase::Eval => {
                    res.eval_episode_scores.push(res.partial_accumulated);
                    res.partial_accumulated = 0;
                }
            }
            episode += 1;
            state = GameState::new(Arc::clone(desc), episode_seed(phase, episode));
            done = true;
        }
    }

    res.clock_spent = clock.min(budget);
    res.finish(bounds);
    Ok(res)
}
