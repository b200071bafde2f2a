//! Two-player matches and an Elo ladder.
//!
//! Each side first runs its own learning phase against a random stand-in
//! for the other seat, on its own virtual clock. After both have switched
//! (or run out of budget) one live head-to-head evaluation episode is
//! played; a side whose clock is spent only passes.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, AgentError, Outcome as AgentOutcome, Percept, Phase, Response};
use crate::engine::{Action, Control, GameState, Player, Terminal};
use crate::gdl::GameDescription;
use crate::measure::{drive, game_info, normalize, resolve, seat_bounds, EvalOptions};
use crate::seed::{derive_seed, tags};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatchOutcome {
    WinA,
    WinB,
    Draw,
}

impl MatchOutcome {
    /// Elo score of side A.
    pub fn score_a(self) -> f64 {
        match self {
            MatchOutcome::WinA => 1.0,
            MatchOutcome::WinB => 0.0,
            MatchOutcome::Draw => 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub game_id: String,
    pub agent_a: String,
    pub agent_b: String,
    /// Seat taken by agent A.
    pub seat_a: u8,
    pub outcome: MatchOutcome,
    pub scores: (i32, i32),
    pub seed: u64,
    /// Set when a side lost by protocol error.
    pub forfeit: Option<String>,
}

struct Side<'a> {
    agent: &'a mut dyn Agent,
    seat: Player,
    clock: u64,
    switched: bool,
}

fn forfeit_result(
    game_id: &str,
    ids: (&str, &str),
    seat_a: Player,
    seed: u64,
    loser_is_a: bool,
    err: &AgentError,
) -> MatchResult {
    MatchResult {
        game_id: game_id.to_string(),
        agent_a: ids.0.to_string(),
        agent_b: ids.1.to_string(),
        seat_a: seat_number(seat_a),
        outcome: if loser_is_a {
            MatchOutcome::WinB
        } else {
            MatchOutcome::WinA
        },
        scores: (0, 0),
        seed,
        forfeit: Some(format!(
            "{} forfeits: {err}",
            if loser_is_a { ids.0 } else { ids.1 }
        )),
    }
}

fn seat_number(p: Player) -> u8 {
    match p {
        Player::One => 1,
        Player::Two => 2,
    }
}

/// Plays one match with `a` in `seat_a` and `b` in the other seat.
pub fn play_match(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    desc: &Arc<GameDescription>,
    game_id: &str,
    budget: u64,
    seed: u64,
    seat_a: Player,
) -> MatchResult {
    assert_eq!(desc.players, 2, "matches need a two-player game");
    let ids = (a.id().to_string(), b.id().to_string());
    let ids = (ids.0.as_str(), ids.1.as_str());
    let mut sides = [
        Side {
            agent: a,
            seat: seat_a,
            clock: 0,
            switched: false,
        },
        Side {
            agent: b,
            seat: seat_a.other(),
            clock: 0,
            switched: false,
        },
    ];

    // Learning phases, each against a random stand-in.
    for (i, side) in sides.iter_mut().enumerate() {
        let opts = EvalOptions {
            game_id: game_id.to_string(),
            seat: side.seat,
            other: Control::Random,
            stop_at_switch: true,
        };
        let side_seed = derive_seed(seed, tags::AGENT, seat_number(side.seat).into());
        let learned = side
            .agent
            .init(&game_info(desc, budget, side_seed, &opts))
            .and_then(|_| drive(side.agent, desc, budget, side_seed, &opts));
        match learned {
            Ok(r) => {
                side.switched = r.switched_at.is_some();
                side.clock = r.switched_at.unwrap_or(budget);
            }
            Err(e) => return forfeit_result(game_id, ids, seat_a, seed, i == 0, &e),
        }
    }

    // Live evaluation episode.
    let mut state = GameState::new(Arc::clone(desc), derive_seed(seed, tags::EVAL_EPISODE, 0));
    let mut last_reward = [0i32; 2];
    let mut first = true;
    while !state.is_terminal() {
        let mut actions = [Action::Pass; 2];
        for (i, side) in sides.iter_mut().enumerate() {
            if !side.switched || side.clock >= budget {
                continue;
            }
            let legal = state.legal_actions(side.seat);
            let percept = Percept {
                tick: state.tick(),
                phase: Phase::Eval,
                episode: 0,
                cells: state.observe(side.seat),
                reward_delta: last_reward[i],
                done: first,
                clock_remaining: budget - side.clock,
                legal: &legal,
                state: &state,
            };
            let decided = side.agent.decide(&percept).and_then(|d| {
                side.clock = side.clock.saturating_add(d.cost);
                match d.response {
                    Response::Switch => Err(AgentError::DoubleSwitch),
                    _ if side.clock >= budget => Ok(Action::Pass),
                    r => resolve(r, &state, side.seat),
                }
            });
            match decided {
                Ok(action) => actions[i] = action,
                Err(e) => return forfeit_result(game_id, ids, seat_a, seed, i == 0, &e),
            }
        }
        first = false;
        let (p1, p2) = if seat_a == Player::One {
            (actions[0], actions[1])
        } else {
            (actions[1], actions[0])
        };
        let out = state
            .step_with(Control::Agent(p1), Control::Agent(p2))
            .expect("actions checked for legality");
        for (i, side) in sides.iter_mut().enumerate() {
            side.clock = side.clock.saturating_add(out.cost_units);
            last_reward[i] = match side.seat {
                Player::One => out.reward_delta,
                Player::Two => -out.reward_delta,
            };
        }
    }

    let score_one = state.score();
    let winner = match state.terminal() {
        Some(Terminal::Win) => Some(Player::One),
        Some(Terminal::Lose) => Some(Player::Two),
        _ => match score_one.signum() {
            1 => Some(Player::One),
            -1 => Some(Player::Two),
            _ => None,
        },
    };
    let outcome = match winner {
        None => MatchOutcome::Draw,
        Some(p) if p == seat_a => MatchOutcome::WinA,
        Some(_) => MatchOutcome::WinB,
    };
    let score_of = |seat: Player| state.score_for(seat);
    let scores = (score_of(seat_a), score_of(seat_a.other()));
    for (i, side) in sides.iter_mut().enumerate() {
        let score = if i == 0 { scores.0 } else { scores.1 };
        let report = AgentOutcome {
            v: if side.switched {
                normalize(score, seat_bounds(desc, side.seat))
            } else {
                0.0
            },
            switched: side.switched,
            episodes: 1,
        };
        if let Err(e) = side.agent.finish(&report) {
            return forfeit_result(game_id, ids, seat_a, seed, i == 0, &e);
        }
    }
    MatchResult {
        game_id: game_id.to_string(),
        agent_a: ids.0.to_string(),
        agent_b: ids.1.to_string(),
        seat_a: seat_number(seat_a),
        outcome,
        scores,
        seed,
        forfeit: None,
    }
}

/// Plays both seatings of a pairing with the same seed.
pub fn play_pairing(
    a: &mut dyn Agent,
    b: &mut dyn Agent,
    desc: &Arc<GameDescription>,
    game_id: &str,
    budget: u64,
    seed: u64,
) -> [MatchResult; 2] {
    [
        play_match(a, b, desc, game_id, budget, seed, Player::One),
        play_match(a, b, desc, game_id, budget, seed, Player::Two),
    ]
}

/// Rating updates are rounded to multiples of this step, so that every
/// rating stays exactly representable and rating sums are conserved
/// without floating-point drift.
pub const ELO_QUANTUM: f64 = 1.0 / (1u64 << 20) as f64;

fn quantize(x: f64) -> f64 {
    (x / ELO_QUANTUM).round() * ELO_QUANTUM
}

/// Expected score of A against B.
pub fn elo_expected(ra: f64, rb: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf((rb - ra) / 400.0))
}

pub fn elo_update(ra: f64, rb: f64, outcome: MatchOutcome, k_factor: f64) -> (f64, f64) {
    assert!(k_factor > 0.0);
    let delta = quantize(k_factor * (outcome.score_a() - elo_expected(ra, rb)));
    (ra + delta, rb - delta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub agent: String,
    pub elo: f64,
    pub games_played: u32,
}

/// A ladder participant: an id and a way to make fresh instances.
pub struct Entrant {
    pub id: String,
    pub make: Box<dyn Fn() -> Box<dyn Agent> + Send + Sync>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub index: usize,
    pub round: u32,
    pub result: MatchResult,
    pub before: (f64, f64),
    pub after: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub rounds: u32,
    pub k_factor: f64,
    pub initial: f64,
    pub budget: u64,
    pub master_seed: u64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            rounds: 1,
            k_factor: 32.0,
            initial: 1000.0,
            budget: 1000,
            master_seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    pub ratings: Vec<Rating>,
    pub matches: Vec<LadderEntry>,
}

impl Ladder {
    /// Ratings sorted best first (ties by id).
    pub fn ranking(&self) -> Vec<Rating> {
        let mut r = self.ratings.clone();
        r.sort_by(|a, b| b.elo.total_cmp(&a.elo).then_with(|| a.agent.cmp(&b.agent)));
        r
    }
}

/// Round-robin over every pair of entrants and every game, both seatings.
///
/// Matches of a round are played in parallel; ratings are then updated in
/// schedule order.
pub fn run_ladder(
    entrants: &[Entrant],
    games: &[(String, Arc<GameDescription>)],
    cfg: &LadderConfig,
) -> Ladder {
    assert!(entrants.len() >= 2, "a ladder needs at least two agents");
    let mut ratings: Vec<Rating> = entrants
        .iter()
        .map(|e| Rating {
            agent: e.id.clone(),
            elo: quantize(cfg.initial),
            games_played: 0,
        })
        .collect();
    // (round, game, entrant i, entrant j)
    let mut schedule: Vec<(u32, usize, usize, usize)> = Vec::new();
    for round in 0..cfg.rounds {
        for (g, _) in games.iter().enumerate() {
            for i in 0..entrants.len() {
                for j in i + 1..entrants.len() {
                    schedule.push((round, g, i, j));
                }
            }
        }
    }
    let mut matches = Vec::new();
    for round in 0..cfg.rounds {
        let todo: Vec<(usize, &_)> = schedule
            .iter()
            .enumerate()
            .filter(|(_, s)| s.0 == round)
            .collect();
        let played: Vec<(usize, usize, [MatchResult; 2])> = todo
            .par_iter()
            .map(|&(idx, &(_, g, i, j))| {
                let (game_id, desc) = &games[g];
                let mut a = (entrants[i].make)();
                let mut b = (entrants[j].make)();
                let seed = derive_seed(cfg.master_seed, tags::MATCH, idx as u64);
                let pair = play_pairing(a.as_mut(), b.as_mut(), desc, game_id, cfg.budget, seed);
                (i, j, pair)
            })
            .collect();
        for (i, j, pair) in played {
            for result in pair {
                let before = (ratings[i].elo, ratings[j].elo);
                let after = elo_update(before.0, before.1, result.outcome, cfg.k_factor);
                ratings[i].elo = after.0;
                ratings[j].elo = after.1;
                ratings[i].games_played += 1;
                ratings[j].games_played += 1;
                matches.push(LadderEntry {
                    index: matches.len(),
                    round,
                    result,
                    before,
                    after,
                });
            }
        }
    }
    Ladder { ratings, matches }
}
