use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gdl::{self, compute_bounds, ChoiceSource, GameDescription, OpponentPolicy, Piece};

const GOAL_GAME: &str = "(game (grid 4 4) (players 1) (obs full) (noise 0) (horizon 16) (init (avatar 0 0) (goal 3 3)) (actions up down left right) (rules (when (overlap avatar goal) (end win))) (score 0 4 0))";

fn game(text: &str) -> Arc<GameDescription> {
    Arc::new(gdl::parse(text).unwrap())
}

struct Rng8(ChaCha8Rng);

impl ChoiceSource for Rng8 {
    fn choose(&mut self, arity: u32) -> u32 {
        self.0.random_range(0..arity)
    }
}

fn sampled(seed: u64) -> Arc<GameDescription> {
    Arc::new(gdl::derive(&mut Rng8(ChaCha8Rng::seed_from_u64(seed))))
}

#[test]
fn new_episode_copies_layout() {
    for seed in [0, 1, u64::MAX] {
        let s = new_episode(game(GOAL_GAME), seed);
        assert_eq!(s.avatar(), (0, 0));
        assert_eq!(s.positions(Piece::Goal), vec![(3, 3)]);
        assert_eq!(s.tick(), 0);
        assert_eq!(s.score(), 0);
        assert!(!s.is_terminal());
    }
}

#[test]
fn same_seed_gives_identical_states() {
    let d = game(GOAL_GAME);
    assert_eq!(new_episode(d.clone(), 42), new_episode(d, 42));
}

#[test]
fn noiseless_trajectory_ignores_seed() {
    let d = game(GOAL_GAME);
    let mut chooser = ChaCha8Rng::seed_from_u64(3);
    let mut a = new_episode(d.clone(), 1);
    let mut b = new_episode(d, 999);
    while !a.is_terminal() {
        let legal = a.legal_actions(Player::One);
        let act = legal[chooser.random_range(0..legal.len())];
        assert_eq!(a.step(act).unwrap(), b.step(act).unwrap());
        assert_eq!(a.observe(Player::One), b.observe(Player::One));
    }
    assert!(b.is_terminal());
}

#[test]
fn stepping_onto_goal_wins() {
    let d = game(&GOAL_GAME.replace("(avatar 0 0)", "(avatar 2 3)"));
    let mut s = new_episode(d, 0);
    let out = s.step(Action::Right).unwrap();
    assert_eq!(out.reward_delta, 4);
    assert_eq!(out.terminal, Some(Terminal::Win));
    assert_eq!(out.events, vec![0]);
    assert_eq!(out.cost_units, 2);
    assert_eq!(s.step(Action::Left), Err(EngineError::SteppedTerminal));
}

#[test]
fn walls_and_edges_block() {
    let d = game("(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (wall 1 0)) (actions up down left right) (rules) (score -1 1 0))");
    let mut s = new_episode(d, 0);
    let out = s.step(Action::Right).unwrap();
    assert_eq!(s.avatar(), (0, 0));
    assert_eq!(out.reward_delta, -1);
    s.step(Action::Up).unwrap();
    s.step(Action::Left).unwrap();
    assert_eq!(s.avatar(), (0, 0));
    s.step(Action::Down).unwrap();
    assert_eq!(s.avatar(), (0, 1));
}

#[test]
fn illegal_actions_are_rejected_without_side_effects() {
    let d = game(GOAL_GAME);
    let mut s = new_episode(d, 0);
    let before = s.clone();
    assert_eq!(
        s.step(Action::Stay),
        Err(EngineError::IllegalAction {
            action: Action::Stay,
            player: Player::One
        })
    );
    assert!(s.step_joint(Action::Up, Action::Up).is_err());
    assert_eq!(s, before);
    // pass is always accepted
    s.step(Action::Pass).unwrap();
    assert_eq!(s.avatar(), (0, 0));
}

#[test]
fn horizon_ends_without_bonus() {
    let d = game(&GOAL_GAME.replace("(horizon 16)", "(horizon 8)"));
    let mut s = new_episode(d, 0);
    let mut last = None;
    for _ in 0..8 {
        last = Some(s.step(Action::Up).unwrap());
    }
    let last = last.unwrap();
    assert_eq!(last.terminal, Some(Terminal::HorizonHit));
    assert_eq!(last.reward_delta, 0);
    assert_eq!(s.tick(), 8);
}

#[test]
fn observation_glyphs() {
    let d = game("(game (grid 2 2) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (goal 1 1)) (actions up) (rules) (score 0 1 0))");
    assert_eq!(new_episode(d, 0).observe(Player::One), "A..G");

    let d = game("(game (grid 3 2) (players 2) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (wall 1 0) (item 2 0) (hazard 0 1) (goal 1 1) (opp 2 1) (goal 2 1)) (actions up) (rules) (score 0 1 0))");
    let s = new_episode(d, 0);
    assert_eq!(s.observe(Player::One), "A#*!GO");
    assert_eq!(s.observe(Player::Two), "O#*!GA");
    assert_eq!(s.render(), "A#*\n!GO");
}

#[test]
fn glyph_priority() {
    let d = game("(game (grid 2 2) (players 1) (obs full) (noise 0) (horizon 8) (opponent random) (init (avatar 0 0) (hazard 0 0) (item 1 0) (goal 1 0) (wall 1 0) (opp 0 1) (hazard 0 1) (goal 1 1) (wall 1 1)) (actions up) (rules) (score 0 1 0))");
    assert_eq!(new_episode(d, 0).observe(Player::One), "A*OG");
}

#[test]
fn radius_observation_pads_with_walls() {
    let d = game(&GOAL_GAME.replace("(obs full)", "(obs radius 1)"));
    let obs = new_episode(d, 0).observe(Player::One);
    assert_eq!(obs.len(), 9);
    assert_eq!(obs, "####A.#..");
}

#[test]
fn full_observation_length_is_cell_count() {
    for seed in 0..300 {
        let d = sampled(seed);
        if d.obs_mode != gdl::ObsMode::Full {
            continue;
        }
        let s = new_episode(d.clone(), seed);
        assert_eq!(s.observe(Player::One).len(), d.cells());
    }
}

fn opp_game(policy: &str, avatar: (u8, u8), opp: (u8, u8)) -> Arc<GameDescription> {
    game(&format!(
        "(game (grid 4 4) (players 1) (obs full) (noise 0) (horizon 16) (opponent {policy}) (init (avatar {} {}) (opp {} {})) (actions stay) (rules) (score 0 1 0))",
        avatar.0, avatar.1, opp.0, opp.1
    ))
}

#[test]
fn chase_moves_toward_target() {
    let mut s = new_episode(opp_game("chase avatar", (2, 0), (0, 0)), 0);
    assert_eq!(
        s.opponent_action(OpponentPolicy::Chase(Piece::Avatar)),
        Action::Right
    );
}

#[test]
fn cornered_flee_stays() {
    // Legal moves from (0,0): down, right, stay. Distances to (1,1): 1, 1, 2.
    let mut s = new_episode(opp_game("flee avatar", (1, 1), (0, 0)), 0);
    assert_eq!(
        s.opponent_action(OpponentPolicy::Flee(Piece::Avatar)),
        Action::Stay
    );
}

#[test]
fn greedy_matches_chase_and_missing_target_stays() {
    let mut s = new_episode(opp_game("greedy avatar", (3, 3), (0, 0)), 0);
    assert_eq!(
        s.opponent_action(OpponentPolicy::Greedy(Piece::Avatar)),
        s.opponent_action(OpponentPolicy::Chase(Piece::Avatar))
    );
    assert_eq!(
        s.opponent_action(OpponentPolicy::Chase(Piece::Goal)),
        Action::Stay
    );
}

#[test]
fn random_opponent_is_uniform_on_open_cell() {
    let mut s = new_episode(opp_game("random", (0, 0), (2, 2)), 7);
    let n = 10_000;
    let mut counts = [0usize; 5];
    for _ in 0..n {
        let a = s.opponent_action(OpponentPolicy::Random);
        counts[Action::MOVES.iter().position(|&m| m == a).unwrap()] += 1;
    }
    let p = 0.2;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - n as f64 * p).abs() < 3.0 * sigma, "{counts:?}");
    }
}

#[test]
fn scripted_opponent_moves_after_agent() {
    let d = opp_game("chase avatar", (3, 0), (0, 0));
    let mut s = new_episode(d, 0);
    s.step(Action::Stay).unwrap();
    assert_eq!(s.opp(), Some((1, 0)));
}

#[test]
fn legal_action_sets() {
    let s = new_episode(game(GOAL_GAME), 0);
    assert_eq!(
        s.legal_actions(Player::One),
        vec![Action::Up, Action::Down, Action::Left, Action::Right]
    );

    let d = game(&GOAL_GAME.replace("(avatar 0 0)", "(avatar 2 3)"));
    let mut s = new_episode(d, 0);
    s.step(Action::Right).unwrap();
    assert!(s.legal_actions(Player::One).is_empty());

    // 2x2 board, avatar and opp leave 2 empty cells; add one wall -> 1 empty.
    let d = game("(game (grid 3 2) (players 2) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (wall 1 0) (wall 2 0) (opp 2 1)) (actions place) (rules) (score 0 1 0))");
    let s = new_episode(d, 0);
    let legal = s.legal_actions(Player::One);
    assert_eq!(
        legal,
        vec![Action::Place { x: 0, y: 1 }, Action::Place { x: 1, y: 1 }]
    );
    let d = game("(game (grid 3 2) (players 2) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (wall 1 0) (opp 2 1)) (actions place) (rules) (score 0 1 0))");
    assert_eq!(new_episode(d, 0).legal_actions(Player::Two).len(), 3);
}

#[test]
fn single_player_place_targets_are_adjacent() {
    let d = game("(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 1 1) (wall 1 0)) (actions stay place) (rules (when (count item ge 2) (spawn goal corner) (end win))) (score 0 1 0))");
    let mut s = new_episode(d, 0);
    assert_eq!(
        s.legal_actions(Player::One),
        vec![
            Action::Stay,
            Action::Place { x: 0, y: 1 },
            Action::Place { x: 2, y: 1 },
            Action::Place { x: 1, y: 2 },
        ]
    );
    assert!(s.step(Action::Place { x: 0, y: 0 }).is_err());
    s.step(Action::Place { x: 0, y: 1 }).unwrap();
    let out = s.step(Action::Place { x: 2, y: 1 }).unwrap();
    assert_eq!(out.terminal, Some(Terminal::Win));
    assert_eq!(s.positions(Piece::Item), vec![(0, 1), (2, 1)]);
    assert_eq!(s.positions(Piece::Goal), vec![(0, 0)]);
}

#[test]
fn simultaneous_placement_resolves_player_one_first() {
    let d = game("(game (grid 2 2) (players 2) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (opp 1 1)) (actions place) (rules) (score 0 1 0))");
    let mut s = new_episode(d, 0);
    let t = Action::Place { x: 1, y: 0 };
    s.step_joint(t, t).unwrap();
    assert_eq!(s.positions(Piece::Item), vec![(1, 0)]);
    assert!(s.positions(Piece::Hazard).is_empty());
}

#[test]
fn collecting_removes_only_the_touched_item() {
    let d = game("(game (grid 4 2) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (item 1 0) (item 3 0)) (actions left right) (rules (when (overlap avatar item) (remove item) (reward 2)) (when (count item eq 0) (end win))) (score 0 3 0))");
    let mut s = new_episode(d, 0);
    let out = s.step(Action::Right).unwrap();
    assert_eq!(out.reward_delta, 2);
    assert_eq!(out.events, vec![0]);
    assert_eq!(s.positions(Piece::Item), vec![(3, 0)]);
    s.step(Action::Right).unwrap();
    let out = s.step(Action::Right).unwrap();
    assert_eq!(out.terminal, Some(Terminal::Win));
    assert_eq!(out.reward_delta, 5);
    assert_eq!(s.score(), 7);
}

#[test]
fn rules_stop_at_first_end_and_cost_counts_evaluations() {
    let d = game("(game (grid 2 2) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0)) (actions stay) (rules (when (tick ge 0) (reward 1)) (when (tick ge 1) (end lose)) (when (tick ge 0) (reward 3))) (score 0 2 -2))");
    let mut s = new_episode(d, 0);
    let out = s.step(Action::Stay).unwrap();
    assert_eq!((out.reward_delta, out.cost_units), (4, 4));
    let out = s.step(Action::Stay).unwrap();
    assert_eq!(out.terminal, Some(Terminal::Lose));
    assert_eq!(out.events, vec![0, 1]);
    assert_eq!((out.reward_delta, out.cost_units), (1 - 2, 3));
}

#[test]
fn teleport_to_corner_and_adjacency() {
    let d = game("(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 1 1) (hazard 2 1)) (actions stay) (rules (when (adjacent avatar hazard) (teleport avatar corner))) (score 0 1 0))");
    let mut s = new_episode(d, 0);
    s.step(Action::Stay).unwrap();
    assert_eq!(s.avatar(), (0, 0));
    s.step(Action::Stay).unwrap();
    assert_eq!(s.avatar(), (0, 0));
}

#[test]
fn random_spawn_depends_on_seed_only() {
    let d = game("(game (grid 8 8) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0)) (actions stay) (rules (when (tick ge 0) (spawn item random))) (score 0 1 0))");
    let run = |seed| {
        let mut s = new_episode(d.clone(), seed);
        while !s.is_terminal() {
            s.step(Action::Stay).unwrap();
        }
        s.positions(Piece::Item)
    };
    assert_eq!(run(5), run(5));
    assert_eq!(run(5).len(), 8);
    assert_ne!(run(5), run(6));
}

#[test]
fn episode_costs_and_scores_stay_in_bounds() {
    for seed in 0..200 {
        let d = sampled(seed);
        let bounds = compute_bounds(&d);
        for ep in 0..5 {
            let stats = random_episode(&d, seed * 31 + ep);
            assert!(
                bounds.contains(stats.score),
                "seed {seed}: {stats:?} {bounds:?}"
            );
            assert!(stats.ticks <= d.horizon);
            let max_cost = u64::from(stats.ticks) * (1 + d.rules.len() as u64);
            assert!(stats.cost_units >= u64::from(stats.ticks));
            assert!(stats.cost_units <= max_cost);
        }
    }
}

#[test]
fn trajectory_step_serializes_actions_as_symbols() {
    let step = TrajectoryStep {
        tick: 3,
        action: Action::Place { x: 1, y: 2 },
        observation: "A..".into(),
        reward: -1,
    };
    let json = serde_json::to_string(&step).unwrap();
    assert_eq!(
        json,
        r#"{"tick":3,"action":"place:1,2","observation":"A..","reward":-1}"#
    );
    assert_eq!(serde_json::from_str::<TrajectoryStep>(&json).unwrap(), step);
}

#[test]
fn action_symbols_parse() {
    for a in [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Stay,
        Action::Pass,
        Action::Place { x: 7, y: 0 },
    ] {
        assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
    }
    assert!("place".parse::<Action>().is_err());
    assert!("jump".parse::<Action>().is_err());
}

proptest! {
    #[test]
    fn replay_is_deterministic(game_seed in 0u64..500, ep_seed: u64, picks in prop::collection::vec(any::<u16>(), 1..130)) {
        let d = sampled(game_seed);
        let run = || {
            let mut s = new_episode(d.clone(), ep_seed);
            let mut trace = Vec::new();
            for &p in &picks {
                if s.is_terminal() {
                    break;
                }
                let legal = s.legal_actions(Player::One);
                let a = if legal.is_empty() { Action::Pass } else { legal[p as usize % legal.len()] };
                trace.push((s.step(a).unwrap(), s.observe(Player::One)));
            }
            (trace, s)
        };
        let (a, sa) = run();
        let (b, sb) = run();
        prop_assert_eq!(a, b);
        prop_assert_eq!(sa, sb);
    }
}
