//! Test-side oracles that share no code with the engine.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use ggb_core::engine::{Action, GameState, Player};
use ggb_core::gdl::{
    ActionKind, Condition, Effect, GameDescription, GameResult, Noise, OpponentPolicy, Piece,
    SpawnMode,
};

type Cell = (i32, i32);

#[derive(Clone, PartialEq, Eq, Hash)]
struct Board {
    tick: u16,
    avatar: Cell,
    opp: Option<Cell>,
    walls: BTreeSet<Cell>,
    items: BTreeSet<Cell>,
    hazards: BTreeSet<Cell>,
    goals: BTreeSet<Cell>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum End {
    Win,
    Lose,
    Draw,
}

/// A set of weighted outcomes.
type Dist<T> = Vec<(f64, T)>;

/// Exact expected episode score of a uniformly random player one, computed by
/// exhaustive expansion of every random branch (agent choice, move noise,
/// random opponent, random second player, random spawns and teleports).
pub struct Reference<'a> {
    d: &'a GameDescription,
    memo: HashMap<Board, f64>,
}

impl<'a> Reference<'a> {
    pub fn new(d: &'a GameDescription) -> Self {
        Reference {
            d,
            memo: HashMap::new(),
        }
    }

    pub fn expected_score(d: &GameDescription) -> f64 {
        let mut r = Reference::new(d);
        let start = r.initial();
        r.value(&start)
    }

    fn initial(&self) -> Board {
        let mut b = Board {
            tick: 0,
            avatar: (0, 0),
            opp: None,
            walls: BTreeSet::new(),
            items: BTreeSet::new(),
            hazards: BTreeSet::new(),
            goals: BTreeSet::new(),
        };
        for p in &self.d.layout {
            let c = (i32::from(p.x), i32::from(p.y));
            match p.piece {
                Piece::Avatar => b.avatar = c,
                Piece::Opp => b.opp = Some(c),
                Piece::Wall => {
                    b.walls.insert(c);
                }
                Piece::Item => {
                    b.items.insert(c);
                }
                Piece::Hazard => {
                    b.hazards.insert(c);
                }
                Piece::Goal => {
                    b.goals.insert(c);
                }
            }
        }
        b
    }

    fn w(&self) -> i32 {
        i32::from(self.d.grid_w)
    }

    fn h(&self) -> i32 {
        i32::from(self.d.grid_h)
    }

    fn inside(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && c.0 < self.w() && c.1 < self.h()
    }

    /// Row-major cell order.
    fn cells(&self) -> Vec<Cell> {
        let mut v = Vec::new();
        for y in 0..self.h() {
            for x in 0..self.w() {
                v.push((x, y));
            }
        }
        v
    }

    fn cells_of(b: &Board, p: Piece) -> BTreeSet<Cell> {
        match p {
            Piece::Avatar => [b.avatar].into_iter().collect(),
            Piece::Opp => b.opp.into_iter().collect(),
            Piece::Wall => b.walls.clone(),
            Piece::Item => b.items.clone(),
            Piece::Hazard => b.hazards.clone(),
            Piece::Goal => b.goals.clone(),
        }
    }

    fn set_mut(b: &mut Board, p: Piece) -> &mut BTreeSet<Cell> {
        match p {
            Piece::Wall => &mut b.walls,
            Piece::Item => &mut b.items,
            Piece::Hazard => &mut b.hazards,
            Piece::Goal => &mut b.goals,
            _ => unreachable!("not a static piece"),
        }
    }

    fn is_empty(b: &Board, c: Cell) -> bool {
        b.avatar != c
            && b.opp != Some(c)
            && !b.walls.contains(&c)
            && !b.items.contains(&c)
            && !b.hazards.contains(&c)
            && !b.goals.contains(&c)
    }

    fn empties(&self, b: &Board) -> Vec<Cell> {
        self.cells()
            .into_iter()
            .filter(|&c| Self::is_empty(b, c))
            .collect()
    }

    fn step_to(&self, b: &Board, from: Cell, a: ActionKind) -> Cell {
        let (dx, dy) = match a {
            ActionKind::Up => (0, -1),
            ActionKind::Down => (0, 1),
            ActionKind::Left => (-1, 0),
            ActionKind::Right => (1, 0),
            _ => (0, 0),
        };
        let to = (from.0 + dx, from.1 + dy);
        if !self.inside(to) || b.walls.contains(&to) {
            from
        } else {
            to
        }
    }

    fn touching(a: Cell, b: Cell) -> bool {
        (a.0 - b.0).abs() + (a.1 - b.1).abs() == 1
    }

    /// Choices for a player controlled by uniform random choice.
    fn random_choices(&self, b: &Board, who: Player) -> Vec<Choice> {
        let me = match who {
            Player::One => b.avatar,
            Player::Two => b.opp.expect("second player"),
        };
        let mut out = Vec::new();
        for &k in &self.d.actions {
            if k == ActionKind::Place {
                for c in self.cells() {
                    let ok = Self::is_empty(b, c) && (self.d.players == 2 || Self::touching(c, me));
                    if ok {
                        out.push(Choice::Place(c));
                    }
                }
            } else {
                out.push(Choice::Move(k));
            }
        }
        out
    }

    /// Agent choice after noise.
    fn noisy(&self, c: Choice) -> Dist<Choice> {
        let p = match self.d.noise {
            Noise::Zero => 0.0,
            Noise::Sixteenth => 1.0 / 16.0,
            Noise::Eighth => 2.0 / 16.0,
            Noise::Quarter => 4.0 / 16.0,
        };
        match c {
            Choice::Move(_) if p > 0.0 => {
                let moves: Vec<ActionKind> = self
                    .d
                    .actions
                    .iter()
                    .copied()
                    .filter(|&k| k != ActionKind::Place)
                    .collect();
                let mut out = vec![(1.0 - p, c)];
                for m in &moves {
                    out.push((p / moves.len() as f64, Choice::Move(*m)));
                }
                out
            }
            _ => vec![(1.0, c)],
        }
    }

    fn opponent_choices(&self, b: &Board) -> Dist<Choice> {
        let opp = b.opp.expect("opp");
        let order = [
            ActionKind::Up,
            ActionKind::Down,
            ActionKind::Left,
            ActionKind::Right,
            ActionKind::Stay,
        ];
        let open: Vec<ActionKind> = order
            .into_iter()
            .filter(|&k| k == ActionKind::Stay || self.step_to(b, opp, k) != opp)
            .collect();
        let (target, far) = match self.d.opponent.expect("policy") {
            OpponentPolicy::Random => {
                let n = open.len() as f64;
                return open
                    .into_iter()
                    .map(|k| (1.0 / n, Choice::Move(k)))
                    .collect();
            }
            OpponentPolicy::Chase(t) | OpponentPolicy::Greedy(t) => (t, false),
            OpponentPolicy::Flee(t) => (t, true),
        };
        let targets = Self::cells_of(b, target);
        if targets.is_empty() {
            return vec![(1.0, Choice::Move(ActionKind::Stay))];
        }
        let dist = |c: Cell| {
            targets
                .iter()
                .map(|t| (t.0 - c.0).abs() + (t.1 - c.1).abs())
                .min()
                .unwrap()
        };
        let mut best = open[0];
        for &k in &open {
            let (d, bd) = (
                dist(self.step_to(b, opp, k)),
                dist(self.step_to(b, opp, best)),
            );
            if (far && d > bd) || (!far && d < bd) {
                best = k;
            }
        }
        vec![(1.0, Choice::Move(best))]
    }

    fn act(&self, b: &mut Board, who: Player, c: Choice) {
        match c {
            Choice::Pass => {}
            Choice::Place(cell) => {
                if Self::is_empty(b, cell) {
                    match who {
                        Player::One => b.items.insert(cell),
                        Player::Two => b.hazards.insert(cell),
                    };
                }
            }
            Choice::Move(k) => match who {
                Player::One => b.avatar = self.step_to(b, b.avatar, k),
                Player::Two => b.opp = Some(self.step_to(b, b.opp.unwrap(), k)),
            },
        }
    }

    fn value(&mut self, b: &Board) -> f64 {
        if let Some(&v) = self.memo.get(b) {
            return v;
        }
        let mut total = 0.0;
        let agent = self.random_choices(b, Player::One);
        let agent: Dist<Choice> = if agent.is_empty() {
            vec![(1.0, Choice::Pass)]
        } else {
            let n = agent.len() as f64;
            agent
                .into_iter()
                .flat_map(|c| self.noisy(c).into_iter().map(move |(p, c)| (p / n, c)))
                .collect()
        };
        for (pa, a) in agent {
            let mut after_one = b.clone();
            self.act(&mut after_one, Player::One, a);
            let second: Dist<Choice> = match (b.opp, self.d.opponent, self.d.players) {
                (None, _, _) => vec![(1.0, Choice::Pass)],
                (Some(_), Some(_), _) => self.opponent_choices(b),
                (Some(_), None, _) => {
                    let c = self.random_choices(b, Player::Two);
                    if c.is_empty() {
                        vec![(1.0, Choice::Pass)]
                    } else {
                        let n = c.len() as f64;
                        c.into_iter().map(|c| (1.0 / n, c)).collect()
                    }
                }
            };
            for (po, o) in second {
                let mut moved = after_one.clone();
                self.act(&mut moved, Player::Two, o);
                for (pr, (next, reward, end)) in self.rules(moved) {
                    let p = pa * po * pr;
                    let mut r = f64::from(reward + i32::from(self.d.scoring.step_delta));
                    match end {
                        Some(End::Win) => r += f64::from(self.d.scoring.win_reward),
                        Some(End::Lose) => r += f64::from(self.d.scoring.lose_reward),
                        _ => {}
                    }
                    let tail = if end.is_some() || next.tick >= self.d.horizon {
                        0.0
                    } else {
                        self.value(&next)
                    };
                    total += p * (r + tail);
                }
            }
        }
        self.memo.insert(b.clone(), total);
        total
    }

    /// Applies every rule; returns the distribution over (board with tick
    /// advanced, rule reward, terminal).
    fn rules(&self, b: Board) -> Dist<(Board, i32, Option<End>)> {
        let mut frontier: Dist<(Board, i32, Option<End>)> = vec![(1.0, (b, 0, None))];
        for rule in &self.d.rules {
            let mut next = Vec::new();
            for (p, (b, r, end)) in frontier {
                if end.is_some() {
                    next.push((p, (b, r, end)));
                    continue;
                }
                let Some(scope) = self.witness(&b, rule.condition) else {
                    next.push((p, (b, r, end)));
                    continue;
                };
                let mut branch: Dist<(Board, i32, Option<End>)> = vec![(p, (b, r, None))];
                for e in &rule.effects {
                    branch = branch
                        .into_iter()
                        .flat_map(|(p, (b, r, end))| {
                            self.effect(b, r, end, *e, &scope)
                                .into_iter()
                                .map(move |(q, x)| (p * q, x))
                        })
                        .collect();
                }
                next.extend(branch);
            }
            frontier = next;
        }
        for (_, (b, _, _)) in frontier.iter_mut() {
            b.tick += 1;
        }
        frontier
    }

    fn witness(&self, b: &Board, c: Condition) -> Option<BTreeSet<Cell>> {
        let cmp = |op: ggb_core::gdl::Cmp, l: i64, r: i64| match op {
            ggb_core::gdl::Cmp::Lt => l < r,
            ggb_core::gdl::Cmp::Le => l <= r,
            ggb_core::gdl::Cmp::Eq => l == r,
            ggb_core::gdl::Cmp::Ge => l >= r,
            ggb_core::gdl::Cmp::Gt => l > r,
        };
        match c {
            Condition::Overlap(p, q) => {
                if p == q {
                    return None;
                }
                let s: BTreeSet<Cell> = Self::cells_of(b, p)
                    .intersection(&Self::cells_of(b, q))
                    .copied()
                    .collect();
                (!s.is_empty()).then_some(s)
            }
            Condition::Adjacent(p, q) => {
                let (ps, qs) = (Self::cells_of(b, p), Self::cells_of(b, q));
                let mut s = BTreeSet::new();
                for &a in &ps {
                    for &c in &qs {
                        if Self::touching(a, c) {
                            s.insert(a);
                            s.insert(c);
                        }
                    }
                }
                (!s.is_empty()).then_some(s)
            }
            Condition::Count(p, op, n) => cmp(op, Self::cells_of(b, p).len() as i64, i64::from(n))
                .then(|| self.cells().into_iter().collect()),
            Condition::Tick(op, n) => {
                cmp(op, i64::from(b.tick), i64::from(n)).then(|| self.cells().into_iter().collect())
            }
        }
    }

    fn destinations(&self, b: &Board, mode: SpawnMode) -> Dist<Option<Cell>> {
        match mode {
            SpawnMode::Random => {
                let e = self.empties(b);
                if e.is_empty() {
                    return vec![(1.0, None)];
                }
                let n = e.len() as f64;
                e.into_iter().map(|c| (1.0 / n, Some(c))).collect()
            }
            SpawnMode::Corner => {
                let (w, h) = (self.w(), self.h());
                let c = [(0, 0), (w - 1, 0), (0, h - 1), (w - 1, h - 1)]
                    .into_iter()
                    .find(|&c| Self::is_empty(b, c));
                vec![(1.0, c)]
            }
        }
    }

    fn effect(
        &self,
        b: Board,
        r: i32,
        end: Option<End>,
        e: Effect,
        scope: &BTreeSet<Cell>,
    ) -> Dist<(Board, i32, Option<End>)> {
        match e {
            Effect::Reward(d) => vec![(1.0, (b, r + i32::from(d), end))],
            Effect::End(res) => {
                let res = match res {
                    GameResult::Win => End::Win,
                    GameResult::Lose => End::Lose,
                    GameResult::Draw => End::Draw,
                };
                vec![(1.0, (b, r, end.or(Some(res))))]
            }
            Effect::Remove(p) => {
                let mut b = b;
                if p.is_static() {
                    Self::set_mut(&mut b, p).retain(|c| !scope.contains(c));
                }
                vec![(1.0, (b, r, end))]
            }
            Effect::Spawn(p, mode) => self
                .destinations(&b, mode)
                .into_iter()
                .map(|(q, c)| {
                    let mut b = b.clone();
                    if let Some(c) = c {
                        Self::set_mut(&mut b, p).insert(c);
                    }
                    (q, (b, r, end))
                })
                .collect(),
            Effect::Teleport(p, mode) => {
                let movers: Vec<Cell> = {
                    // engine iterates in row-major order
                    let mut v: Vec<Cell> = Self::cells_of(&b, p)
                        .into_iter()
                        .filter(|c| scope.contains(c))
                        .collect();
                    v.sort_by_key(|c| (c.1, c.0));
                    v
                };
                let mut dist: Dist<Board> = vec![(1.0, b)];
                for from in movers {
                    dist = dist
                        .into_iter()
                        .flat_map(|(q, b)| {
                            self.destinations(&b, mode)
                                .into_iter()
                                .map(move |(q2, to)| {
                                    let mut b = b.clone();
                                    if let Some(to) = to {
                                        match p {
                                            Piece::Avatar => b.avatar = to,
                                            Piece::Opp => b.opp = Some(to),
                                            _ => {
                                                let s = Self::set_mut(&mut b, p);
                                                s.remove(&from);
                                                s.insert(to);
                                            }
                                        }
                                    }
                                    (q * q2, b)
                                })
                        })
                        .collect();
                }
                dist.into_iter().map(|(q, b)| (q, (b, r, end))).collect()
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Choice {
    Move(ActionKind),
    Place(Cell),
    Pass,
}

/// Exact expectation by branching the real engine over player one's choices.
///
/// Only for games where the engine draws no randomness of its own apart from
/// move noise, which is expanded explicitly on a noise-free copy.
pub fn engine_expected_score(desc: &GameDescription) -> f64 {
    assert!(engine_enumerable(desc), "game consumes engine randomness");
    let noise = desc.noise.probability();
    let mut quiet = desc.clone();
    quiet.noise = Noise::Zero;
    let moves: Vec<Action> = desc.move_actions().map(Action::from).collect();
    fn go(s: &GameState, noise: f64, moves: &[Action]) -> f64 {
        let legal = s.legal_actions(Player::One);
        let picks: Vec<(f64, Action)> = if legal.is_empty() {
            vec![(1.0, Action::Pass)]
        } else {
            let n = legal.len() as f64;
            legal
                .iter()
                .flat_map(|&a| {
                    if a.is_move() && noise > 0.0 {
                        let m = moves.len() as f64;
                        let mut v = vec![((1.0 - noise) / n, a)];
                        v.extend(moves.iter().map(|&x| (noise / m / n, x)));
                        v
                    } else {
                        vec![(1.0 / n, a)]
                    }
                })
                .collect()
        };
        let mut total = 0.0;
        for (p, a) in picks {
            let mut next = s.clone();
            let out = next.step(a).expect("legal");
            let tail = if next.is_terminal() {
                0.0
            } else {
                go(&next, noise, moves)
            };
            total += p * (f64::from(out.reward_delta) + tail);
        }
        total
    }
    go(&GameState::new(Arc::new(quiet), 0), noise, &moves)
}

pub fn engine_enumerable(desc: &GameDescription) -> bool {
    let random_effect = desc.rules.iter().any(|r| {
        r.effects.iter().any(|e| {
            matches!(
                e,
                Effect::Spawn(_, SpawnMode::Random) | Effect::Teleport(_, SpawnMode::Random)
            )
        })
    });
    let random_second = desc.needs_opp()
        && !matches!(
            desc.opponent,
            Some(OpponentPolicy::Chase(_) | OpponentPolicy::Flee(_) | OpponentPolicy::Greedy(_))
        );
    !random_effect && !random_second
}

/// Monte-Carlo mean and standard error of the random-agent score.
pub fn mc_random_score(desc: &Arc<GameDescription>, episodes: u64, seed: u64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut sq = 0.0;
    for k in 0..episodes {
        let s = f64::from(ggb_core::engine::random_episode(desc, seed.wrapping_add(k)).score);
        sum += s;
        sq += s * s;
    }
    let n = episodes as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ten small games covering every source of randomness and every effect.
/// Each ends within five ticks through a tick rule.
pub const ORACLE_GAMES: [&str; 10] = [
    "(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (goal 2 2)) (actions up down left right) (rules (when (overlap avatar goal) (end win)) (when (tick ge 4) (end draw))) (score 0 4 0))",
    "(game (grid 3 3) (players 1) (obs full) (noise 1/4) (horizon 8) (init (avatar 0 0) (wall 1 1) (hazard 2 0) (goal 2 2)) (actions up down left right stay) (rules (when (overlap avatar hazard) (end lose)) (when (overlap avatar goal) (end win)) (when (tick ge 4) (end draw))) (score -1 6 -3))",
    "(game (grid 3 3) (players 1) (obs full) (noise 1/8) (horizon 8) (init (avatar 1 1) (item 0 0) (item 2 2) (item 0 2)) (actions up down left right) (rules (when (overlap avatar item) (remove item) (reward 2)) (when (count item eq 0) (end win)) (when (tick ge 4) (end draw))) (score 0 3 0))",
    "(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (opponent chase avatar) (init (avatar 0 0) (goal 2 0) (opp 2 2)) (actions down right stay) (rules (when (overlap avatar opp) (end lose)) (when (overlap avatar goal) (end win)) (when (tick ge 4) (end draw))) (score 0 5 -5))",
    "(game (grid 3 3) (players 1) (obs full) (noise 1/16) (horizon 8) (opponent random) (init (avatar 0 0) (goal 2 2) (opp 1 1)) (actions up down left right) (rules (when (adjacent avatar opp) (reward -1)) (when (overlap avatar goal) (end win)) (when (tick ge 4) (end draw))) (score 0 4 0))",
    "(game (grid 3 2) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 0 0)) (actions left right stay) (rules (when (tick ge 0) (spawn hazard random) (reward 1)) (when (overlap avatar hazard) (end lose)) (when (tick ge 4) (end draw))) (score 0 0 -2))",
    "(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 1 1) (hazard 2 1) (goal 0 0)) (actions up down left right) (rules (when (adjacent avatar hazard) (teleport avatar random) (reward -1)) (when (overlap avatar goal) (end win)) (when (tick ge 4) (end draw))) (score 0 3 0))",
    "(game (grid 3 3) (players 1) (obs full) (noise 0) (horizon 8) (init (avatar 1 1)) (actions stay place) (rules (when (count item ge 2) (teleport item corner) (reward 1)) (when (count item ge 3) (spawn goal corner) (end win)) (when (tick ge 4) (end draw))) (score 0 2 0))",
    "(game (grid 3 3) (players 2) (obs full) (noise 0) (horizon 8) (init (avatar 0 0) (opp 2 2)) (actions place) (rules (when (count item ge 3) (end win)) (when (count hazard ge 3) (end lose)) (when (tick ge 4) (end draw))) (score 0 4 -4))",
    "(game (grid 2 3) (players 2) (obs full) (noise 1/4) (horizon 8) (init (avatar 0 0) (item 1 1) (opp 1 2)) (actions up down left right stay) (rules (when (overlap opp item) (remove item) (reward -2)) (when (overlap avatar item) (remove item) (reward 2)) (when (adjacent avatar opp) (teleport opp corner)) (when (tick ge 4) (end draw))) (score 0 2 -2))",
];
