use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::action::Action;
use crate::gdl::{
    ActionKind, Condition, Effect, GameDescription, GameResult, ObsMode, OpponentPolicy, Piece,
    SpawnMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    Win,
    Lose,
    Draw,
    HorizonHit,
}

impl From<GameResult> for Terminal {
    fn from(r: GameResult) -> Self {
        match r {
            GameResult::Win => Terminal::Win,
            GameResult::Lose => Terminal::Lose,
            GameResult::Draw => Terminal::Draw,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

/// Who chooses a player's action for one tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    /// An agent's action; subject to the game's move noise.
    Agent(Action),
    /// The game decides: the scripted opponent policy for player two (or a
    /// uniformly random legal action when none is declared), a uniformly
    /// random legal action for player one.
    Auto,
    /// A uniformly random legal action, ignoring any scripted policy.
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// Score change for player one.
    pub reward_delta: i32,
    /// Virtual time consumed: one plus the number of rule conditions evaluated.
    pub cost_units: u64,
    pub terminal: Option<Terminal>,
    /// Indices of the rules that fired.
    pub events: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("action `{action}` is not legal for {player:?}")]
    IllegalAction { action: Action, player: Player },
    #[error("episode already ended")]
    SteppedTerminal,
}

/// Cells touched by a satisfied condition; effects act on these cells.
#[derive(Clone, Copy, Debug)]
enum Witness {
    Global,
    Cells(u64),
}

/// One running episode. Cells are indexed row-major (`y * w + x`); the grid
/// has at most 64 cells, so static piece sets are bitmasks.
#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    desc: Arc<GameDescription>,
    tick: u16,
    avatar: u8,
    opp: Option<u8>,
    masks: [u64; 4],
    score: i32,
    terminal: Option<Terminal>,
    rng: ChaCha8Rng,
}

impl GameState {
    /// Instantiates the layout at tick 0.
    pub fn new(desc: Arc<GameDescription>, seed: u64) -> GameState {
        let w = desc.grid_w;
        let mut avatar = 0;
        let mut opp = None;
        let mut masks = [0u64; 4];
        for p in &desc.layout {
            let cell = p.y * w + p.x;
            match p.piece {
                Piece::Avatar => avatar = cell,
                Piece::Opp => opp = Some(cell),
                kind => masks[kind.static_index().expect("static piece")] |= 1 << cell,
            }
        }
        GameState {
            desc,
            tick: 0,
            avatar,
            opp,
            masks,
            score: 0,
            terminal: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn desc(&self) -> &Arc<GameDescription> {
        &self.desc
    }

    pub fn tick(&self) -> u16 {
        self.tick
    }

    /// Accumulated score of player one.
    pub fn score(&self) -> i32 {
        self.score
    }

    pub fn score_for(&self, player: Player) -> i32 {
        match player {
            Player::One => self.score,
            Player::Two => -self.score,
        }
    }

    pub fn terminal(&self) -> Option<Terminal> {
        self.terminal
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    pub fn avatar(&self) -> (u8, u8) {
        self.xy(self.avatar)
    }

    pub fn opp(&self) -> Option<(u8, u8)> {
        self.opp.map(|c| self.xy(c))
    }

    /// Cells holding a piece of `kind`, row-major.
    pub fn positions(&self, kind: Piece) -> Vec<(u8, u8)> {
        let mut m = self.mask(kind);
        let mut out = Vec::new();
        while m != 0 {
            let c = m.trailing_zeros() as u8;
            out.push(self.xy(c));
            m &= m - 1;
        }
        out
    }

    /// Replaces the episode's random stream, e.g. for independent rollouts
    /// from a cloned state.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
    }

    fn w(&self) -> u8 {
        self.desc.grid_w
    }

    fn h(&self) -> u8 {
        self.desc.grid_h
    }

    fn all_cells(&self) -> u64 {
        let n = self.desc.cells();
        if n == 64 {
            u64::MAX
        } else {
            (1u64 << n) - 1
        }
    }

    fn xy(&self, cell: u8) -> (u8, u8) {
        (cell % self.w(), cell / self.w())
    }

    fn cell(&self, x: u8, y: u8) -> u8 {
        y * self.w() + x
    }

    fn mask(&self, kind: Piece) -> u64 {
        match kind {
            Piece::Avatar => 1 << self.avatar,
            Piece::Opp => self.opp.map_or(0, |c| 1 << c),
            k => self.masks[k.static_index().expect("static piece")],
        }
    }

    fn occupied(&self) -> u64 {
        self.masks.iter().fold(0, |a, m| a | m) | self.mask(Piece::Avatar) | self.mask(Piece::Opp)
    }

    fn empty(&self) -> u64 {
        self.all_cells() & !self.occupied()
    }

    /// Union of the 4-neighbourhoods of the cells in `m`.
    fn neighbours(&self, m: u64) -> u64 {
        let w = u32::from(self.w());
        let mut left_col = 0u64;
        for y in 0..self.h() {
            left_col |= 1 << (u32::from(y) * w);
        }
        let right_col = left_col << (w - 1);
        let all = self.all_cells();
        let up = m >> w;
        let down = (m << w) & all;
        let left = (m & !left_col) >> 1;
        let right = (m & !right_col) << 1;
        (up | down | left | right) & all
    }

    fn piece_of(&self, player: Player) -> Option<u8> {
        match player {
            Player::One => Some(self.avatar),
            Player::Two => self.opp,
        }
    }

    /// Position after moving `from` by `action`; blocked by edges and walls.
    fn moved(&self, from: u8, action: Action) -> u8 {
        let (x, y) = self.xy(from);
        let (dx, dy) = action.delta();
        let nx = i16::from(x) + i16::from(dx);
        let ny = i16::from(y) + i16::from(dy);
        if nx < 0 || ny < 0 || nx >= i16::from(self.w()) || ny >= i16::from(self.h()) {
            return from;
        }
        let to = self.cell(nx as u8, ny as u8);
        if self.mask(Piece::Wall) & (1 << to) != 0 {
            from
        } else {
            to
        }
    }

    fn place_targets(&self, player: Player) -> u64 {
        let Some(own) = self.piece_of(player) else {
            return 0;
        };
        if self.desc.players == 2 {
            self.empty()
        } else {
            self.empty() & self.neighbours(1 << own)
        }
    }

    /// Declared actions with `place` expanded into its current targets.
    pub fn legal_actions(&self, player: Player) -> Vec<Action> {
        if self.is_terminal() || self.piece_of(player).is_none() {
            return Vec::new();
        }
        if player == Player::Two && self.desc.players == 1 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.desc.actions.len());
        for &kind in &self.desc.actions {
            if kind == ActionKind::Place {
                let mut m = self.place_targets(player);
                while m != 0 {
                    let (x, y) = self.xy(m.trailing_zeros() as u8);
                    out.push(Action::Place { x, y });
                    m &= m - 1;
                }
            } else {
                out.push(kind.into());
            }
        }
        out
    }

    pub fn is_legal(&self, player: Player, action: Action) -> bool {
        if self.is_terminal() {
            return false;
        }
        if player == Player::Two && self.desc.players == 1 {
            return false;
        }
        match action {
            Action::Pass => true,
            Action::Place { x, y } => {
                self.desc.actions.contains(&ActionKind::Place)
                    && x < self.w()
                    && y < self.h()
                    && self.place_targets(player) & (1 << self.cell(x, y)) != 0
            }
            a => a.kind().is_some_and(|k| self.desc.actions.contains(&k)),
        }
    }

    /// Moves available to a scripted opponent: unblocked moves plus stay.
    fn opponent_moves(&self) -> Vec<Action> {
        let Some(opp) = self.opp else {
            return vec![Action::Stay];
        };
        Action::MOVES
            .into_iter()
            .filter(|&a| a == Action::Stay || self.moved(opp, a) != opp)
            .collect()
    }

    /// Action chosen by a scripted policy for the opp piece.
    ///
    /// `Random` consumes the episode's random stream; the others are
    /// deterministic, breaking ties in up, down, left, right, stay order.
    pub fn opponent_action(&mut self, policy: OpponentPolicy) -> Action {
        let moves = self.opponent_moves();
        let Some(opp) = self.opp else {
            return Action::Stay;
        };
        let (target, maximize) = match policy {
            OpponentPolicy::Random => {
                let i = self.rng.random_range(0..moves.len());
                return moves[i];
            }
            OpponentPolicy::Chase(t) | OpponentPolicy::Greedy(t) => (t, false),
            OpponentPolicy::Flee(t) => (t, true),
        };
        let targets = self.positions(target);
        if targets.is_empty() {
            return Action::Stay;
        }
        let dist = |cell: u8| {
            let (x, y) = self.xy(cell);
            targets
                .iter()
                .map(|&(tx, ty)| x.abs_diff(tx) as u32 + y.abs_diff(ty) as u32)
                .min()
                .expect("non-empty targets")
        };
        let mut best = moves[0];
        let mut best_d = dist(self.moved(opp, best));
        for &m in &moves[1..] {
            let d = dist(self.moved(opp, m));
            if (maximize && d > best_d) || (!maximize && d < best_d) {
                best = m;
                best_d = d;
            }
        }
        best
    }

    fn random_legal(&mut self, player: Player) -> Action {
        let legal = self.legal_actions(player);
        if legal.is_empty() {
            return Action::Pass;
        }
        let i = self.rng.random_range(0..legal.len());
        legal[i]
    }

    fn apply_noise(&mut self, action: Action) -> Action {
        let s = self.desc.noise.sixteenths();
        if s == 0 || !action.is_move() {
            return action;
        }
        if self.rng.random_range(0..16u32) < s {
            let moves: Vec<ActionKind> = self.desc.move_actions().collect();
            let i = self.rng.random_range(0..moves.len());
            return moves[i].into();
        }
        action
    }

    fn resolve(&mut self, player: Player, control: Control) -> Action {
        match control {
            Control::Agent(action) => self.apply_noise(action),
            Control::Random => self.random_legal(player),
            Control::Auto => match (player, self.desc.opponent) {
                (Player::Two, Some(policy)) => self.opponent_action(policy),
                (p, _) => self.random_legal(p),
            },
        }
    }

    fn apply(&mut self, player: Player, action: Action) {
        let Some(own) = self.piece_of(player) else {
            return;
        };
        match action {
            Action::Pass => {}
            Action::Place { x, y } => {
                let cell = self.cell(x, y);
                if self.empty() & (1 << cell) != 0 {
                    let kind = match player {
                        Player::One => Piece::Item,
                        Player::Two => Piece::Hazard,
                    };
                    self.masks[kind.static_index().expect("static")] |= 1 << cell;
                }
            }
            mv => {
                let to = self.moved(own, mv);
                match player {
                    Player::One => self.avatar = to,
                    Player::Two => self.opp = Some(to),
                }
            }
        }
    }

    /// Player one acts; player two (if present) follows the game's own control.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EngineError> {
        self.step_with(Control::Agent(action), Control::Auto)
    }

    /// Both players act; used for live two-player matches.
    pub fn step_joint(&mut self, p1: Action, p2: Action) -> Result<StepOutcome, EngineError> {
        self.step_with(Control::Agent(p1), Control::Agent(p2))
    }

    /// Advances one tick: player one moves, then player two, then rules fire
    /// in authored order (each at most once, stopping at the first `end`),
    /// then the step delta applies and the tick advances.
    pub fn step_with(&mut self, p1: Control, p2: Control) -> Result<StepOutcome, EngineError> {
        if self.is_terminal() {
            return Err(EngineError::SteppedTerminal);
        }
        let has_two = self.opp.is_some();
        for (player, control) in [(Player::One, p1), (Player::Two, p2)] {
            if let Control::Agent(action) = control {
                let ok = if player == Player::Two && !has_two {
                    action == Action::Pass
                } else {
                    self.is_legal(player, action)
                };
                if !ok {
                    return Err(EngineError::IllegalAction { action, player });
                }
            }
        }
        let a1 = self.resolve(Player::One, p1);
        let a2 = has_two.then(|| self.resolve(Player::Two, p2));
        self.apply(Player::One, a1);
        if let Some(a2) = a2 {
            self.apply(Player::Two, a2);
        }

        let desc = Arc::clone(&self.desc);
        let mut reward = 0i32;
        let mut evaluations = 0u64;
        let mut events = Vec::new();
        for (i, rule) in desc.rules.iter().enumerate() {
            evaluations += 1;
            let Some(witness) = self.check(rule.condition) else {
                continue;
            };
            events.push(i);
            for effect in &rule.effects {
                match *effect {
                    Effect::Reward(d) => reward += i32::from(d),
                    Effect::Remove(p) => self.remove(p, witness),
                    Effect::Teleport(p, mode) => self.teleport(p, mode, witness),
                    Effect::Spawn(p, mode) => self.spawn(p, mode),
                    Effect::End(r) => {
                        if self.terminal.is_none() {
                            self.terminal = Some(r.into());
                        }
                    }
                }
            }
            if self.terminal.is_some() {
                break;
            }
        }

        reward += i32::from(desc.scoring.step_delta);
        self.tick += 1;
        if self.terminal.is_none() && self.tick >= desc.horizon {
            self.terminal = Some(Terminal::HorizonHit);
        }
        match self.terminal {
            Some(Terminal::Win) => reward += i32::from(desc.scoring.win_reward),
            Some(Terminal::Lose) => reward += i32::from(desc.scoring.lose_reward),
            _ => {}
        }
        self.score += reward;
        Ok(StepOutcome {
            reward_delta: reward,
            cost_units: 1 + evaluations,
            terminal: self.terminal,
            events,
        })
    }

    fn check(&self, cond: Condition) -> Option<Witness> {
        match cond {
            Condition::Overlap(p, q) => {
                let m = if p == q {
                    0
                } else {
                    self.mask(p) & self.mask(q)
                };
                (m != 0).then_some(Witness::Cells(m))
            }
            Condition::Adjacent(p, q) => {
                let (mp, mq) = (self.mask(p), self.mask(q));
                let m = (self.neighbours(mp) & mq) | (self.neighbours(mq) & mp);
                (m != 0).then_some(Witness::Cells(m))
            }
            Condition::Count(p, cmp, n) => cmp
                .holds(self.mask(p).count_ones(), u32::from(n))
                .then_some(Witness::Global),
            Condition::Tick(cmp, n) => cmp
                .holds(u32::from(self.tick), u32::from(n))
                .then_some(Witness::Global),
        }
    }

    fn scope(&self, witness: Witness) -> u64 {
        match witness {
            Witness::Global => self.all_cells(),
            Witness::Cells(m) => m,
        }
    }

    fn remove(&mut self, p: Piece, witness: Witness) {
        if let Some(i) = p.static_index() {
            self.masks[i] &= !self.scope(witness);
        }
    }

    fn pick_cell(&mut self, mode: SpawnMode) -> Option<u8> {
        let empty = self.empty();
        match mode {
            SpawnMode::Random => {
                let n = empty.count_ones();
                if n == 0 {
                    return None;
                }
                let mut k = self.rng.random_range(0..n);
                let mut m = empty;
                loop {
                    let c = m.trailing_zeros() as u8;
                    if k == 0 {
                        return Some(c);
                    }
                    k -= 1;
                    m &= m - 1;
                }
            }
            SpawnMode::Corner => {
                let (w, h) = (self.w(), self.h());
                [(0, 0), (w - 1, 0), (0, h - 1), (w - 1, h - 1)]
                    .into_iter()
                    .map(|(x, y)| self.cell(x, y))
                    .find(|&c| empty & (1 << c) != 0)
            }
        }
    }

    fn teleport(&mut self, p: Piece, mode: SpawnMode, witness: Witness) {
        let scope = self.scope(witness);
        match p {
            Piece::Avatar => {
                if scope & (1 << self.avatar) != 0 {
                    if let Some(c) = self.pick_cell(mode) {
                        self.avatar = c;
                    }
                }
            }
            Piece::Opp => {
                if let Some(o) = self.opp {
                    if scope & (1 << o) != 0 {
                        if let Some(c) = self.pick_cell(mode) {
                            self.opp = Some(c);
                        }
                    }
                }
            }
            kind => {
                let i = kind.static_index().expect("static piece");
                let mut movers = self.masks[i] & scope;
                while movers != 0 {
                    let from = movers.trailing_zeros() as u8;
                    movers &= movers - 1;
                    if let Some(to) = self.pick_cell(mode) {
                        self.masks[i] = (self.masks[i] & !(1 << from)) | (1 << to);
                    }
                }
            }
        }
    }

    fn spawn(&mut self, p: Piece, mode: SpawnMode) {
        if let Some(i) = p.static_index() {
            if let Some(c) = self.pick_cell(mode) {
                self.masks[i] |= 1 << c;
            }
        }
    }

    fn glyph(&self, cell: u8, viewer: Player) -> char {
        let bit = 1u64 << cell;
        let (me, them) = match viewer {
            Player::One => (self.mask(Piece::Avatar), self.mask(Piece::Opp)),
            Player::Two => (self.mask(Piece::Opp), self.mask(Piece::Avatar)),
        };
        if me & bit != 0 {
            'A'
        } else if them & bit != 0 {
            'O'
        } else if self.mask(Piece::Hazard) & bit != 0 {
            '!'
        } else if self.mask(Piece::Item) & bit != 0 {
            '*'
        } else if self.mask(Piece::Goal) & bit != 0 {
            'G'
        } else if self.mask(Piece::Wall) & bit != 0 {
            '#'
        } else {
            '.'
        }
    }

    /// Row-major glyph string as seen by `player`, who always sees itself as
    /// `A` and the other player as `O`.
    pub fn observe(&self, player: Player) -> String {
        match self.desc.obs_mode {
            ObsMode::Full => (0..self.desc.cells() as u8)
                .map(|c| self.glyph(c, player))
                .collect(),
            ObsMode::Radius(r) => {
                let centre = self.piece_of(player).unwrap_or(self.avatar);
                let (cx, cy) = self.xy(centre);
                let r = i16::from(r);
                let mut out = String::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
                for dy in -r..=r {
                    for dx in -r..=r {
                        let x = i16::from(cx) + dx;
                        let y = i16::from(cy) + dy;
                        if x < 0 || y < 0 || x >= i16::from(self.w()) || y >= i16::from(self.h()) {
                            out.push('#');
                        } else {
                            out.push(self.glyph(self.cell(x as u8, y as u8), player));
                        }
                    }
                }
                out
            }
        }
    }

    /// Full board rendered one row per line.
    pub fn render(&self) -> String {
        let w = usize::from(self.w());
        let flat: Vec<char> = (0..self.desc.cells() as u8)
            .map(|c| self.glyph(c, Player::One))
            .collect();
        flat.chunks(w)
            .map(|row| row.iter().collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }
}
