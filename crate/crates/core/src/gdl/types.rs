use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const GRID_MIN: u8 = 2;
pub const GRID_MAX: u8 = 8;
pub const HORIZONS: [u16; 5] = [8, 16, 32, 64, 128];
pub const MAX_RULES: usize = 8;
pub const MAX_EFFECTS: usize = 4;
pub const COUNT_MAX: u8 = 8;
pub const REWARD_MIN: i8 = -4;
pub const REWARD_MAX: i8 = 4;
pub const WIN_MAX: i8 = 8;
pub const LOSE_MIN: i8 = -8;
pub const RADIUS_MAX: u8 = 3;

/// Kinds of pieces that can appear on the board.
///
/// The declaration order is the canonical sort order for placements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Piece {
    Avatar,
    Wall,
    Item,
    Hazard,
    Goal,
    Opp,
}

impl Piece {
    pub const ALL: [Piece; 6] = [
        Piece::Avatar,
        Piece::Wall,
        Piece::Item,
        Piece::Hazard,
        Piece::Goal,
        Piece::Opp,
    ];

    /// Pieces that exist as unordered sets on the board and may be removed or spawned.
    pub const STATIC: [Piece; 4] = [Piece::Wall, Piece::Item, Piece::Hazard, Piece::Goal];

    /// Pieces a scripted opponent may chase or flee from.
    pub const TARGETS: [Piece; 5] = [
        Piece::Avatar,
        Piece::Wall,
        Piece::Item,
        Piece::Hazard,
        Piece::Goal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Piece::Avatar => "avatar",
            Piece::Wall => "wall",
            Piece::Item => "item",
            Piece::Hazard => "hazard",
            Piece::Goal => "goal",
            Piece::Opp => "opp",
        }
    }

    pub fn is_static(self) -> bool {
        Piece::STATIC.contains(&self)
    }

    /// Index into a per-kind mask array for static pieces.
    pub(crate) fn static_index(self) -> Option<usize> {
        Piece::STATIC.iter().position(|&p| p == self)
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Piece {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Piece::ALL.into_iter().find(|p| p.name() == s).ok_or(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObsMode {
    Full,
    Radius(u8),
}

impl fmt::Display for ObsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObsMode::Full => f.write_str("full"),
            ObsMode::Radius(r) => write!(f, "radius:{r}"),
        }
    }
}

/// Probability that an agent's move is replaced by a uniformly random declared move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Noise {
    Zero,
    Sixteenth,
    Eighth,
    Quarter,
}

impl Noise {
    pub const ALL: [Noise; 4] = [Noise::Zero, Noise::Sixteenth, Noise::Eighth, Noise::Quarter];

    /// Numerator over 16.
    pub fn sixteenths(self) -> u32 {
        match self {
            Noise::Zero => 0,
            Noise::Sixteenth => 1,
            Noise::Eighth => 2,
            Noise::Quarter => 4,
        }
    }

    pub fn probability(self) -> f64 {
        f64::from(self.sixteenths()) / 16.0
    }

    pub fn literal(self) -> &'static str {
        match self {
            Noise::Zero => "0",
            Noise::Sixteenth => "1/16",
            Noise::Eighth => "1/8",
            Noise::Quarter => "1/4",
        }
    }
}

/// Declared action kinds, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Up,
    Down,
    Left,
    Right,
    Stay,
    Place,
}

impl ActionKind {
    pub const ALL: [ActionKind; 6] = [
        ActionKind::Up,
        ActionKind::Down,
        ActionKind::Left,
        ActionKind::Right,
        ActionKind::Stay,
        ActionKind::Place,
    ];

    pub const MOVES: [ActionKind; 5] = [
        ActionKind::Up,
        ActionKind::Down,
        ActionKind::Left,
        ActionKind::Right,
        ActionKind::Stay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Up => "up",
            ActionKind::Down => "down",
            ActionKind::Left => "left",
            ActionKind::Right => "right",
            ActionKind::Stay => "stay",
            ActionKind::Place => "place",
        }
    }

    pub fn is_move(self) -> bool {
        self != ActionKind::Place
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        ActionKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub piece: Piece,
    pub x: u8,
    pub y: u8,
}

impl Placement {
    pub fn new(piece: Piece, x: u8, y: u8) -> Self {
        Placement { piece, x, y }
    }

    /// Canonical ordering key: piece kind, then row, then column.
    pub(crate) fn sort_key(&self) -> (Piece, u8, u8) {
        (self.piece, self.y, self.x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub const ALL: [Cmp; 5] = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt];

    pub fn name(self) -> &'static str {
        match self {
            Cmp::Lt => "lt",
            Cmp::Le => "le",
            Cmp::Eq => "eq",
            Cmp::Ge => "ge",
            Cmp::Gt => "gt",
        }
    }

    pub fn holds(self, lhs: u32, rhs: u32) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

impl FromStr for Cmp {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Cmp::ALL.into_iter().find(|c| c.name() == s).ok_or(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    Overlap(Piece, Piece),
    Adjacent(Piece, Piece),
    Count(Piece, Cmp, u8),
    Tick(Cmp, u16),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpawnMode {
    Random,
    Corner,
}

impl SpawnMode {
    pub fn name(self) -> &'static str {
        match self {
            SpawnMode::Random => "random",
            SpawnMode::Corner => "corner",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameResult {
    Win,
    Lose,
    Draw,
}

impl GameResult {
    pub const ALL: [GameResult; 3] = [GameResult::Win, GameResult::Lose, GameResult::Draw];

    pub fn name(self) -> &'static str {
        match self {
            GameResult::Win => "win",
            GameResult::Lose => "lose",
            GameResult::Draw => "draw",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Effect {
    Reward(i8),
    Remove(Piece),
    Teleport(Piece, SpawnMode),
    Spawn(Piece, SpawnMode),
    End(GameResult),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub condition: Condition,
    pub effects: Vec<Effect>,
}

/// Scripted adversary controlling the `opp` piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpponentPolicy {
    Random,
    Chase(Piece),
    Flee(Piece),
    Greedy(Piece),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scoring {
    pub step_delta: i8,
    pub win_reward: i8,
    pub lose_reward: i8,
}

/// A MicroGDL game together with its code length in bits.
///
/// Construct through [`crate::gdl::parse`], the sampler, or
/// [`GameDescription::finalize`]; those paths canonicalize the layout and
/// action order and fill in `desc_len_bits`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameDescription {
    pub grid_w: u8,
    pub grid_h: u8,
    pub players: u8,
    pub obs_mode: ObsMode,
    pub noise: Noise,
    pub horizon: u16,
    pub opponent: Option<OpponentPolicy>,
    pub layout: Vec<Placement>,
    pub actions: Vec<ActionKind>,
    pub rules: Vec<Rule>,
    pub scoring: Scoring,
    pub desc_len_bits: f64,
}

impl GameDescription {
    pub fn cells(&self) -> usize {
        usize::from(self.grid_w) * usize::from(self.grid_h)
    }

    /// Whether the `opp` piece must be present.
    pub fn needs_opp(&self) -> bool {
        self.players == 2 || self.opponent.is_some()
    }

    /// `place` is usable in two-player games and in games whose rules spawn pieces.
    pub fn place_usable(&self) -> bool {
        self.players == 2
            || self
                .rules
                .iter()
                .flat_map(|r| r.effects.iter())
                .any(|e| matches!(e, Effect::Spawn(..)))
    }

    pub fn placements_of(&self, piece: Piece) -> impl Iterator<Item = &Placement> {
        self.layout.iter().filter(move |p| p.piece == piece)
    }

    pub fn move_actions(&self) -> impl Iterator<Item = ActionKind> + '_ {
        self.actions.iter().copied().filter(|a| a.is_move())
    }

    /// Sorts layout and actions into canonical order.
    pub fn canonicalize(&mut self) {
        self.layout.sort_by_key(Placement::sort_key);
        self.actions.sort();
    }

    /// Canonicalizes, validates and computes the description length.
    pub fn finalize(mut self) -> Result<Self, crate::gdl::ValidationReport> {
        self.canonicalize();
        let report = crate::gdl::validate(&self);
        if !report.ok {
            return Err(report);
        }
        self.desc_len_bits = crate::gdl::description_length(&self);
        Ok(self)
    }
}
