//! The MicroGDL prior as a prefix code.
//!
//! A game is derived by a fixed sequence of uniform choices. Each choice
//! point has an arity known from the choices made before it, so the
//! sequence of choice indices is uniquely decodable and the probability of
//! a derivation under uniform choosing is the product of `1/arity`. The
//! description length is therefore `-log2` of the prior probability.
//!
//! Derivation order (which differs from the text order):
//!
//! 1. grid width and height, players, observation mode, noise, horizon
//! 2. opponent policy and its target
//! 3. scoring
//! 4. rules: a continue bit before each rule (at most [`MAX_RULES`]); per
//!    rule a condition and one to [`MAX_EFFECTS`] effects, with a continue
//!    bit before every effect after the first
//! 5. actions: a strictly increasing non-empty sequence over the usable
//!    action kinds
//! 6. layout: avatar cell, then for each static piece kind a strictly
//!    increasing sequence of cells, then the opp cell when required
//!
//! Continue bits are omitted when no further item is possible (rule cap
//! reached, effect cap reached, or no larger cell/action remains); such a
//! choice has arity one and costs nothing.

use super::types::*;

/// A source of uniform choices.
pub trait ChoiceSource {
    /// Returns an index in `0..arity`. `arity` is always at least 2.
    fn choose(&mut self, arity: u32) -> u32;
}

/// One recorded choice point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Choice {
    pub index: u32,
    pub arity: u32,
}

impl Choice {
    pub fn bits(&self) -> f64 {
        f64::from(self.arity).log2()
    }
}

/// Replays a fixed list of choices. Panics if the list runs out.
#[derive(Debug)]
pub struct ReplaySource<'a> {
    choices: &'a [u32],
    pub consumed: usize,
}

impl<'a> ReplaySource<'a> {
    pub fn new(choices: &'a [u32]) -> Self {
        ReplaySource {
            choices,
            consumed: 0,
        }
    }
}

impl ChoiceSource for ReplaySource<'_> {
    fn choose(&mut self, arity: u32) -> u32 {
        let c = self.choices[self.consumed];
        self.consumed += 1;
        c % arity
    }
}

fn pick<S: ChoiceSource + ?Sized>(src: &mut S, arity: u32) -> u32 {
    if arity <= 1 {
        0
    } else {
        src.choose(arity)
    }
}

/// Derives a game from a choice source. Every derivation is a valid game.
///
/// `desc_len_bits` is filled in from the encoder, not from the source.
pub fn derive<S: ChoiceSource + ?Sized>(src: &mut S) -> GameDescription {
    let grid_w = GRID_MIN + pick(src, grid_span()) as u8;
    let grid_h = GRID_MIN + pick(src, grid_span()) as u8;
    let players = 1 + pick(src, 2) as u8;
    let obs_mode = match pick(src, 1 + u32::from(RADIUS_MAX)) {
        0 => ObsMode::Full,
        r => ObsMode::Radius(r as u8),
    };
    let noise = Noise::ALL[pick(src, 4) as usize];
    let horizon = HORIZONS[pick(src, HORIZONS.len() as u32) as usize];
    let opponent = match pick(src, 5) {
        0 => None,
        1 => Some(OpponentPolicy::Random),
        k => {
            let t = Piece::TARGETS[pick(src, Piece::TARGETS.len() as u32) as usize];
            Some(match k {
                2 => OpponentPolicy::Chase(t),
                3 => OpponentPolicy::Flee(t),
                _ => OpponentPolicy::Greedy(t),
            })
        }
    };
    let scoring = Scoring {
        step_delta: pick(src, 3) as i8 - 1,
        win_reward: pick(src, WIN_MAX as u32 + 1) as i8,
        lose_reward: -(pick(src, (-LOSE_MIN) as u32 + 1) as i8),
    };

    let mut rules = Vec::new();
    while rules.len() < MAX_RULES && pick(src, 2) == 1 {
        rules.push(derive_rule(src, horizon));
    }

    let mut desc = GameDescription {
        grid_w,
        grid_h,
        players,
        obs_mode,
        noise,
        horizon,
        opponent,
        layout: Vec::new(),
        actions: Vec::new(),
        rules,
        scoring,
        desc_len_bits: 0.0,
    };

    let usable: &[ActionKind] = if desc.place_usable() {
        &ActionKind::ALL
    } else {
        &ActionKind::MOVES
    };
    desc.actions = derive_increasing(src, usable.len() as u32, true)
        .into_iter()
        .map(|i| usable[i as usize])
        .collect();

    let ax = pick(src, u32::from(grid_w)) as u8;
    let ay = pick(src, u32::from(grid_h)) as u8;
    desc.layout.push(Placement::new(Piece::Avatar, ax, ay));
    let cells = desc.cells() as u32;
    for piece in Piece::STATIC {
        for cell in derive_increasing(src, cells, false) {
            let (x, y) = (cell % u32::from(grid_w), cell / u32::from(grid_w));
            desc.layout.push(Placement::new(piece, x as u8, y as u8));
        }
    }
    if desc.needs_opp() {
        let ox = pick(src, u32::from(grid_w)) as u8;
        let oy = pick(src, u32::from(grid_h)) as u8;
        desc.layout.push(Placement::new(Piece::Opp, ox, oy));
    }

    desc.desc_len_bits = description_length(&desc);
    desc
}

fn grid_span() -> u32 {
    u32::from(GRID_MAX - GRID_MIN) + 1
}

fn derive_rule<S: ChoiceSource + ?Sized>(src: &mut S, horizon: u16) -> Rule {
    let piece6 = |src: &mut S| Piece::ALL[pick(src, 6) as usize];
    let condition = match pick(src, 4) {
        0 => {
            let p = piece6(src);
            Condition::Overlap(p, piece6(src))
        }
        1 => {
            let p = piece6(src);
            Condition::Adjacent(p, piece6(src))
        }
        2 => {
            let p = piece6(src);
            let c = Cmp::ALL[pick(src, 5) as usize];
            Condition::Count(p, c, pick(src, u32::from(COUNT_MAX) + 1) as u8)
        }
        _ => {
            let c = Cmp::ALL[pick(src, 5) as usize];
            Condition::Tick(c, pick(src, u32::from(horizon)) as u16)
        }
    };
    let mut effects = vec![derive_effect(src)];
    while effects.len() < MAX_EFFECTS && pick(src, 2) == 1 {
        effects.push(derive_effect(src));
    }
    Rule { condition, effects }
}

fn derive_effect<S: ChoiceSource + ?Sized>(src: &mut S) -> Effect {
    let mode = |src: &mut S| {
        if pick(src, 2) == 0 {
            SpawnMode::Random
        } else {
            SpawnMode::Corner
        }
    };
    match pick(src, 5) {
        0 => Effect::Reward(pick(src, reward_span()) as i8 + REWARD_MIN),
        1 => Effect::Remove(Piece::STATIC[pick(src, 4) as usize]),
        2 => {
            let p = Piece::ALL[pick(src, 6) as usize];
            Effect::Teleport(p, mode(src))
        }
        3 => {
            let p = Piece::STATIC[pick(src, 4) as usize];
            Effect::Spawn(p, mode(src))
        }
        _ => Effect::End(GameResult::ALL[pick(src, 3) as usize]),
    }
}

fn reward_span() -> u32 {
    (REWARD_MAX - REWARD_MIN) as u32 + 1
}

/// Strictly increasing sequence over `0..n`.
fn derive_increasing<S: ChoiceSource + ?Sized>(src: &mut S, n: u32, non_empty: bool) -> Vec<u32> {
    let mut out = Vec::new();
    let mut next = 0u32;
    if non_empty {
        let first = pick(src, n);
        out.push(first);
        next = first + 1;
    }
    while next < n && pick(src, 2) == 1 {
        let v = next + pick(src, n - next);
        out.push(v);
        next = v + 1;
    }
    out
}

/// Records the choice sequence of a description's derivation.
///
/// `desc` must be canonical and valid; the result replays through
/// [`derive`] to the same description.
pub fn encode(desc: &GameDescription) -> Vec<Choice> {
    let mut enc = Encoder::default();
    enc.put(u32::from(desc.grid_w - GRID_MIN), grid_span());
    enc.put(u32::from(desc.grid_h - GRID_MIN), grid_span());
    enc.put(u32::from(desc.players - 1), 2);
    enc.put(
        match desc.obs_mode {
            ObsMode::Full => 0,
            ObsMode::Radius(r) => u32::from(r),
        },
        1 + u32::from(RADIUS_MAX),
    );
    enc.put(index_of(&Noise::ALL, &desc.noise), 4);
    enc.put(index_of(&HORIZONS, &desc.horizon), HORIZONS.len() as u32);
    let target = |t: &Piece| index_of(&Piece::TARGETS, t);
    match &desc.opponent {
        None => enc.put(0, 5),
        Some(OpponentPolicy::Random) => enc.put(1, 5),
        Some(OpponentPolicy::Chase(t)) => {
            enc.put(2, 5);
            enc.put(target(t), 5);
        }
        Some(OpponentPolicy::Flee(t)) => {
            enc.put(3, 5);
            enc.put(target(t), 5);
        }
        Some(OpponentPolicy::Greedy(t)) => {
            enc.put(4, 5);
            enc.put(target(t), 5);
        }
    }
    let s = &desc.scoring;
    enc.put((s.step_delta + 1) as u32, 3);
    enc.put(s.win_reward as u32, WIN_MAX as u32 + 1);
    enc.put((-s.lose_reward) as u32, (-LOSE_MIN) as u32 + 1);

    for rule in &desc.rules {
        enc.put(1, 2);
        encode_rule(&mut enc, rule, desc.horizon);
    }
    if desc.rules.len() < MAX_RULES {
        enc.put(0, 2);
    }

    let usable: &[ActionKind] = if desc.place_usable() {
        &ActionKind::ALL
    } else {
        &ActionKind::MOVES
    };
    let action_idx: Vec<u32> = desc.actions.iter().map(|a| index_of(usable, a)).collect();
    enc.increasing(&action_idx, usable.len() as u32, true);

    let avatar = desc
        .placements_of(Piece::Avatar)
        .next()
        .expect("valid description has an avatar");
    enc.put(u32::from(avatar.x), u32::from(desc.grid_w));
    enc.put(u32::from(avatar.y), u32::from(desc.grid_h));
    let cells = desc.cells() as u32;
    for piece in Piece::STATIC {
        let idx: Vec<u32> = desc
            .placements_of(piece)
            .map(|p| u32::from(p.y) * u32::from(desc.grid_w) + u32::from(p.x))
            .collect();
        enc.increasing(&idx, cells, false);
    }
    if desc.needs_opp() {
        let opp = desc
            .placements_of(Piece::Opp)
            .next()
            .expect("valid description has its opp piece");
        enc.put(u32::from(opp.x), u32::from(desc.grid_w));
        enc.put(u32::from(opp.y), u32::from(desc.grid_h));
    }
    enc.choices
}

fn encode_rule(enc: &mut Encoder, rule: &Rule, horizon: u16) {
    let p6 = |p: &Piece| index_of(&Piece::ALL, p);
    match &rule.condition {
        Condition::Overlap(p, q) => {
            enc.put(0, 4);
            enc.put(p6(p), 6);
            enc.put(p6(q), 6);
        }
        Condition::Adjacent(p, q) => {
            enc.put(1, 4);
            enc.put(p6(p), 6);
            enc.put(p6(q), 6);
        }
        Condition::Count(p, c, n) => {
            enc.put(2, 4);
            enc.put(p6(p), 6);
            enc.put(index_of(&Cmp::ALL, c), 5);
            enc.put(u32::from(*n), u32::from(COUNT_MAX) + 1);
        }
        Condition::Tick(c, n) => {
            enc.put(3, 4);
            enc.put(index_of(&Cmp::ALL, c), 5);
            enc.put(u32::from(*n), u32::from(horizon));
        }
    }
    for (i, effect) in rule.effects.iter().enumerate() {
        if i > 0 {
            enc.put(1, 2);
        }
        encode_effect(enc, effect);
    }
    if rule.effects.len() < MAX_EFFECTS {
        enc.put(0, 2);
    }
}

fn encode_effect(enc: &mut Encoder, effect: &Effect) {
    let mode = |m: &SpawnMode| match m {
        SpawnMode::Random => 0,
        SpawnMode::Corner => 1,
    };
    match effect {
        Effect::Reward(d) => {
            enc.put(0, 5);
            enc.put((d - REWARD_MIN) as u32, reward_span());
        }
        Effect::Remove(p) => {
            enc.put(1, 5);
            enc.put(index_of(&Piece::STATIC, p), 4);
        }
        Effect::Teleport(p, m) => {
            enc.put(2, 5);
            enc.put(index_of(&Piece::ALL, p), 6);
            enc.put(mode(m), 2);
        }
        Effect::Spawn(p, m) => {
            enc.put(3, 5);
            enc.put(index_of(&Piece::STATIC, p), 4);
            enc.put(mode(m), 2);
        }
        Effect::End(r) => {
            enc.put(4, 5);
            enc.put(index_of(&GameResult::ALL, r), 3);
        }
    }
}

fn index_of<T: PartialEq>(all: &[T], v: &T) -> u32 {
    all.iter()
        .position(|x| x == v)
        .expect("value within its declared alphabet") as u32
}

#[derive(Default)]
struct Encoder {
    choices: Vec<Choice>,
}

impl Encoder {
    fn put(&mut self, index: u32, arity: u32) {
        debug_assert!(index < arity, "choice {index} outside arity {arity}");
        if arity > 1 {
            self.choices.push(Choice { index, arity });
        }
    }

    fn increasing(&mut self, values: &[u32], n: u32, non_empty: bool) {
        let mut next = 0u32;
        let mut rest = values;
        if non_empty {
            self.put(values[0], n);
            next = values[0] + 1;
            rest = &values[1..];
        }
        for &v in rest {
            self.put(1, 2);
            self.put(v - next, n - next);
            next = v + 1;
        }
        if next < n {
            self.put(0, 2);
        }
    }
}

/// Code length of the description under the grammar prior, in bits.
pub fn description_length(desc: &GameDescription) -> f64 {
    encode(desc).iter().map(Choice::bits).sum()
}
