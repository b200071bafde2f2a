//! MicroGDL text: tokenizer, s-expression reader, game reader and canonical writer.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::types::*;
use super::validate::ValidationReport;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GdlError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid game: {0}")]
    Invalid(ValidationReport),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug)]
enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn describe(&self) -> String {
        match self {
            Sexp::Atom(a, _) => format!("`{a}`"),
            Sexp::List(items, _) => match items.first() {
                Some(Sexp::Atom(head, _)) => format!("list `({head} ...)`"),
                _ => "list".to_string(),
            },
        }
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, col: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    /// Reads the next top-level form, or `None` at end of input.
    fn form(&mut self) -> Result<Option<Sexp>, ParseError> {
        self.skip_trivia();
        match self.chars.peek() {
            None => Ok(None),
            Some(_) => self.sexp().map(Some),
        }
    }

    fn sexp(&mut self) -> Result<Sexp, ParseError> {
        self.skip_trivia();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Err(err(start, "expected `(` or atom, found end of input")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => {
                            return Err(err(self.pos, "expected `)`, found end of input"));
                        }
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.sexp()?),
                    }
                }
            }
            Some(')') => Err(err(start, "expected `(` or atom, found `)`")),
            Some(_) => {
                let mut atom = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(atom, start))
            }
        }
    }
}

/// Parses exactly one game.
pub fn parse(text: &str) -> Result<GameDescription, GdlError> {
    let mut reader = Reader::new(text);
    let form = reader
        .form()?
        .ok_or_else(|| err(reader.pos, "expected `(game ...)`, found end of input"))?;
    if let Some(extra) = reader.form()? {
        return Err(err(extra.pos(), "expected end of input after the game").into());
    }
    build(&form)
}

/// Parses a batch of games separated by whitespace or newlines. Comment
/// lines starting with `;` are skipped.
pub fn parse_batch(text: &str) -> Result<Vec<GameDescription>, GdlError> {
    let mut reader = Reader::new(text);
    let mut out = Vec::new();
    while let Some(form) = reader.form()? {
        out.push(build(&form)?);
    }
    Ok(out)
}

fn build(form: &Sexp) -> Result<GameDescription, GdlError> {
    let desc = read_game(form)?;
    desc.finalize().map_err(GdlError::Invalid)
}

fn list<'s>(s: &'s Sexp, what: &str) -> Result<&'s [Sexp], ParseError> {
    match s {
        Sexp::List(items, _) => Ok(items),
        other => Err(err(
            other.pos(),
            format!("expected {what}, found {}", other.describe()),
        )),
    }
}

fn atom<'s>(s: &'s Sexp, what: &str) -> Result<&'s str, ParseError> {
    match s {
        Sexp::Atom(a, _) => Ok(a),
        other => Err(err(
            other.pos(),
            format!("expected {what}, found {}", other.describe()),
        )),
    }
}

/// Splits `(head args...)` checking the head keyword.
fn form_args<'s>(s: &'s Sexp, what: &str) -> Result<(&'s str, &'s [Sexp]), ParseError> {
    let items = list(s, what)?;
    let head = items
        .first()
        .ok_or_else(|| err(s.pos(), format!("expected {what}, found `()`")))?;
    Ok((atom(head, what)?, &items[1..]))
}

fn arity(s: &Sexp, args: &[Sexp], n: usize, what: &str) -> Result<(), ParseError> {
    if args.len() != n {
        let at = args.get(n).map(Sexp::pos).unwrap_or(s.pos());
        return Err(err(
            at,
            format!("expected {n} argument(s) for {what}, found {}", args.len()),
        ));
    }
    Ok(())
}

fn int_in(s: &Sexp, what: &str, lo: i64, hi: i64) -> Result<i64, ParseError> {
    let a = atom(s, what)?;
    let v: i64 = a
        .parse()
        .map_err(|_| err(s.pos(), format!("expected integer {what}, found `{a}`")))?;
    if v < lo || v > hi {
        return Err(err(s.pos(), format!("{what} out of range {lo}..{hi}: {v}")));
    }
    Ok(v)
}

fn keyword<T>(s: &Sexp, what: &str, table: &[T], name: impl Fn(&T) -> &str) -> Result<T, ParseError>
where
    T: Copy,
{
    let a = atom(s, what)?;
    table.iter().copied().find(|t| name(t) == a).ok_or_else(|| {
        let options: Vec<&str> = table.iter().map(&name).collect();
        err(
            s.pos(),
            format!(
                "expected {what} (one of {}), found `{a}`",
                options.join(", ")
            ),
        )
    })
}

fn piece(s: &Sexp) -> Result<Piece, ParseError> {
    keyword(s, "piece", &Piece::ALL, |p| p.name())
}

fn read_game(form: &Sexp) -> Result<GameDescription, ParseError> {
    let (head, fields) = form_args(form, "`(game ...)`")?;
    if head != "game" {
        return Err(err(form.pos(), format!("expected `game`, found `{head}`")));
    }

    let mut grid = None;
    let mut players = None;
    let mut obs = None;
    let mut noise = None;
    let mut horizon = None;
    let mut opponent = None;
    let mut layout = None;
    let mut actions = None;
    let mut rules = None;
    let mut scoring = None;

    fn once<T>(slot: &mut Option<T>, v: T, s: &Sexp, name: &str) -> Result<(), ParseError> {
        if slot.is_some() {
            return Err(err(s.pos(), format!("duplicate `{name}` field")));
        }
        *slot = Some(v);
        Ok(())
    }

    for field in fields {
        let (name, args) = form_args(field, "game field")?;
        match name {
            "grid" => {
                arity(field, args, 2, "grid")?;
                let w = int_in(&args[0], "grid width", 2, 8)? as u8;
                let h = int_in(&args[1], "grid height", 2, 8)? as u8;
                once(&mut grid, (w, h), field, name)?;
            }
            "players" => {
                arity(field, args, 1, "players")?;
                once(&mut players, int_in(&args[0], "players", 1, 2)? as u8, field, name)?;
            }
            "obs" => {
                let mode = match args.first().map(|a| atom(a, "observation mode")).transpose()? {
                    Some("full") => {
                        arity(field, args, 1, "obs full")?;
                        ObsMode::Full
                    }
                    Some("radius") => {
                        arity(field, args, 2, "obs radius")?;
                        ObsMode::Radius(int_in(&args[1], "radius", 1, i64::from(RADIUS_MAX))? as u8)
                    }
                    Some(other) => {
                        return Err(err(
                            args[0].pos(),
                            format!("expected `full` or `radius`, found `{other}`"),
                        ))
                    }
                    None => return Err(err(field.pos(), "expected observation mode")),
                };
                once(&mut obs, mode, field, name)?;
            }
            "noise" => {
                arity(field, args, 1, "noise")?;
                let n = keyword(&args[0], "noise", &Noise::ALL, |n| n.literal())?;
                once(&mut noise, n, field, name)?;
            }
            "horizon" => {
                arity(field, args, 1, "horizon")?;
                let v = int_in(&args[0], "horizon", 0, i64::from(u16::MAX))? as u16;
                if !HORIZONS.contains(&v) {
                    return Err(err(
                        args[0].pos(),
                        format!("horizon must be one of {HORIZONS:?}, found {v}"),
                    ));
                }
                once(&mut horizon, v, field, name)?;
            }
            "opponent" => {
                let policy = read_opponent(field, args)?;
                once(&mut opponent, policy, field, name)?;
            }
            "init" => {
                let mut placements = Vec::new();
                for p in args {
                    let (kind, xy) = form_args(p, "placement")?;
                    let pc: Piece = kind.parse().map_err(|_| {
                        err(p.pos(), format!("expected placement piece, found `{kind}`"))
                    })?;
                    arity(p, xy, 2, "placement")?;
                    let x = int_in(&xy[0], "x", 0, i64::from(GRID_MAX) - 1)? as u8;
                    let y = int_in(&xy[1], "y", 0, i64::from(GRID_MAX) - 1)? as u8;
                    placements.push(Placement::new(pc, x, y));
                }
                once(&mut layout, placements, field, name)?;
            }
            "actions" => {
                let acts = args
                    .iter()
                    .map(|a| keyword(a, "action", &ActionKind::ALL, |k| k.name()))
                    .collect::<Result<Vec<_>, _>>()?;
                once(&mut actions, acts, field, name)?;
            }
            "rules" => {
                let rs = args.iter().map(read_rule).collect::<Result<Vec<_>, _>>()?;
                once(&mut rules, rs, field, name)?;
            }
            "score" => {
                arity(field, args, 3, "score")?;
                let s = Scoring {
                    step_delta: int_in(&args[0], "step delta", -1, 1)? as i8,
                    win_reward: int_in(&args[1], "win reward", 0, i64::from(WIN_MAX))? as i8,
                    lose_reward: int_in(&args[2], "lose reward", i64::from(LOSE_MIN), 0)? as i8,
                };
                once(&mut scoring, s, field, name)?;
            }
            other => {
                return Err(err(
                    field.pos(),
                    format!("expected game field (grid, players, obs, noise, horizon, opponent, init, actions, rules, score), found `{other}`"),
                ))
            }
        }
    }

    let missing = |what: &str| err(form.pos(), format!("missing `{what}` field"));
    let (grid_w, grid_h) = grid.ok_or_else(|| missing("grid"))?;
    Ok(GameDescription {
        grid_w,
        grid_h,
        players: players.ok_or_else(|| missing("players"))?,
        obs_mode: obs.ok_or_else(|| missing("obs"))?,
        noise: noise.ok_or_else(|| missing("noise"))?,
        horizon: horizon.ok_or_else(|| missing("horizon"))?,
        opponent: opponent.flatten(),
        layout: layout.ok_or_else(|| missing("init"))?,
        actions: actions.ok_or_else(|| missing("actions"))?,
        rules: rules.unwrap_or_default(),
        scoring: scoring.ok_or_else(|| missing("score"))?,
        desc_len_bits: 0.0,
    })
}

fn read_opponent(field: &Sexp, args: &[Sexp]) -> Result<Option<OpponentPolicy>, ParseError> {
    let kind = args
        .first()
        .ok_or_else(|| err(field.pos(), "expected opponent policy"))?;
    let target = |what| -> Result<Piece, ParseError> {
        arity(field, args, 2, what)?;
        let t = piece(&args[1])?;
        if !Piece::TARGETS.contains(&t) {
            return Err(err(
                args[1].pos(),
                format!("{t} cannot be an opponent target"),
            ));
        }
        Ok(t)
    };
    Ok(match atom(kind, "opponent policy")? {
        "none" => {
            arity(field, args, 1, "opponent none")?;
            None
        }
        "random" => {
            arity(field, args, 1, "opponent random")?;
            Some(OpponentPolicy::Random)
        }
        "chase" => Some(OpponentPolicy::Chase(target("opponent chase")?)),
        "flee" => Some(OpponentPolicy::Flee(target("opponent flee")?)),
        "greedy" => Some(OpponentPolicy::Greedy(target("opponent greedy")?)),
        other => {
            return Err(err(
                kind.pos(),
                format!(
                    "expected opponent policy (none, random, chase, flee, greedy), found `{other}`"
                ),
            ))
        }
    })
}

fn read_rule(s: &Sexp) -> Result<Rule, ParseError> {
    let (head, args) = form_args(s, "`(when ...)`")?;
    if head != "when" {
        return Err(err(s.pos(), format!("expected `when`, found `{head}`")));
    }
    let cond = args
        .first()
        .ok_or_else(|| err(s.pos(), "expected rule condition"))?;
    let condition = read_condition(cond)?;
    if args.len() < 2 {
        return Err(err(s.pos(), "expected at least one rule effect"));
    }
    if args.len() - 1 > MAX_EFFECTS {
        return Err(err(
            args[1 + MAX_EFFECTS].pos(),
            format!("at most {MAX_EFFECTS} effects per rule"),
        ));
    }
    let effects = args[1..]
        .iter()
        .map(read_effect)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Rule { condition, effects })
}

fn read_condition(s: &Sexp) -> Result<Condition, ParseError> {
    let (head, args) = form_args(s, "condition")?;
    let cmp = |a: &Sexp| keyword(a, "comparison", &Cmp::ALL, |c| c.name());
    Ok(match head {
        "overlap" | "adjacent" => {
            arity(s, args, 2, head)?;
            let (p, q) = (piece(&args[0])?, piece(&args[1])?);
            if head == "overlap" {
                Condition::Overlap(p, q)
            } else {
                Condition::Adjacent(p, q)
            }
        }
        "count" => {
            arity(s, args, 3, "count")?;
            Condition::Count(
                piece(&args[0])?,
                cmp(&args[1])?,
                int_in(&args[2], "count", 0, i64::from(COUNT_MAX))? as u8,
            )
        }
        "tick" => {
            arity(s, args, 2, "tick")?;
            Condition::Tick(
                cmp(&args[0])?,
                int_in(
                    &args[1],
                    "tick",
                    0,
                    i64::from(*HORIZONS.last().unwrap()) - 1,
                )? as u16,
            )
        }
        other => {
            return Err(err(
                s.pos(),
                format!("expected condition (overlap, adjacent, count, tick), found `{other}`"),
            ))
        }
    })
}

fn read_effect(s: &Sexp) -> Result<Effect, ParseError> {
    let (head, args) = form_args(s, "effect")?;
    let mode = |a: &Sexp| {
        keyword(
            a,
            "placement mode",
            &[SpawnMode::Random, SpawnMode::Corner],
            |m| m.name(),
        )
    };
    Ok(match head {
        "reward" => {
            arity(s, args, 1, "reward")?;
            Effect::Reward(int_in(
                &args[0],
                "reward",
                i64::from(REWARD_MIN),
                i64::from(REWARD_MAX),
            )? as i8)
        }
        "remove" => {
            arity(s, args, 1, "remove")?;
            Effect::Remove(piece(&args[0])?)
        }
        "teleport" => {
            arity(s, args, 2, "teleport")?;
            Effect::Teleport(piece(&args[0])?, mode(&args[1])?)
        }
        "spawn" => {
            arity(s, args, 2, "spawn")?;
            Effect::Spawn(piece(&args[0])?, mode(&args[1])?)
        }
        "end" => {
            arity(s, args, 1, "end")?;
            Effect::End(keyword(&args[0], "result", &GameResult::ALL, |r| r.name())?)
        }
        other => {
            return Err(err(
                s.pos(),
                format!("expected effect (reward, remove, teleport, spawn, end), found `{other}`"),
            ))
        }
    })
}

/// Canonical text: single spaces, fixed field order, sorted placements.
pub fn serialize(desc: &GameDescription) -> String {
    let mut out = String::new();
    write_game(&mut out, desc).expect("writing to a String cannot fail");
    out
}

fn write_game(out: &mut String, d: &GameDescription) -> fmt::Result {
    write!(
        out,
        "(game (grid {} {}) (players {})",
        d.grid_w, d.grid_h, d.players
    )?;
    match d.obs_mode {
        ObsMode::Full => out.push_str(" (obs full)"),
        ObsMode::Radius(r) => write!(out, " (obs radius {r})")?,
    }
    write!(
        out,
        " (noise {}) (horizon {})",
        d.noise.literal(),
        d.horizon
    )?;
    match d.opponent {
        None => {}
        Some(OpponentPolicy::Random) => out.push_str(" (opponent random)"),
        Some(OpponentPolicy::Chase(t)) => write!(out, " (opponent chase {t})")?,
        Some(OpponentPolicy::Flee(t)) => write!(out, " (opponent flee {t})")?,
        Some(OpponentPolicy::Greedy(t)) => write!(out, " (opponent greedy {t})")?,
    }
    out.push_str(" (init");
    let mut layout = d.layout.clone();
    layout.sort_by_key(Placement::sort_key);
    for p in &layout {
        write!(out, " ({} {} {})", p.piece, p.x, p.y)?;
    }
    out.push_str(") (actions");
    let mut actions = d.actions.clone();
    actions.sort();
    for a in &actions {
        write!(out, " {a}")?;
    }
    out.push_str(") (rules");
    for r in &d.rules {
        out.push_str(" (when ");
        match r.condition {
            Condition::Overlap(p, q) => write!(out, "(overlap {p} {q})")?,
            Condition::Adjacent(p, q) => write!(out, "(adjacent {p} {q})")?,
            Condition::Count(p, c, n) => write!(out, "(count {p} {} {n})", c.name())?,
            Condition::Tick(c, n) => write!(out, "(tick {} {n})", c.name())?,
        }
        for e in &r.effects {
            match *e {
                Effect::Reward(v) => write!(out, " (reward {v})")?,
                Effect::Remove(p) => write!(out, " (remove {p})")?,
                Effect::Teleport(p, m) => write!(out, " (teleport {p} {})", m.name())?,
                Effect::Spawn(p, m) => write!(out, " (spawn {p} {})", m.name())?,
                Effect::End(r) => write!(out, " (end {})", r.name())?,
            }
        }
        out.push(')');
    }
    let s = &d.scoring;
    write!(
        out,
        ") (score {} {} {}))",
        s.step_delta, s.win_reward, s.lose_reward
    )
}
