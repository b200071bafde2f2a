use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::types::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    OutOfRange,
    MissingAvatar,
    MultipleAvatars,
    OutOfGrid,
    DuplicatePlacement,
    OppMissing,
    OppUnexpected,
    MultipleOpps,
    NoActions,
    DuplicateAction,
    UnusableAction,
    TooManyRules,
    NoEffects,
    TooManyEffects,
    BadEffectPiece,
    NoTerminalRule,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::OutOfRange => "OUT_OF_RANGE",
            IssueCode::MissingAvatar => "MISSING_AVATAR",
            IssueCode::MultipleAvatars => "MULTIPLE_AVATARS",
            IssueCode::OutOfGrid => "OUT_OF_GRID",
            IssueCode::DuplicatePlacement => "DUPLICATE_PLACEMENT",
            IssueCode::OppMissing => "OPP_MISSING",
            IssueCode::OppUnexpected => "OPP_UNEXPECTED",
            IssueCode::MultipleOpps => "MULTIPLE_OPPS",
            IssueCode::NoActions => "NO_ACTIONS",
            IssueCode::DuplicateAction => "DUPLICATE_ACTION",
            IssueCode::UnusableAction => "UNUSABLE_ACTION",
            IssueCode::TooManyRules => "TOO_MANY_RULES",
            IssueCode::NoEffects => "NO_EFFECTS",
            IssueCode::TooManyEffects => "TOO_MANY_EFFECTS",
            IssueCode::BadEffectPiece => "BAD_EFFECT_PIECE",
            IssueCode::NoTerminalRule => "NO_TERMINAL_RULE",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            IssueCode::NoTerminalRule => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub code: IssueCode,
    pub severity: Severity,
    pub message: String,
    /// Path into the description, e.g. `rules[2].effects[0]`.
    pub location: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for issue in self.errors() {
            if !first {
                f.write_str("; ")?;
            }
            first = false;
            write!(f, "{} at {}: {}", issue.code, issue.location, issue.message)?;
        }
        Ok(())
    }
}

struct Collector(Vec<Issue>);

impl Collector {
    fn push(&mut self, code: IssueCode, location: impl Into<String>, message: impl Into<String>) {
        self.0.push(Issue {
            code,
            severity: code.severity(),
            message: message.into(),
            location: location.into(),
        });
    }

    fn range<T: PartialOrd + fmt::Display>(&mut self, loc: &str, v: T, lo: T, hi: T) {
        if v < lo || v > hi {
            self.push(
                IssueCode::OutOfRange,
                loc,
                format!("{v} outside {lo}..{hi}"),
            );
        }
    }
}

/// Enumerates every semantic violation in a description.
pub fn validate(desc: &GameDescription) -> ValidationReport {
    let mut c = Collector(Vec::new());

    c.range("grid.w", desc.grid_w, GRID_MIN, GRID_MAX);
    c.range("grid.h", desc.grid_h, GRID_MIN, GRID_MAX);
    c.range("players", desc.players, 1, 2);
    if let ObsMode::Radius(r) = desc.obs_mode {
        c.range("obs.radius", r, 1, RADIUS_MAX);
    }
    if !HORIZONS.contains(&desc.horizon) {
        c.push(
            IssueCode::OutOfRange,
            "horizon",
            format!("{} not one of {HORIZONS:?}", desc.horizon),
        );
    }
    c.range("score.step", desc.scoring.step_delta, -1, 1);
    c.range("score.win", desc.scoring.win_reward, 0, WIN_MAX);
    c.range("score.lose", desc.scoring.lose_reward, LOSE_MIN, 0);
    if let Some(OpponentPolicy::Chase(t) | OpponentPolicy::Flee(t) | OpponentPolicy::Greedy(t)) =
        desc.opponent
    {
        if !Piece::TARGETS.contains(&t) {
            c.push(
                IssueCode::BadEffectPiece,
                "opponent",
                format!("{t} is not a valid opponent target"),
            );
        }
    }

    check_layout(desc, &mut c);
    check_actions(desc, &mut c);
    check_rules(desc, &mut c);

    let issues = c.0;
    ValidationReport {
        ok: issues.iter().all(|i| i.severity != Severity::Error),
        issues,
    }
}

fn check_layout(desc: &GameDescription, c: &mut Collector) {
    let mut seen = HashSet::new();
    let mut avatars = 0;
    let mut opps = 0;
    for (i, p) in desc.layout.iter().enumerate() {
        let loc = format!("layout[{i}]");
        if p.x >= desc.grid_w || p.y >= desc.grid_h {
            c.push(
                IssueCode::OutOfGrid,
                &loc,
                format!("{} at ({}, {}) outside the grid", p.piece, p.x, p.y),
            );
        }
        if !seen.insert(*p) {
            c.push(
                IssueCode::DuplicatePlacement,
                &loc,
                format!("second {} at ({}, {})", p.piece, p.x, p.y),
            );
        }
        match p.piece {
            Piece::Avatar => avatars += 1,
            Piece::Opp => opps += 1,
            _ => {}
        }
    }
    if avatars == 0 {
        c.push(IssueCode::MissingAvatar, "layout", "no avatar placed");
    } else if avatars > 1 {
        c.push(
            IssueCode::MultipleAvatars,
            "layout",
            format!("{avatars} avatars placed"),
        );
    }
    if desc.needs_opp() {
        if opps == 0 {
            c.push(
                IssueCode::OppMissing,
                "layout",
                "opponent or second player declared without an opp placement",
            );
        }
    } else if opps > 0 {
        c.push(
            IssueCode::OppUnexpected,
            "layout",
            "opp placed but neither an opponent nor a second player is declared",
        );
    }
    if opps > 1 {
        c.push(
            IssueCode::MultipleOpps,
            "layout",
            format!("{opps} opp pieces placed"),
        );
    }
}

fn check_actions(desc: &GameDescription, c: &mut Collector) {
    if desc.actions.is_empty() {
        c.push(IssueCode::NoActions, "actions", "no actions declared");
    }
    let mut seen = HashSet::new();
    for (i, a) in desc.actions.iter().enumerate() {
        if !seen.insert(*a) {
            c.push(
                IssueCode::DuplicateAction,
                format!("actions[{i}]"),
                format!("{a} declared twice"),
            );
        }
    }
    if desc.actions.contains(&ActionKind::Place) && !desc.place_usable() {
        c.push(
            IssueCode::UnusableAction,
            "actions",
            "place requires two players or a spawn rule",
        );
    }
}

fn check_rules(desc: &GameDescription, c: &mut Collector) {
    if desc.rules.len() > MAX_RULES {
        c.push(
            IssueCode::TooManyRules,
            "rules",
            format!("{} rules, at most {MAX_RULES}", desc.rules.len()),
        );
    }
    let mut terminal = false;
    for (i, rule) in desc.rules.iter().enumerate() {
        let loc = format!("rules[{i}]");
        match rule.condition {
            Condition::Count(_, _, n) => c.range(&format!("{loc}.count"), n, 0, COUNT_MAX),
            Condition::Tick(_, n) if n >= desc.horizon => c.push(
                IssueCode::OutOfRange,
                format!("{loc}.tick"),
                format!("{n} outside 0..{}", desc.horizon.saturating_sub(1)),
            ),
            _ => {}
        }
        if rule.effects.is_empty() {
            c.push(IssueCode::NoEffects, &loc, "rule has no effects");
        }
        if rule.effects.len() > MAX_EFFECTS {
            c.push(
                IssueCode::TooManyEffects,
                &loc,
                format!("{} effects, at most {MAX_EFFECTS}", rule.effects.len()),
            );
        }
        for (j, e) in rule.effects.iter().enumerate() {
            let eloc = format!("{loc}.effects[{j}]");
            match *e {
                Effect::Reward(d) => c.range(&eloc, d, REWARD_MIN, REWARD_MAX),
                Effect::Remove(p) | Effect::Spawn(p, _) if !p.is_static() => c.push(
                    IssueCode::BadEffectPiece,
                    eloc,
                    format!("{p} cannot be removed or spawned"),
                ),
                Effect::End(_) => terminal = true,
                _ => {}
            }
        }
    }
    if !terminal {
        c.push(
            IssueCode::NoTerminalRule,
            "rules",
            "no end effect; episodes only stop at the horizon",
        );
    }
}
