use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gdl::ActionKind;

/// A concrete action symbol.
///
/// `place` is expanded into one symbol per target cell (`place:x,y`); `pass`
/// leaves the player's piece untouched for the tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
    Stay,
    Place { x: u8, y: u8 },
    Pass,
}

impl Action {
    pub fn kind(self) -> Option<ActionKind> {
        Some(match self {
            Action::Up => ActionKind::Up,
            Action::Down => ActionKind::Down,
            Action::Left => ActionKind::Left,
            Action::Right => ActionKind::Right,
            Action::Stay => ActionKind::Stay,
            Action::Place { .. } => ActionKind::Place,
            Action::Pass => return None,
        })
    }

    pub fn is_move(self) -> bool {
        self.kind().is_some_and(ActionKind::is_move)
    }

    /// Offset applied by a move.
    pub fn delta(self) -> (i8, i8) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            _ => (0, 0),
        }
    }

    /// Moves in tie-breaking order.
    pub const MOVES: [Action; 5] = [
        Action::Up,
        Action::Down,
        Action::Left,
        Action::Right,
        Action::Stay,
    ];
}

impl From<ActionKind> for Action {
    /// Movement kinds map directly; `place` maps to a placeholder at (0, 0).
    fn from(kind: ActionKind) -> Self {
        match kind {
            ActionKind::Up => Action::Up,
            ActionKind::Down => Action::Down,
            ActionKind::Left => Action::Left,
            ActionKind::Right => Action::Right,
            ActionKind::Stay => Action::Stay,
            ActionKind::Place => Action::Place { x: 0, y: 0 },
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Place { x, y } => write!(f, "place:{x},{y}"),
            Action::Pass => f.write_str("pass"),
            other => f.write_str(other.kind().expect("movement").name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown action symbol `{0}`")]
pub struct UnknownAction(pub String);

impl FromStr for Action {
    type Err = UnknownAction;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "pass" {
            return Ok(Action::Pass);
        }
        if let Some(target) = s.strip_prefix("place:") {
            let (x, y) = target
                .split_once(',')
                .ok_or_else(|| UnknownAction(s.to_string()))?;
            let x = x.parse().map_err(|_| UnknownAction(s.to_string()))?;
            let y = y.parse().map_err(|_| UnknownAction(s.to_string()))?;
            return Ok(Action::Place { x, y });
        }
        match s.parse::<ActionKind>() {
            Ok(k) if k.is_move() => Ok(k.into()),
            _ => Err(UnknownAction(s.to_string())),
        }
    }
}

impl From<Action> for String {
    fn from(a: Action) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for Action {
    type Error = UnknownAction;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
