use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::agents::{GameInfo, Outcome, Percept, Phase, Response};
use crate::engine::Action;

/// One line of the agent wire protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Message {
    Init {
        game_id: String,
        actions: Vec<String>,
        obs_mode: String,
        grid: [u8; 2],
        players: u8,
        #[serde(rename = "budget_T")]
        budget_t: u64,
        bounds: [i32; 2],
    },
    Obs {
        tick: u16,
        phase: Phase,
        episode: u32,
        cells: String,
        reward_delta: i32,
        done: bool,
        clock_remaining: u64,
    },
    Act {
        action: String,
    },
    Switch {},
    Pass {},
    Result {
        v: f64,
        switched: bool,
        episodes: u32,
    },
}

impl Message {
    pub fn init(info: &GameInfo) -> Message {
        let d = &info.desc;
        Message::Init {
            game_id: info.game_id.clone(),
            actions: d.actions.iter().map(|a| a.name().to_string()).collect(),
            obs_mode: d.obs_mode.to_string(),
            grid: [d.grid_w, d.grid_h],
            players: d.players,
            budget_t: info.budget,
            bounds: [info.bounds.r_min, info.bounds.r_max],
        }
    }

    pub fn obs(p: &Percept<'_>) -> Message {
        Message::Obs {
            tick: p.tick,
            phase: p.phase,
            episode: p.episode,
            cells: p.cells.clone(),
            reward_delta: p.reward_delta,
            done: p.done,
            clock_remaining: p.clock_remaining,
        }
    }

    pub fn response(r: Response) -> Message {
        match r {
            Response::Act(Action::Pass) | Response::Pass => Message::Pass {},
            Response::Act(a) => Message::Act {
                action: a.to_string(),
            },
            Response::Switch => Message::Switch {},
        }
    }

    pub fn result(o: &Outcome) -> Message {
        Message::Result {
            v: o.v,
            switched: o.switched,
            episodes: o.episodes,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Message::Init { .. } => "init",
            Message::Obs { .. } => "obs",
            Message::Act { .. } => "act",
            Message::Switch {} => "switch",
            Message::Pass {} => "pass",
            Message::Result { .. } => "result",
        }
    }

    /// Converts an agent reply into a response.
    pub fn into_response(self) -> Result<Response, ProtocolError> {
        match self {
            Message::Act { action } => action
                .parse::<Action>()
                .map(|a| match a {
                    Action::Pass => Response::Pass,
                    a => Response::Act(a),
                })
                .map_err(|e| ProtocolError::new(ErrorCode::BadValue, 0, e.to_string())),
            Message::Switch {} => Ok(Response::Switch),
            Message::Pass {} => Ok(Response::Pass),
            other => Err(ProtocolError::new(
                ErrorCode::Unexpected,
                0,
                format!("agent sent `{}`", other.type_name()),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorCode {
    Syntax,
    NotObject,
    MissingField,
    UnknownType,
    UnknownField,
    BadValue,
    Unexpected,
    Closed,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorCode::Syntax => "SYNTAX",
            ErrorCode::NotObject => "NOT_OBJECT",
            ErrorCode::MissingField => "MISSING_FIELD",
            ErrorCode::UnknownType => "UNKNOWN_TYPE",
            ErrorCode::UnknownField => "UNKNOWN_FIELD",
            ErrorCode::BadValue => "BAD_VALUE",
            ErrorCode::Unexpected => "UNEXPECTED",
            ErrorCode::Closed => "CLOSED",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{code} at byte {offset}: {message}")]
pub struct ProtocolError {
    pub code: ErrorCode,
    pub offset: usize,
    pub message: String,
}

impl ProtocolError {
    pub fn new(code: ErrorCode, offset: usize, message: impl Into<String>) -> Self {
        ProtocolError {
            code,
            offset,
            message: message.into(),
        }
    }
}

/// One compact JSON object followed by a newline.
pub fn encode(msg: &Message) -> String {
    let mut s = serde_json::to_string(msg).expect("messages always serialize");
    s.push('\n');
    s
}

/// Field names per message type, in wire order.
fn fields(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "init" => &[
            "game_id", "actions", "obs_mode", "grid", "players", "budget_T", "bounds",
        ],
        "obs" => &[
            "tick",
            "phase",
            "episode",
            "cells",
            "reward_delta",
            "done",
            "clock_remaining",
        ],
        "act" => &["action"],
        "switch" | "pass" => &[],
        "result" => &["v", "switched", "episodes"],
        _ => return None,
    })
}

/// Byte offset of `"key"` used as an object key, or of the closing brace.
fn key_offset(line: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    let mut from = 0;
    while let Some(i) = line[from..].find(&quoted) {
        let at = from + i;
        if line[at + quoted.len()..].trim_start().starts_with(':') {
            return at;
        }
        from = at + quoted.len();
    }
    line.trim_end().len().saturating_sub(1)
}

/// Strict decoding: unknown types, unknown keys, missing keys and ill-typed
/// values are all rejected with the byte offset of the offending key.
pub fn decode(line: &str) -> Result<Message, ProtocolError> {
    let text = line.strip_suffix('\n').unwrap_or(line);
    let text = text.strip_suffix('\r').unwrap_or(text);
    let value: Value = serde_json::from_str(text).map_err(|e| {
        if e.is_eof() {
            return ProtocolError::new(ErrorCode::Syntax, text.len(), e.to_string());
        }
        let offset = text
            .split_inclusive('\n')
            .take(e.line().saturating_sub(1))
            .map(str::len)
            .sum::<usize>()
            + e.column().saturating_sub(1);
        ProtocolError::new(ErrorCode::Syntax, offset, e.to_string())
    })?;
    let Value::Object(map) = &value else {
        return Err(ProtocolError::new(
            ErrorCode::NotObject,
            0,
            "expected a JSON object",
        ));
    };
    let kind = match map.get("type") {
        None => {
            return Err(ProtocolError::new(
                ErrorCode::MissingField,
                key_offset(text, "type"),
                "missing field `type`",
            ))
        }
        Some(Value::String(s)) => s.as_str(),
        Some(_) => {
            return Err(ProtocolError::new(
                ErrorCode::BadValue,
                key_offset(text, "type"),
                "`type` must be a string",
            ))
        }
    };
    let Some(expected) = fields(kind) else {
        return Err(ProtocolError::new(
            ErrorCode::UnknownType,
            key_offset(text, "type"),
            format!("unknown message type `{kind}`"),
        ));
    };
    for key in map.keys() {
        if key != "type" && !expected.contains(&key.as_str()) {
            return Err(ProtocolError::new(
                ErrorCode::UnknownField,
                key_offset(text, key),
                format!("unknown field `{key}` in `{kind}`"),
            ));
        }
    }
    for key in expected {
        if !map.contains_key(*key) {
            return Err(ProtocolError::new(
                ErrorCode::MissingField,
                key_offset(text, key),
                format!("missing field `{key}` in `{kind}`"),
            ));
        }
    }
    serde_json::from_value(value.clone()).map_err(|e| {
        let offset = bad_field(kind, &map_of(&value)).map_or(0, |k| key_offset(text, k));
        ProtocolError::new(ErrorCode::BadValue, offset, e.to_string())
    })
}

fn map_of(v: &Value) -> serde_json::Map<String, Value> {
    v.as_object().cloned().unwrap_or_default()
}

/// A well-formed message of the given type, used to isolate bad fields.
fn template(kind: &str) -> Option<Message> {
    Some(match kind {
        "init" => Message::Init {
            game_id: String::new(),
            actions: Vec::new(),
            obs_mode: String::new(),
            grid: [0, 0],
            players: 1,
            budget_t: 0,
            bounds: [0, 0],
        },
        "obs" => Message::Obs {
            tick: 0,
            phase: Phase::Learn,
            episode: 0,
            cells: String::new(),
            reward_delta: 0,
            done: false,
            clock_remaining: 0,
        },
        "act" => Message::Act {
            action: String::new(),
        },
        "result" => Message::Result {
            v: 0.0,
            switched: false,
            episodes: 0,
        },
        _ => return None,
    })
}

/// First field (in wire order) whose value alone fails to deserialize.
fn bad_field(kind: &str, map: &serde_json::Map<String, Value>) -> Option<&'static str> {
    let base = serde_json::to_value(template(kind)?).ok()?;
    fields(kind)?.iter().copied().find(|k| {
        let mut probe = map_of(&base);
        probe.insert((*k).to_string(), map[*k].clone());
        serde_json::from_value::<Message>(Value::Object(probe)).is_err()
    })
}
