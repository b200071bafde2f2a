use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{Agent, MctsAgent, MctsConfig, QLearnAgent, QLearnConfig, RandomAgent};
use crate::proto::{ExternalAgent, ExternalConfig};

/// Agent selection string, e.g. `qlearn:alpha=0.2,gamma=0.95,eps=0.1,switch=0.5`.
///
/// Forms: `random[:cost=N]`, `qlearn:...`, `mcts:sims=N,horizon=N,switch=F`,
/// `cmd:"<shell command>"`, `tcp:<host>:<port>`. Omitted parameters take
/// their defaults.
#[derive(Clone, Debug, PartialEq)]
pub enum AgentSpec {
    Random { cost: u64 },
    QLearn(QLearnConfig),
    Mcts(MctsConfig),
    Command(String),
    Tcp(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("unknown agent kind `{0}`")]
    UnknownKind(String),
    #[error("unknown parameter `{key}` for {kind}")]
    UnknownParam { kind: &'static str, key: String },
    #[error("bad value for `{key}`: {value} ({reason})")]
    BadValue {
        key: String,
        value: String,
        reason: &'static str,
    },
    #[error("malformed parameter `{0}`, expected key=value")]
    Malformed(String),
    #[error("missing target in `{0}`")]
    MissingTarget(String),
}

fn params(s: &str) -> Result<Vec<(String, String)>, SpecError> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| SpecError::Malformed(kv.to_string()))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn number<T: FromStr>(key: &str, value: &str) -> Result<T, SpecError> {
    value.parse().map_err(|_| SpecError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: "not a number",
    })
}

fn in_range(key: &str, v: f64, ok: bool, reason: &'static str) -> Result<f64, SpecError> {
    if ok {
        Ok(v)
    } else {
        Err(SpecError::BadValue {
            key: key.to_string(),
            value: v.to_string(),
            reason,
        })
    }
}

fn unit_open_closed(key: &str, v: f64) -> Result<f64, SpecError> {
    in_range(key, v, v > 0.0 && v <= 1.0, "must lie in (0,1]")
}

impl FromStr for AgentSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "random" => {
                let mut cost = 1;
                for (k, v) in params(rest)? {
                    match k.as_str() {
                        "cost" => cost = number(&k, &v)?,
                        _ => {
                            return Err(SpecError::UnknownParam {
                                kind: "random",
                                key: k,
                            })
                        }
                    }
                }
                if cost == 0 {
                    return Err(SpecError::BadValue {
                        key: "cost".into(),
                        value: "0".into(),
                        reason: "must be at least 1",
                    });
                }
                Ok(AgentSpec::Random { cost })
            }
            "qlearn" => {
                let mut c = QLearnConfig::default();
                for (k, v) in params(rest)? {
                    let x: f64 = number(&k, &v)?;
                    match k.as_str() {
                        "alpha" => c.alpha = unit_open_closed(&k, x)?,
                        "gamma" => c.gamma = unit_open_closed(&k, x)?,
                        "eps" => c.epsilon = unit_open_closed(&k, x)?,
                        "switch" => {
                            c.switch_fraction =
                                in_range(&k, x, x > 0.0 && x < 1.0, "must lie in (0,1)")?
                        }
                        "eval_eps" => {
                            c.eval_epsilon =
                                in_range(&k, x, (0.0..=1.0).contains(&x), "must lie in [0,1]")?
                        }
                        _ => {
                            return Err(SpecError::UnknownParam {
                                kind: "qlearn",
                                key: k,
                            })
                        }
                    }
                }
                Ok(AgentSpec::QLearn(c))
            }
            "mcts" => {
                let mut c = MctsConfig::default();
                for (k, v) in params(rest)? {
                    match k.as_str() {
                        "sims" => {
                            c.simulations = number(&k, &v)?;
                            if c.simulations == 0 {
                                return Err(SpecError::BadValue {
                                    key: k,
                                    value: v,
                                    reason: "must be at least 1",
                                });
                            }
                        }
                        "horizon" => c.horizon = number(&k, &v)?,
                        "switch" => {
                            let x: f64 = number(&k, &v)?;
                            c.switch_fraction =
                                in_range(&k, x, (0.0..1.0).contains(&x), "must lie in [0,1)")?;
                        }
                        _ => {
                            return Err(SpecError::UnknownParam {
                                kind: "mcts",
                                key: k,
                            })
                        }
                    }
                }
                Ok(AgentSpec::Mcts(c))
            }
            "cmd" => {
                let cmd = rest.trim();
                let cmd = cmd
                    .strip_prefix('"')
                    .and_then(|c| c.strip_suffix('"'))
                    .unwrap_or(cmd);
                if cmd.is_empty() {
                    return Err(SpecError::MissingTarget(s.to_string()));
                }
                Ok(AgentSpec::Command(cmd.to_string()))
            }
            "tcp" => {
                if !rest.contains(':') {
                    return Err(SpecError::MissingTarget(s.to_string()));
                }
                Ok(AgentSpec::Tcp(rest.to_string()))
            }
            other => Err(SpecError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentSpec::Random { cost: 1 } => f.write_str("random"),
            AgentSpec::Random { cost } => write!(f, "random:cost={cost}"),
            AgentSpec::QLearn(c) => write!(
                f,
                "qlearn:alpha={},gamma={},eps={},switch={},eval_eps={}",
                c.alpha, c.gamma, c.epsilon, c.switch_fraction, c.eval_epsilon
            ),
            AgentSpec::Mcts(c) => write!(
                f,
                "mcts:sims={},horizon={},switch={}",
                c.simulations, c.horizon, c.switch_fraction
            ),
            AgentSpec::Command(c) => write!(f, "cmd:\"{c}\""),
            AgentSpec::Tcp(addr) => write!(f, "tcp:{addr}"),
        }
    }
}

impl AgentSpec {
    pub fn is_external(&self) -> bool {
        matches!(self, AgentSpec::Command(_) | AgentSpec::Tcp(_))
    }

    /// A fresh agent instance; external agents connect per evaluation.
    pub fn build(&self, external: &ExternalConfig) -> Box<dyn Agent> {
        match self {
            AgentSpec::Random { cost } => Box::new(RandomAgent::with_cost(*cost)),
            AgentSpec::QLearn(c) => Box::new(QLearnAgent::new(*c)),
            AgentSpec::Mcts(c) => Box::new(MctsAgent::new(*c)),
            AgentSpec::Command(cmd) => Box::new(ExternalAgent::command(cmd, external.clone())),
            AgentSpec::Tcp(addr) => Box::new(ExternalAgent::tcp(addr, external.clone())),
        }
    }
}
