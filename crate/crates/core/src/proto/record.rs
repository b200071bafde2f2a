use super::message::{encode, Message};
use crate::agents::{Agent, AgentError, ClockMode, Decision, GameInfo, Outcome, Percept};

/// Wraps an agent and records the wire transcript its session would produce.
///
/// Lines from the harness are prefixed `> `, replies `< `.
pub struct Recorder<A> {
    inner: A,
    lines: Vec<String>,
}

impl<A: Agent> Recorder<A> {
    pub fn new(inner: A) -> Self {
        Recorder {
            inner,
            lines: Vec::new(),
        }
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn into_inner(self) -> (A, Vec<String>) {
        (self.inner, self.lines)
    }

    /// The transcript as text, one prefixed line per message.
    pub fn transcript(&self) -> String {
        self.lines.concat()
    }

    fn push(&mut self, dir: &str, msg: &Message) {
        self.lines.push(format!("{dir} {}", encode(msg)));
    }
}

impl<A: Agent> Agent for Recorder<A> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn white_box(&self) -> bool {
        self.inner.white_box()
    }

    fn clock_mode(&self) -> ClockMode {
        self.inner.clock_mode()
    }

    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError> {
        self.push(">", &Message::init(info));
        self.inner.init(info)
    }

    fn decide(&mut self, p: &Percept<'_>) -> Result<Decision, AgentError> {
        self.push(">", &Message::obs(p));
        let d = self.inner.decide(p)?;
        self.push("<", &Message::response(d.response));
        Ok(d)
    }

    fn finish(&mut self, outcome: &Outcome) -> Result<(), AgentError> {
        self.push(">", &Message::result(outcome));
        self.inner.finish(outcome)
    }
}
