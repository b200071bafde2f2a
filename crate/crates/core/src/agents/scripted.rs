use super::{Agent, AgentError, Decision, GameInfo, Percept, Response};

type Policy = Box<dyn FnMut(&GameInfo, &Percept<'_>) -> Response + Send>;

/// An agent driven by a closure; handy for fixed trajectories and oracles.
pub struct ScriptedAgent {
    id: String,
    cost: u64,
    info: Option<GameInfo>,
    policy: Policy,
}

impl ScriptedAgent {
    pub fn new<F>(id: &str, cost: u64, policy: F) -> Self
    where
        F: FnMut(&GameInfo, &Percept<'_>) -> Response + Send + 'static,
    {
        ScriptedAgent {
            id: id.to_string(),
            cost,
            info: None,
            policy: Box::new(policy),
        }
    }

    /// Plays `responses` in order, then passes.
    pub fn sequence(id: &str, cost: u64, responses: Vec<Response>) -> Self {
        let mut it = responses.into_iter();
        Self::new(id, cost, move |_, _| it.next().unwrap_or(Response::Pass))
    }
}

impl Agent for ScriptedAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn init(&mut self, info: &GameInfo) -> Result<(), AgentError> {
        self.info = Some(info.clone());
        Ok(())
    }

    fn decide(&mut self, p: &Percept<'_>) -> Result<Decision, AgentError> {
        let info = self
            .info
            .as_ref()
            .ok_or_else(|| AgentError::Transport("agent not initialized".into()))?;
        Ok(Decision::new((self.policy)(info, p), self.cost))
    }
}
