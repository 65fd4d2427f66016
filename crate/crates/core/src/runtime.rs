//! Online execution of a belief strategy against a stream of observations.

use alloc::vec::Vec;

use crate::belief::{BeliefAction, BeliefGraph, BeliefId};
use crate::cost::Cost;
use crate::model::{NtsModel, ObsSet};
use crate::synthesis::Strategy;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionStatus {
    Running,
    Satisfied,
    /// An observation matched no successor; the belief is the last consistent one.
    OffStrategy,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("strategy has no winning choice at the initial belief")]
    Infeasible,
    #[error("session is not running")]
    NotRunning,
    #[error("strategy has no command at belief {0}")]
    NoCommand(BeliefId),
    #[error("no command was issued before the observation")]
    NoPendingCommand,
    #[error("observation matches no successor belief")]
    OffStrategy,
}

#[derive(Clone, Debug)]
pub struct Session<'a> {
    strategy: &'a Strategy,
    graph: &'a BeliefGraph,
    current: BeliefId,
    history: Vec<(BeliefId, BeliefAction, ObsSet)>,
    cost: Cost,
    status: SessionStatus,
    pending: Option<BeliefAction>,
}

pub fn start_session<'a>(
    strategy: &'a Strategy,
    graph: &'a BeliefGraph,
) -> Result<Session<'a>, SessionError> {
    let init = graph.init();
    if !strategy.wtg(init).is_finite() {
        return Err(SessionError::Infeasible);
    }
    let status =
        if graph.is_accepting(init) { SessionStatus::Satisfied } else { SessionStatus::Running };
    Ok(Session {
        strategy,
        graph,
        current: init,
        history: Vec::new(),
        cost: strategy.init_cost,
        status,
        pending: None,
    })
}

impl<'a> Session<'a> {
    pub fn current_belief(&self) -> BeliefId {
        self.current
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    /// `g_{m_init}` plus every traversed edge weight.
    pub fn accumulated_cost(&self) -> Cost {
        self.cost
    }

    pub fn history(&self) -> &[(BeliefId, BeliefAction, ObsSet)] {
        &self.history
    }

    pub fn steps(&self) -> u32 {
        self.history.len() as u32
    }

    pub fn next_command(&mut self) -> Result<BeliefAction, SessionError> {
        if self.status != SessionStatus::Running {
            return Err(SessionError::NotRunning);
        }
        let act = self
            .strategy
            .command(self.current, self.steps())
            .ok_or(SessionError::NoCommand(self.current))?;
        self.pending = Some(act);
        Ok(act)
    }

    pub fn feed_observation(&mut self, obs: &ObsSet) -> Result<SessionStatus, SessionError> {
        if self.status != SessionStatus::Running {
            return Err(SessionError::NotRunning);
        }
        let act = self.pending.ok_or(SessionError::NoPendingCommand)?;
        let edge = self.graph.edge(self.current, act).ok_or(SessionError::NoCommand(self.current))?;
        let Some((_, next)) = edge.successors.iter().find(|(o, _)| o == obs) else {
            self.status = SessionStatus::OffStrategy;
            return Err(SessionError::OffStrategy);
        };
        self.history.push((self.current, act, obs.clone()));
        self.cost = self.cost + edge.weight;
        self.current = *next;
        self.pending = None;
        if self.graph.is_accepting(self.current) {
            self.status = SessionStatus::Satisfied;
        }
        Ok(self.status)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplayOutcome {
    /// The command issued after the last observation.
    Command(BeliefAction),
    Satisfied,
}

/// Folds a full observation sequence, starting with the observation of the
/// initial configuration, through a fresh session.
pub fn replay(
    model: &NtsModel,
    strategy: &Strategy,
    graph: &BeliefGraph,
    observations: &[ObsSet],
) -> Result<ReplayOutcome, SessionError> {
    let mut session = start_session(strategy, graph)?;
    let Some((first, rest)) = observations.split_first() else {
        return Err(SessionError::OffStrategy);
    };
    if first != model.observe(model.init_mode(), model.init()) {
        return Err(SessionError::OffStrategy);
    }
    for obs in rest {
        session.next_command()?;
        session.feed_observation(obs)?;
    }
    match session.status() {
        SessionStatus::Satisfied => Ok(ReplayOutcome::Satisfied),
        _ => session.next_command().map(ReplayOutcome::Command),
    }
}
