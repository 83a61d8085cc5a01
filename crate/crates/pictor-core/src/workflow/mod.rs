//! Multi-agent workflow: a dispatcher selects tools, a planner works in
//! THOUGHT/ACTION/OBSERVATION steps over a tree of derived images, a visual
//! critic gates tool outputs, and a planning critic decides whether a
//! finished attempt deserves another round.
//!
//! Every agent is behind [`AgentBackend`], so the whole loop runs equally
//! against scripted replies (tests, replays) or a remote model.

mod engine;
mod memory;
mod parse;
pub mod prompts;

pub use engine::{
    dispatch, planning_critic_review, refine_loop, run_episode, DispatchRecord, EngineConfig,
    Episode, RoundRecord, RunConfig, RunResult, Trace, TraceStep,
};
pub use memory::{ImageMemory, MemoryEdge};
pub use parse::{
    parse_action_call, parse_bracket_list, parse_critique, parse_planner_reply,
    parse_visual_verdict, render_action, ActionCall, ArgValue, Critique, CriticVerdict,
    ParseFailure, PlannerMove,
};

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Dispatcher,
    Planner,
    Reasoner,
    VisualCritic,
    PlanningCritic,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::Dispatcher,
        Role::Planner,
        Role::Reasoner,
        Role::VisualCritic,
        Role::PlanningCritic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Role::Dispatcher => "dispatcher",
            Role::Planner => "planner",
            Role::Reasoner => "reasoner",
            Role::VisualCritic => "visual_critic",
            Role::PlanningCritic => "planning_critic",
        }
    }

    pub fn from_name(name: &str) -> Option<Role> {
        Role::ALL.iter().copied().find(|r| r.name() == name)
    }
}

/// One request to an agent: the full prompt text plus the images it should
/// look at, as (pool id, pixels) pairs.
pub struct AgentPrompt<'a> {
    pub role: Role,
    pub text: String,
    pub images: Vec<(String, &'a RasterImage)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendError {
    /// A scripted backend ran out of replies for a role; the script does
    /// not cover the path the run took.
    ScriptExhausted { role: Role },
    Remote { message: String },
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendError::ScriptExhausted { role } => {
                write!(f, "scripted backend has no more {} replies", role.name())
            }
            BackendError::Remote { message } => write!(f, "agent backend failed: {message}"),
        }
    }
}

/// Produces agent replies. Implementations decide what to do with the
/// attached images; scripted backends ignore them.
pub trait AgentBackend {
    fn id(&self) -> &str;

    fn reply(&mut self, prompt: &AgentPrompt<'_>) -> Result<String, BackendError>;
}

/// Backend that replays canned replies per role, in order. Drives the
/// workflow deterministically in tests and replays.
#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    scripts: BTreeMap<Role, VecDeque<String>>,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, role: Role, reply: impl Into<String>) -> &mut Self {
        self.scripts.entry(role).or_default().push_back(reply.into());
        self
    }

    pub fn extend<I, S>(&mut self, role: Role, replies: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for r in replies {
            self.push(role, r);
        }
        self
    }

    /// Replies left for a role; a finished test can assert the script was
    /// fully consumed.
    pub fn remaining(&self, role: Role) -> usize {
        self.scripts.get(&role).map_or(0, |q| q.len())
    }
}

impl AgentBackend for ScriptedBackend {
    fn id(&self) -> &str {
        "scripted"
    }

    fn reply(&mut self, prompt: &AgentPrompt<'_>) -> Result<String, BackendError> {
        self.scripts
            .get_mut(&prompt.role)
            .and_then(|q| q.pop_front())
            .ok_or(BackendError::ScriptExhausted { role: prompt.role })
    }
}
