//! Gridworld and BW4T search-and-rescue task generators, five scenarios
//! each, and the communication-model transformer.

mod bw4t;
mod comm_model;
mod gridworld;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::Rml;
use crate::epddl::{DomainSpec, EpddlError, ProblemSpec};

pub use bw4t::{bw4t, BlockPlacement, Bw4tConfig, COLORS, DROP_ZONE};
pub use comm_model::{apply_comm_model, is_comm_action};
pub use gridworld::{gridworld, GridworldConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// S1: every agent must come to believe every placement.
    #[serde(rename = "S1")]
    EpistemicGoal,
    /// S2: world-level goal only.
    #[serde(rename = "S2")]
    NonEpistemicGoal,
    /// S3: a stationary commander must believe every placement; anyone may tell it.
    #[serde(rename = "S3")]
    CommanderBroadcast,
    /// S4: as S3, but only the liaison may talk to the commander.
    #[serde(rename = "S4")]
    CommanderNonBroadcast,
    /// S5: blocked cells (rooms) and a designated agent with a target.
    #[serde(rename = "S5")]
    BlockedCells,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::EpistemicGoal,
        Scenario::NonEpistemicGoal,
        Scenario::CommanderBroadcast,
        Scenario::CommanderNonBroadcast,
        Scenario::BlockedCells,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Scenario::EpistemicGoal => "S1",
            Scenario::NonEpistemicGoal => "S2",
            Scenario::CommanderBroadcast => "S3",
            Scenario::CommanderNonBroadcast => "S4",
            Scenario::BlockedCells => "S5",
        }
    }

    pub fn has_commander(self) -> bool {
        matches!(self, Scenario::CommanderBroadcast | Scenario::CommanderNonBroadcast)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown scenario `{s}` (expected S1..S5)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommModel {
    Selective,
    NoComm,
    CommAll,
}

impl CommModel {
    pub const ALL: [CommModel; 3] = [CommModel::Selective, CommModel::NoComm, CommModel::CommAll];

    pub fn code(self) -> &'static str {
        match self {
            CommModel::Selective => "selective",
            CommModel::NoComm => "nocomm",
            CommModel::CommAll => "commall",
        }
    }
}

impl fmt::Display for CommModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for CommModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CommModel::ALL
            .into_iter()
            .find(|m| m.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown communication model `{s}` (expected selective, nocomm or commall)"))
    }
}

/// World facts known to the generator (and the planner's root view) but
/// absent from every agent's initial beliefs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub domain: String,
    pub facts: Vec<Rml>,
}

#[derive(Debug, Clone)]
pub struct GeneratedTask {
    pub domain: DomainSpec,
    pub problem: ProblemSpec,
    pub ground_truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{model} is not applicable to {scenario}: {reason}")]
    CommModel {
        model: CommModel,
        scenario: Scenario,
        reason: String,
    },
    #[error("generated text does not parse: {0}")]
    Generated(#[from] EpddlError),
}

fn config_error(msg: impl Into<String>) -> DomainError {
    DomainError::Config(msg.into())
}

fn rml(text: &str) -> Rml {
    text.parse().expect("generator literal")
}

/// Agent names `a1..an`.
pub fn agent_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("a{i}")).collect()
}
