//! Central decision hub for a remotely surveyed incident scene.
//!
//! Every accepted message lands in an append-only [`log::EventLog`]; the
//! agent table, missions, threat belief and document ranking are a pure fold
//! of that log ([`state::HubState::apply`]), so replaying a log reproduces the
//! same [`state::Snapshot`].

pub mod api;
pub mod config;
pub mod hub;
pub mod log;
pub mod sim;
pub mod state;

use cbrne_core::inference::InferenceError;
use cbrne_core::protocol::{DecodeError, Violation};
use cbrne_core::retrieval::RetrievalError;
use cbrne_core::scenario::ConfigError;
use cbrne_core::scene::SceneError;
use cbrne_core::swarm::SwarmError;
use thiserror::Error;

pub use hub::{Hub, Ingested, MissionRequest};
pub use log::{EventLog, EventRecord};
pub use sim::{run_headless, RunOptions, RunReport, Simulation};
pub use state::{HubState, Knowledge, Mission, MissionState, Snapshot};

#[derive(Debug, Error)]
pub enum HubError {
    #[error("rejected: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("unknown mission {0}")]
    UnknownMission(String),
    #[error("{0}")]
    Setup(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] InferenceError),
    #[error(transparent)]
    Corpus(#[from] RetrievalError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Swarm(#[from] SwarmError),
    #[error("event log line {line}: {source}")]
    LogLine { line: usize, source: DecodeError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
