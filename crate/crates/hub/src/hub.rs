use std::sync::Arc;

use cbrne_core::protocol::{
    validate, Command, Envelope, MessageType, MsgIdGen, RouteAssignmentBody, HUB,
};
use cbrne_core::{Belief, GeoPoint, RankedDoc};
use serde::{Deserialize, Serialize};

use crate::log::{EventLog, EventRecord};
use crate::state::{AgentRow, HubState, Knowledge, Mission, Snapshot};
use crate::HubError;

/// Flight altitude when a mission request does not give one.
pub const DEFAULT_ALTITUDE_M: f64 = 30.0;

/// Message-id stream reserved for envelopes the hub writes itself.
const HUB_ID_STREAM: u64 = 2;

/// Body of `POST /api/v1/missions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionRequest {
    pub corners: Vec<GeoPoint>,
    pub spacing_m: f64,
    #[serde(default = "default_altitude")]
    pub altitude_m: f64,
    pub agent_ids: Vec<String>,
}

fn default_altitude() -> f64 {
    DEFAULT_ALTITUDE_M
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub seq: u64,
    /// Messages the hub issued in response, already logged.
    pub issued: Vec<Envelope>,
}

/// Single writer over the event log and its projection.
#[derive(Debug)]
pub struct Hub {
    knowledge: Arc<Knowledge>,
    state: HubState,
    log: EventLog,
    ids: MsgIdGen,
    outbox: Vec<Envelope>,
}

impl Hub {
    pub fn new(knowledge: Arc<Knowledge>, seed: u64, log: EventLog) -> Self {
        let state = HubState::new(&knowledge);
        Self { knowledge, state, log, ids: MsgIdGen::with_stream(seed, HUB_ID_STREAM), outbox: Vec::new() }
    }

    /// Rebuilds a hub by folding a recorded log; issues nothing.
    pub fn replay<I: IntoIterator<Item = Envelope>>(knowledge: Arc<Knowledge>, envelopes: I) -> Result<Self, HubError> {
        let mut hub = Self::new(knowledge, 0, EventLog::in_memory());
        for env in envelopes {
            hub.commit(env)?;
        }
        Ok(hub)
    }

    pub fn knowledge(&self) -> &Arc<Knowledge> {
        &self.knowledge
    }

    pub fn state(&self) -> &HubState {
        &self.state
    }

    /// Validates, applies and logs one envelope, or leaves everything unchanged.
    fn commit(&mut self, env: Envelope) -> Result<u64, HubError> {
        validate(&env).map_err(HubError::Invalid)?;
        let mut next = self.state.clone();
        next.apply(&self.knowledge, &env)?;
        let seq = self.log.append(env)?;
        self.state = next;
        debug_assert_eq!(seq, self.state.last_seq);
        Ok(seq)
    }

    /// Accepts a message from an agent, responder or console.
    pub fn ingest(&mut self, env: Envelope) -> Result<Ingested, HubError> {
        let command = match env.kind() {
            Some(MessageType::Command) => env.body_as::<Command>().ok(),
            _ => None,
        };
        let seq = self.commit(env)?;
        let issued = match command {
            Some(Command::CreateMission { mission_id, .. }) => self.assign_routes(&mission_id)?,
            Some(Command::AbortMission { mission_id }) => self.recall_agents(&mission_id)?,
            _ => Vec::new(),
        };
        self.outbox.extend(issued.iter().cloned());
        Ok(Ingested { seq, issued })
    }

    fn issue(&mut self, dst: &str, body: &RouteAssignmentBody) -> Result<Envelope, HubError> {
        let env = Envelope::new(self.ids.next_id(), self.state.time_s, HUB, dst, MessageType::RouteAssignment, body);
        self.commit(env.clone())?;
        Ok(env)
    }

    fn assign_routes(&mut self, mission_id: &str) -> Result<Vec<Envelope>, HubError> {
        let routes = self.state.missions[mission_id].routes.clone();
        let mut out = Vec::new();
        for route in routes.into_iter().filter(|r| !r.waypoints.is_empty()) {
            let body = RouteAssignmentBody { mission_id: mission_id.into(), waypoints: route.waypoints, aborted: false };
            out.push(self.issue(&route.agent_id, &body)?);
        }
        Ok(out)
    }

    fn recall_agents(&mut self, mission_id: &str) -> Result<Vec<Envelope>, HubError> {
        let agents: Vec<String> = self.state.missions[mission_id]
            .routes
            .iter()
            .filter(|r| !r.waypoints.is_empty())
            .map(|r| r.agent_id.clone())
            .collect();
        let mut out = Vec::new();
        for agent in agents {
            let body = RouteAssignmentBody { mission_id: mission_id.into(), waypoints: vec![], aborted: true };
            out.push(self.issue(&agent, &body)?);
        }
        Ok(out)
    }

    /// Plans a mission from a console request; returns the new id.
    pub fn create_mission(&mut self, request: MissionRequest, src: &str) -> Result<(String, Ingested), HubError> {
        let mut n = self.state.missions.len() + 1;
        while self.state.missions.contains_key(&format!("m-{n}")) {
            n += 1;
        }
        let mission_id = format!("m-{n}");
        let command = Command::CreateMission {
            mission_id: mission_id.clone(),
            corners: request.corners,
            spacing_m: request.spacing_m,
            altitude_m: request.altitude_m,
            agent_ids: request.agent_ids,
        };
        let env = Envelope::new(self.ids.next_id(), self.state.time_s, src, HUB, MessageType::Command, &command);
        let ingested = self.ingest(env)?;
        Ok((mission_id, ingested))
    }

    /// Messages issued for agents since the last call.
    pub fn take_outbox(&mut self) -> Vec<Envelope> {
        std::mem::take(&mut self.outbox)
    }

    pub fn snapshot(&self) -> Snapshot {
        self.state.snapshot()
    }

    pub fn agents(&self) -> Vec<AgentRow> {
        self.state.agents.values().cloned().collect()
    }

    pub fn mission(&self, id: &str) -> Option<&Mission> {
        self.state.missions.get(id)
    }

    pub fn belief(&self) -> &Belief {
        self.state.belief.belief()
    }

    pub fn ranked(&self, k: usize) -> Vec<RankedDoc> {
        self.state.ranked(&self.knowledge, k)
    }

    pub fn events(&self) -> &[EventRecord] {
        self.log.records()
    }

    pub fn events_since(&self, seq: u64) -> &[EventRecord] {
        self.log.since(seq)
    }

    pub fn event_count(&self) -> usize {
        self.log.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mission_request_altitude_defaults() {
        let req: MissionRequest = serde_json::from_str(
            r#"{"corners":[],"spacing_m":10.0,"agent_ids":["rav-1"]}"#,
        )
        .unwrap();
        assert_eq!(req.altitude_m, DEFAULT_ALTITUDE_M);
    }
}
