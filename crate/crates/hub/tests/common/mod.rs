#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use cbrne_core::geo::{self, EnuPoint};
use cbrne_core::protocol::{
    Envelope, EvidenceBody, HeartbeatBody, MessageType, MsgIdGen, RegisterBody, SensorReadingBody, StatusBody,
    HUB, RADIATION_DOSE,
};
use cbrne_core::GeoPoint;
use cbrne_hub::sim::{knowledge_for, load_scenario, scenario_config};
use cbrne_hub::{EventLog, Hub, Knowledge, MissionRequest};
use cbrne_testkit::workspace_root;

pub fn scenario_path() -> PathBuf {
    workspace_root().join("scenarios/rail_radiological.scenario")
}

pub fn knowledge() -> Arc<Knowledge> {
    let path = scenario_path();
    let scenario = load_scenario(&path).unwrap();
    let config = scenario_config(&scenario, &path, None).unwrap();
    knowledge_for(&scenario, &config).unwrap()
}

pub fn hub() -> Hub {
    Hub::new(knowledge(), 1, EventLog::in_memory())
}

/// Builds envelopes with fresh message ids and increasing timestamps.
pub struct Sender {
    ids: MsgIdGen,
    pub ts: f64,
}

impl Default for Sender {
    fn default() -> Self {
        Self { ids: MsgIdGen::with_stream(99, 9), ts: 0.0 }
    }
}

impl Sender {
    pub fn stream(stream: u64) -> Self {
        Self { ids: MsgIdGen::with_stream(99, 10 + stream), ts: 0.0 }
    }

    pub fn envelope<B: serde::Serialize>(&mut self, src: &str, kind: MessageType, body: &B) -> Envelope {
        self.ts += 0.5;
        Envelope::new(self.ids.next_id(), self.ts, src, HUB, kind, body)
    }

    pub fn register(&mut self, src: &str, k: &Knowledge, east: f64, north: f64) -> Envelope {
        let body = RegisterBody {
            kind: "rav".into(),
            position: at(k, east, north),
            battery_pct: 100.0,
            speed_m_s: 5.0,
            radio_range_m: 200.0,
        };
        self.envelope(src, MessageType::Register, &body)
    }

    pub fn heartbeat(&mut self, src: &str, position: GeoPoint, status: &str) -> Envelope {
        let body = HeartbeatBody { battery_pct: 90.0, position, status: status.into() };
        self.envelope(src, MessageType::Heartbeat, &body)
    }

    pub fn status(&mut self, src: &str, status: &str) -> Envelope {
        let body = StatusBody { status: status.into(), battery_pct: 50.0, reason: String::new() };
        self.envelope(src, MessageType::Status, &body)
    }

    pub fn dose(&mut self, src: &str, k: &Knowledge, value: f64) -> Envelope {
        let body = SensorReadingBody { kind: RADIATION_DOSE.into(), value, seq: 0, position: at(k, 10.0, 10.0) };
        self.envelope(src, MessageType::SensorReading, &body)
    }

    pub fn evidence(&mut self, src: &str, variable: &str, value: bool) -> Envelope {
        let body = EvidenceBody { variable: variable.into(), value, region_id: "sector-b".into() };
        self.envelope(src, MessageType::Evidence, &body)
    }
}

pub fn at(k: &Knowledge, east: f64, north: f64) -> GeoPoint {
    geo::from_enu(&k.origin, &EnuPoint::new(east, north, 0.0)).unwrap()
}

/// A 40 m by 20 m rectangle next to the scene origin; 15 points at 10 m.
pub fn rectangle(k: &Knowledge, agents: &[&str]) -> MissionRequest {
    MissionRequest {
        corners: [(0.0, 0.0), (40.0, 0.0), (40.0, 20.0), (0.0, 20.0)].map(|(e, n)| at(k, e, n)).to_vec(),
        spacing_m: 10.0,
        altitude_m: 30.0,
        agent_ids: agents.iter().map(|a| a.to_string()).collect(),
    }
}

/// Registers `rav-1` .. `rav-n` at the origin.
pub fn with_agents(hub: &mut Hub, tx: &mut Sender, n: u32) {
    let k = hub.knowledge().clone();
    for i in 1..=n {
        hub.ingest(tx.register(&format!("rav-{i}"), &k, 0.0, 5.0 * i as f64)).unwrap();
    }
}
