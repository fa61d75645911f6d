//! Typed views of the message bodies.
//!
//! Envelopes carry bodies as plain JSON objects; these structs are how the
//! swarm and hub build and read them. Reading through a typed view ignores
//! fields the view does not know, while the envelope keeps them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentStatus {
    Idle,
    Enroute,
    Sensing,
    Returning,
    Failed,
}

impl AgentStatus {
    pub const ALL: [AgentStatus; 5] =
        [AgentStatus::Idle, AgentStatus::Enroute, AgentStatus::Sensing, AgentStatus::Returning, AgentStatus::Failed];

    pub fn as_str(&self) -> &'static str {
        match self {
            AgentStatus::Idle => "idle",
            AgentStatus::Enroute => "enroute",
            AgentStatus::Sensing => "sensing",
            AgentStatus::Returning => "returning",
            AgentStatus::Failed => "failed",
        }
    }
}

impl fmt::Display for AgentStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentStatus {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|a| a.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterBody {
    pub kind: String,
    pub position: GeoPoint<f64>,
    pub battery_pct: f64,
    pub speed_m_s: f64,
    pub radio_range_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeartbeatBody {
    pub battery_pct: f64,
    pub position: GeoPoint<f64>,
    /// One of the [`AgentStatus`] names; kept as text so a bad value is a
    /// validation finding rather than a decode failure.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Command {
    CreateMission {
        mission_id: String,
        corners: Vec<GeoPoint<f64>>,
        spacing_m: f64,
        altitude_m: f64,
        agent_ids: Vec<String>,
    },
    AbortMission {
        mission_id: String,
    },
    AddKeywords {
        keywords: Vec<String>,
    },
}

impl Command {
    pub const ACTIONS: [&'static str; 3] = ["create_mission", "abort_mission", "add_keywords"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
    pub row: u32,
    pub col: u32,
}

impl Waypoint {
    pub fn geo(&self) -> GeoPoint<f64> {
        GeoPoint { lat_deg: self.lat_deg, lon_deg: self.lon_deg, alt_m: self.alt_m }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteAssignmentBody {
    pub mission_id: String,
    pub waypoints: Vec<Waypoint>,
    #[serde(default)]
    pub aborted: bool,
}

pub const RADIATION_DOSE: &str = "radiation_dose";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReadingBody {
    pub kind: String,
    /// µSv/h.
    pub value: f64,
    pub seq: u64,
    pub position: GeoPoint<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageMetaBody {
    pub capture_id: String,
    pub mission_id: String,
    pub row: u32,
    pub col: u32,
    pub position: GeoPoint<f64>,
    pub footprint_half_width_m: f64,
    pub detection_count: u32,
}

pub const IMAGE_SIZE_PX: f64 = 1024.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionBody {
    pub capture_id: String,
    pub label: String,
    pub confidence: f64,
    /// `[x_min, y_min, x_max, y_max]` in a 1024×1024 image frame.
    pub bbox: [f64; 4],
    pub position: GeoPoint<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusBody {
    pub status: String,
    pub battery_pct: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceBody {
    pub variable: String,
    pub value: bool,
    pub region_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}
