//! Hub state as a pure projection of the event log.

use std::collections::{BTreeMap, BTreeSet};

use cbrne_core::geo::{self, EnuPoint};
use cbrne_core::inference::{load_model, most_probable, Category, Evidence};
use cbrne_core::protocol::{
    self, AgentStatus, Command, DetectionBody, Envelope, EvidenceBody, HeartbeatBody, ImageMetaBody, MessageType,
    RegisterBody, RouteAssignmentBody, SensorReadingBody, StatusBody, Violation, Waypoint, RADIATION_DOSE,
};
use cbrne_core::retrieval::{expand_query, index_corpus, load_corpus, rank, rerank_on_event, KeywordStream};
use cbrne_core::survey::{discretize_region, plan_greedy_routes, SurveyRegion};
use cbrne_core::{Belief, BeliefState, GeoPoint, Index, RankedDoc, SynonymSet, ThreatModel};
use serde::{Deserialize, Serialize};

use crate::config::HubConfig;
use crate::HubError;

/// Read-only inputs shared by every projection of one hub.
#[derive(Debug, Clone)]
pub struct Knowledge {
    pub model: ThreatModel,
    pub index: Index,
    pub synonyms: SynonymSet,
    /// Scene origin for converting between geodetic and local coordinates.
    pub origin: GeoPoint,
    /// Dose rate above which a reading becomes positive evidence.
    pub radiation_threshold: f64,
    pub top_k: usize,
}

impl Knowledge {
    pub fn load(config: &HubConfig, origin: GeoPoint, background_dose: f64) -> Result<Self, HubError> {
        let model = load_model(&config.model)?;
        let index = index_corpus(&load_corpus(&config.corpus)?)?;
        let synonyms = SynonymSet::load(&config.synonyms)?;
        Ok(Self {
            model,
            index,
            synonyms,
            origin,
            radiation_threshold: config.radiation_threshold_factor * background_dose,
            top_k: config.top_k,
        })
    }

    /// Evidence variable for a positive dose reading from `src`.
    pub fn radiation_variable(src: &str) -> &'static str {
        if protocol::parse_rav_endpoint(src).is_some() {
            "lowflight_rad_detect"
        } else {
            "handheld_rad_positive"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentRow {
    pub agent_id: String,
    pub kind: String,
    pub position: GeoPoint,
    pub battery_pct: f64,
    pub status: AgentStatus,
    pub speed_m_s: f64,
    pub radio_range_m: f64,
    pub last_seen_ts: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissionState {
    Planned,
    Active,
    Complete,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannedRoute {
    pub agent_id: String,
    pub waypoints: Vec<Waypoint>,
    pub length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mission {
    pub mission_id: String,
    pub state: MissionState,
    pub corners: Vec<GeoPoint>,
    pub spacing_m: f64,
    pub altitude_m: f64,
    pub agent_ids: Vec<String>,
    pub created_ts: f64,
    pub created_seq: u64,
    pub routes: Vec<PlannedRoute>,
    pub makespan_m: f64,
    pub total_points: usize,
    /// Grid cells `(row, col)` imaged so far.
    pub visited: BTreeSet<(u32, u32)>,
}

impl Mission {
    pub fn progress(&self) -> MissionProgress {
        MissionProgress {
            mission_id: self.mission_id.clone(),
            state: self.state,
            visited: self.visited.len(),
            total: self.total_points,
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self.state, MissionState::Planned | MissionState::Active)
    }

    fn check_complete(&mut self) {
        if self.state == MissionState::Active && self.visited.len() >= self.total_points {
            self.state = MissionState::Complete;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionProgress {
    pub mission_id: String,
    pub state: MissionState,
    pub visited: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MostProbable {
    pub category: Category,
    pub substance: String,
}

impl MostProbable {
    pub fn of(belief: &Belief) -> Self {
        let (category, substance) = most_probable(belief);
        Self { category, substance }
    }
}

/// Everything a console needs, derived from the log up to `last_seq`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub last_seq: u64,
    pub time_s: f64,
    pub agents: Vec<AgentRow>,
    pub active_mission: Option<MissionProgress>,
    pub missions: Vec<MissionProgress>,
    pub belief: Belief,
    pub most_probable: MostProbable,
    pub keywords: Vec<String>,
    pub ranked_docs: Vec<RankedDoc>,
    pub detections: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HubState {
    pub last_seq: u64,
    pub time_s: f64,
    pub agents: BTreeMap<String, AgentRow>,
    pub missions: BTreeMap<String, Mission>,
    pub belief: BeliefState,
    pub keywords: KeywordStream,
    pub ranked: Vec<RankedDoc>,
    pub detections: u64,
}

fn invalid(field: &str, message: impl Into<String>) -> HubError {
    HubError::Invalid(vec![Violation { field: field.into(), message: message.into() }])
}

fn body<B: serde::de::DeserializeOwned>(env: &Envelope) -> Result<B, HubError> {
    env.body_as().map_err(|e| invalid("body", e.to_string()))
}

impl HubState {
    pub fn new(k: &Knowledge) -> Self {
        Self {
            last_seq: 0,
            time_s: 0.0,
            agents: BTreeMap::new(),
            missions: BTreeMap::new(),
            belief: BeliefState::new(&k.model),
            keywords: KeywordStream::default(),
            ranked: Vec::new(),
            detections: 0,
        }
    }

    /// Folds one accepted envelope into the state.
    ///
    /// On error the state may be partly updated; callers apply to a copy.
    pub fn apply(&mut self, k: &Knowledge, env: &Envelope) -> Result<(), HubError> {
        let kind = env.kind().ok_or_else(|| invalid("type", format!("unknown message type {:?}", env.msg_type)))?;
        self.last_seq += 1;
        self.time_s = self.time_s.max(env.ts);
        let before = most_probable(self.belief.belief()).0;
        let mut new_keywords: Vec<String> = Vec::new();

        match kind {
            MessageType::Register => {
                let b: RegisterBody = body(env)?;
                self.agents.insert(
                    env.src.clone(),
                    AgentRow {
                        agent_id: env.src.clone(),
                        kind: b.kind,
                        position: b.position,
                        battery_pct: b.battery_pct,
                        status: AgentStatus::Idle,
                        speed_m_s: b.speed_m_s,
                        radio_range_m: b.radio_range_m,
                        last_seen_ts: env.ts,
                    },
                );
            }
            MessageType::Heartbeat => {
                let b: HeartbeatBody = body(env)?;
                let status = b.status.parse().map_err(|_| invalid("body.status", "unknown status"))?;
                let row = self.agents.entry(env.src.clone()).or_insert_with(|| AgentRow {
                    agent_id: env.src.clone(),
                    kind: "unregistered".into(),
                    position: b.position,
                    battery_pct: b.battery_pct,
                    status,
                    speed_m_s: 0.0,
                    radio_range_m: 0.0,
                    last_seen_ts: env.ts,
                });
                row.position = b.position;
                row.battery_pct = b.battery_pct;
                row.status = status;
                row.last_seen_ts = env.ts;
            }
            MessageType::Status => {
                let b: StatusBody = body(env)?;
                let status = b.status.parse().map_err(|_| invalid("body.status", "unknown status"))?;
                if let Some(row) = self.agents.get_mut(&env.src) {
                    row.status = status;
                    row.battery_pct = b.battery_pct;
                    row.last_seen_ts = env.ts;
                }
            }
            MessageType::SensorReading => {
                let b: SensorReadingBody = body(env)?;
                if b.kind == RADIATION_DOSE && b.value > k.radiation_threshold {
                    let variable = Knowledge::radiation_variable(&env.src);
                    if k.model.has_variable(variable) {
                        self.observe(k, Evidence::new(variable, true, env.src.clone(), env.ts))?;
                    }
                }
            }
            MessageType::Detection => {
                let b: DetectionBody = body(env)?;
                self.detections += 1;
                let variable = format!("detector_label_{}", b.label);
                if k.model.has_variable(&variable) {
                    self.observe(k, Evidence::new(variable, true, env.src.clone(), env.ts))?;
                }
                new_keywords.push(b.label);
            }
            MessageType::ImageMeta => {
                let b: ImageMetaBody = body(env)?;
                if let Some(m) = self.missions.get_mut(&b.mission_id) {
                    m.visited.insert((b.row, b.col));
                    m.check_complete();
                }
            }
            MessageType::Evidence => {
                let b: EvidenceBody = body(env)?;
                if !k.model.has_variable(&b.variable) {
                    return Err(invalid("body.variable", format!("unknown evidence variable {:?}", b.variable)));
                }
                self.observe(k, Evidence::new(b.variable, b.value, b.region_id, env.ts))?;
            }
            MessageType::Command => match body::<Command>(env)? {
                Command::CreateMission { mission_id, corners, spacing_m, altitude_m, agent_ids } => {
                    let mission = self.plan_mission(k, env, mission_id, corners, spacing_m, altitude_m, agent_ids)?;
                    self.missions.insert(mission.mission_id.clone(), mission);
                }
                Command::AbortMission { mission_id } => {
                    let m = self.missions.get_mut(&mission_id).ok_or_else(|| HubError::UnknownMission(mission_id.clone()))?;
                    if !m.is_open() {
                        return Err(HubError::Conflict(format!("mission {mission_id} is already {:?}", m.state)));
                    }
                    m.state = MissionState::Aborted;
                }
                Command::AddKeywords { keywords } => new_keywords.extend(keywords),
            },
            MessageType::RouteAssignment => {
                let b: RouteAssignmentBody = body(env)?;
                if let Some(m) = self.missions.get_mut(&b.mission_id) {
                    if !b.aborted && m.state == MissionState::Planned {
                        m.state = MissionState::Active;
                        m.check_complete();
                    }
                }
                if let Some(row) = self.agents.get_mut(&env.dst) {
                    if row.status != AgentStatus::Failed {
                        row.status = if b.aborted { AgentStatus::Idle } else { AgentStatus::Enroute };
                    }
                }
            }
            MessageType::Error => {}
        }

        let after = most_probable(self.belief.belief()).0;
        if after != before && after != Category::None {
            new_keywords.push(after.as_str().to_string());
        }
        if !new_keywords.is_empty() {
            self.ranked = rerank_on_event(&k.index, &k.synonyms, &mut self.keywords, &new_keywords, k.top_k);
        }
        Ok(())
    }

    fn observe(&mut self, k: &Knowledge, evidence: Evidence) -> Result<(), HubError> {
        self.belief = self.belief.update(&k.model, &evidence)?;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn plan_mission(
        &self,
        k: &Knowledge,
        env: &Envelope,
        mission_id: String,
        corners: Vec<GeoPoint>,
        spacing_m: f64,
        altitude_m: f64,
        agent_ids: Vec<String>,
    ) -> Result<Mission, HubError> {
        if self.missions.contains_key(&mission_id) {
            return Err(HubError::Conflict(format!("mission {mission_id} already exists")));
        }
        for (i, id) in agent_ids.iter().enumerate() {
            if !self.agents.contains_key(id) {
                return Err(invalid(&format!("body.agent_ids[{i}]"), format!("agent {id} is not registered")));
            }
        }
        let idle: Vec<&AgentRow> = agent_ids
            .iter()
            .filter_map(|id| self.agents.get(id))
            .filter(|a| a.status == AgentStatus::Idle)
            .collect();
        if idle.is_empty() {
            return Err(HubError::Conflict("none of the requested agents is idle".into()));
        }
        let region = SurveyRegion::new(corners.clone(), spacing_m, altitude_m).map_err(|e| invalid("body.corners", e.to_string()))?;
        let points = discretize_region(&region, &k.origin).map_err(|e| invalid("body.corners", e.to_string()))?;
        let starts = idle
            .iter()
            .map(|a| geo::to_enu(&k.origin, &a.position))
            .collect::<Result<Vec<EnuPoint<f64>>, _>>()
            .map_err(|e| invalid("body.agent_ids", e.to_string()))?;
        let plan = plan_greedy_routes(&points, &starts).map_err(|e| invalid("body", e.to_string()))?;
        let mut routes = Vec::new();
        for (route, agent) in plan.routes.iter().zip(&idle) {
            let waypoints = route
                .points
                .iter()
                .map(|p| {
                    let g = geo::from_enu(&k.origin, &p.position)?;
                    Ok(Waypoint { lat_deg: g.lat_deg, lon_deg: g.lon_deg, alt_m: g.alt_m, row: p.index.row, col: p.index.col })
                })
                .collect::<Result<Vec<_>, cbrne_core::geo::GeoError>>()
                .map_err(|e| invalid("body.corners", e.to_string()))?;
            routes.push(PlannedRoute { agent_id: agent.agent_id.clone(), waypoints, length_m: route.length_m });
        }
        Ok(Mission {
            mission_id,
            state: MissionState::Planned,
            corners,
            spacing_m,
            altitude_m,
            agent_ids: idle.iter().map(|a| a.agent_id.clone()).collect(),
            created_ts: env.ts,
            created_seq: self.last_seq,
            routes,
            makespan_m: plan.makespan_m,
            total_points: points.len(),
            visited: BTreeSet::new(),
        })
    }

    /// Most recently created mission that has not finished.
    pub fn active_mission(&self) -> Option<&Mission> {
        self.missions.values().filter(|m| m.is_open()).max_by_key(|m| m.created_seq)
    }

    pub fn ranked(&self, k: &Knowledge, top: usize) -> Vec<RankedDoc> {
        rank(&k.index, &expand_query(&self.keywords.0, &k.synonyms), top)
    }

    pub fn snapshot(&self) -> Snapshot {
        let mut missions: Vec<&Mission> = self.missions.values().collect();
        missions.sort_by_key(|m| m.created_seq);
        let belief = self.belief.belief().clone();
        Snapshot {
            last_seq: self.last_seq,
            time_s: self.time_s,
            agents: self.agents.values().cloned().collect(),
            active_mission: self.active_mission().map(Mission::progress),
            missions: missions.into_iter().map(Mission::progress).collect(),
            most_probable: MostProbable::of(&belief),
            belief,
            keywords: self.keywords.0.clone(),
            ranked_docs: self.ranked.clone(),
            detections: self.detections,
        }
    }
}
