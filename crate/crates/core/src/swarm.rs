//! Discrete-time simulation of the aerial vehicles: kinematics, battery,
//! radiation sensing, a confusion-matrix object detector and peer relay.
//!
//! All randomness comes from one ChaCha stream per agent, seeded from
//! `rng_seed ^ agent_id`, so adding an agent never changes another agent's
//! draws. Message ids come from a separate stream per agent for the same
//! reason.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{self, EnuPoint, GeoError};
use crate::protocol::{
    self, AgentStatus, DetectionBody, Envelope, HeartbeatBody, ImageMetaBody, MessageType, MsgIdGen, RegisterBody,
    RouteAssignmentBody, SensorReadingBody, StatusBody, HUB, IMAGE_SIZE_PX, RADIATION_DOSE,
};
use crate::survey::{GridIndex, RoutePlan};
use crate::{GeoPoint, Scene};

/// Tolerance on confusion-row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Half-width of the confidence jitter applied to detections.
pub const CONFIDENCE_JITTER: f64 = 0.05;

const ID_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwarmError {
    #[error("invalid swarm config: `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("message is not a usable route assignment: {0}")]
    BadAssignment(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SwarmError {
    SwarmError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDetector {
    /// Probability an object of this class in the footprint is detected.
    pub p_d: f64,
    /// Distribution of the emitted label given this true class.
    pub confusion: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub classes: BTreeMap<String, ClassDetector>,
}

impl DetectorConfig {
    /// Detects every class perfectly.
    pub fn identity<S: AsRef<str>>(labels: &[S]) -> Self {
        let classes = labels
            .iter()
            .map(|l| {
                let l = l.as_ref().to_string();
                (l.clone(), ClassDetector { p_d: 1.0, confusion: [(l, 1.0)].into_iter().collect() })
            })
            .collect();
        Self { classes }
    }
}

fn default_heartbeat_interval() -> f64 {
    1.0
}

fn default_hub_range() -> f64 {
    1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmConfig {
    pub dt_s: f64,
    pub drain_rate_pct_s: f64,
    pub sensor_noise_rel: f64,
    pub sensor_noise_floor: f64,
    pub detector: DetectorConfig,
    pub footprint_half_width_m: f64,
    pub rng_seed: u64,
    #[serde(default = "default_heartbeat_interval")]
    pub heartbeat_interval_s: f64,
    /// Where the hub's radio sits in the scene frame.
    #[serde(default)]
    pub hub_position: EnuPoint<f64>,
    #[serde(default = "default_hub_range")]
    pub hub_radio_range_m: f64,
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), SwarmError> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, "must be positive"))
            }
        };
        let non_negative = |field: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, "must be non-negative"))
            }
        };
        positive("dt_s", self.dt_s)?;
        non_negative("drain_rate_pct_s", self.drain_rate_pct_s)?;
        non_negative("sensor_noise_rel", self.sensor_noise_rel)?;
        non_negative("sensor_noise_floor", self.sensor_noise_floor)?;
        positive("footprint_half_width_m", self.footprint_half_width_m)?;
        positive("heartbeat_interval_s", self.heartbeat_interval_s)?;
        positive("hub_radio_range_m", self.hub_radio_range_m)?;
        for (label, class) in &self.detector.classes {
            if !(0.0..=1.0).contains(&class.p_d) {
                return Err(invalid(format!("detector.classes.{label}.p_d"), "must be in [0, 1]"));
            }
            if class.confusion.values().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(invalid(format!("detector.classes.{label}.confusion"), "entries must be in [0, 1]"));
            }
            let sum: f64 = class.confusion.values().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(invalid(format!("detector.classes.{label}.confusion"), format!("sums to {sum}, not 1")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: u32,
    /// Launch position in the scene frame.
    pub start: EnuPoint<f64>,
    pub speed_m_s: f64,
    pub battery_pct: f64,
    pub radio_range_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteWaypoint {
    pub position: EnuPoint<f64>,
    pub index: GridIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentState {
    pub agent_id: u32,
    pub position: EnuPoint<f64>,
    pub speed_m_s: f64,
    pub battery_pct: f64,
    pub status: AgentStatus,
    pub route: VecDeque<RouteWaypoint>,
    pub radio_range_m: f64,
    pub mission_id: Option<String>,
    /// Grid index of the waypoint most recently reached.
    pub last_index: Option<GridIndex>,
    next_seq: u64,
    next_capture: u64,
}

impl AgentState {
    pub fn endpoint(&self) -> String {
        protocol::rav_endpoint(self.agent_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorReading {
    pub agent_id: u32,
    pub position: EnuPoint<f64>,
    pub kind: &'static str,
    /// µSv/h.
    pub value: f64,
    pub timestamp: f64,
    pub seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageCaptureMeta {
    pub capture_id: String,
    pub agent_id: u32,
    pub position: EnuPoint<f64>,
    pub grid_index: Option<GridIndex>,
    pub footprint_half_width_m: f64,
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub capture_id: String,
    /// `[x_min, y_min, x_max, y_max]` in the 1024×1024 frame.
    pub bbox: [f64; 4],
    pub label: String,
    pub confidence: f64,
    /// Footprint centre.
    pub geo_position: EnuPoint<f64>,
    /// Ground-truth object id; simulator bookkeeping, never sent on the wire.
    #[serde(skip)]
    pub object_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Delivery {
    pub endpoint: String,
    pub hops: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeliveryReport {
    pub msg_id: String,
    pub from: String,
    /// New recipients in order of hop count, then endpoint name.
    pub recipients: Vec<Delivery>,
}

impl DeliveryReport {
    pub fn reached_hub(&self) -> bool {
        self.recipients.iter().any(|d| d.endpoint == HUB)
    }
}

/// Everything the stepper owns.
#[derive(Debug, Clone)]
pub struct SwarmState {
    pub config: SwarmConfig,
    pub time_s: f64,
    /// Sorted by id.
    pub agents: Vec<AgentState>,
    rngs: Vec<ChaCha8Rng>,
    ids: Vec<MsgIdGen>,
    next_heartbeat_s: f64,
    seen: BTreeMap<String, BTreeSet<String>>,
}

impl SwarmState {
    /// Validates the config against the scene and places agents at their
    /// starts.
    pub fn new(config: SwarmConfig, agents: &[AgentSpec], scene: &Scene) -> Result<Self, SwarmError> {
        config.validate()?;
        for label in &scene.config().object_labels {
            if !config.detector.classes.contains_key(label) {
                return Err(invalid(format!("detector.classes.{label}"), "missing entry for a scene label"));
            }
        }
        let mut specs = agents.to_vec();
        specs.sort_by_key(|a| a.id);
        for w in specs.windows(2) {
            if w[0].id == w[1].id {
                return Err(invalid("agents", format!("duplicate id {}", w[0].id)));
            }
        }
        let mut states = Vec::with_capacity(specs.len());
        for (i, a) in specs.iter().enumerate() {
            let field = |f: &str| format!("agents[{i}].{f}");
            if !(a.speed_m_s > 0.0 && a.speed_m_s.is_finite()) {
                return Err(invalid(field("speed_m_s"), "must be positive"));
            }
            if !(0.0..=100.0).contains(&a.battery_pct) {
                return Err(invalid(field("battery_pct"), "must be in [0, 100]"));
            }
            if !(a.radio_range_m > 0.0) {
                return Err(invalid(field("radio_range_m"), "must be positive"));
            }
            if !a.start.is_finite() {
                return Err(invalid(field("start"), "must be finite"));
            }
            states.push(AgentState {
                agent_id: a.id,
                position: a.start,
                speed_m_s: a.speed_m_s,
                battery_pct: a.battery_pct,
                status: if a.battery_pct > 0.0 { AgentStatus::Idle } else { AgentStatus::Failed },
                route: VecDeque::new(),
                radio_range_m: a.radio_range_m,
                mission_id: None,
                last_index: None,
                next_seq: 0,
                next_capture: 0,
            });
        }
        let rngs = states.iter().map(|a| ChaCha8Rng::seed_from_u64(config.rng_seed ^ a.agent_id as u64)).collect();
        let ids = states.iter().map(|a| MsgIdGen::with_stream(config.rng_seed ^ a.agent_id as u64, ID_STREAM)).collect();
        Ok(Self {
            next_heartbeat_s: config.heartbeat_interval_s,
            config,
            time_s: 0.0,
            agents: states,
            rngs,
            ids,
            seen: BTreeMap::new(),
        })
    }

    fn slot(&self, agent_id: u32) -> Result<usize, SwarmError> {
        self.agents
            .binary_search_by_key(&agent_id, |a| a.agent_id)
            .map_err(|_| SwarmError::UnknownAgent(protocol::rav_endpoint(agent_id)))
    }

    pub fn agent(&self, agent_id: u32) -> Option<&AgentState> {
        self.slot(agent_id).ok().map(|i| &self.agents[i])
    }

    pub fn rng_mut(&mut self, agent_id: u32) -> Result<&mut ChaCha8Rng, SwarmError> {
        let i = self.slot(agent_id)?;
        Ok(&mut self.rngs[i])
    }

    fn envelope<B: Serialize>(&mut self, slot: usize, kind: MessageType, body: &B) -> Envelope {
        let id = self.ids[slot].next_id();
        Envelope::new(id, self.time_s, self.agents[slot].endpoint(), HUB, kind, body)
    }

    /// One `register` message per agent, announcing it to the hub.
    pub fn register_messages(&mut self, scene: &Scene) -> Result<Vec<Envelope>, SwarmError> {
        let mut out = Vec::new();
        for i in 0..self.agents.len() {
            let a = &self.agents[i];
            let body = RegisterBody {
                kind: "rav".into(),
                position: geo::from_enu(scene.origin(), &a.position)?,
                battery_pct: a.battery_pct,
                speed_m_s: a.speed_m_s,
                radio_range_m: a.radio_range_m,
            };
            out.push(self.envelope(i, MessageType::Register, &body));
        }
        Ok(out)
    }

    /// Loads a route directly from a plan (routes in agent order).
    pub fn assign_plan(&mut self, plan: &RoutePlan<f64>, agent_ids: &[u32], mission_id: &str) -> Result<(), SwarmError> {
        for (route, id) in plan.routes.iter().zip(agent_ids) {
            let slot = self.slot(*id)?;
            let waypoints = route.points.iter().map(|p| RouteWaypoint { position: p.position, index: p.index });
            let agent = &mut self.agents[slot];
            if agent.status == AgentStatus::Failed {
                continue;
            }
            agent.route = waypoints.collect();
            agent.mission_id = Some(mission_id.to_string());
        }
        Ok(())
    }

    /// Applies a `route_assignment` message addressed to one of the agents.
    pub fn apply_route_assignment(&mut self, scene: &Scene, msg: &Envelope) -> Result<(), SwarmError> {
        if msg.kind() != Some(MessageType::RouteAssignment) {
            return Err(SwarmError::BadAssignment(format!("type is {:?}", msg.msg_type)));
        }
        let id = protocol::parse_rav_endpoint(&msg.dst).ok_or_else(|| SwarmError::UnknownAgent(msg.dst.clone()))?;
        let slot = self.slot(id)?;
        let body: RouteAssignmentBody = msg.body_as().map_err(|e| SwarmError::BadAssignment(e.to_string()))?;
        let mut route = VecDeque::with_capacity(body.waypoints.len());
        for wp in &body.waypoints {
            route.push_back(RouteWaypoint {
                position: geo::to_enu(scene.origin(), &wp.geo())?,
                index: GridIndex { row: wp.row, col: wp.col },
            });
        }
        let agent = &mut self.agents[slot];
        if agent.status == AgentStatus::Failed {
            return Ok(());
        }
        if body.aborted {
            agent.route.clear();
            agent.status = AgentStatus::Idle;
        } else {
            agent.route = route;
        }
        agent.mission_id = Some(body.mission_id);
        Ok(())
    }

    /// Advances every live agent by `dt_s` and returns the messages emitted,
    /// in agent order.
    pub fn step_in_place(&mut self, scene: &Scene, dt_s: f64) -> Result<Vec<Envelope>, SwarmError> {
        if !(dt_s > 0.0) || !dt_s.is_finite() {
            return Err(SwarmError::BadTimeStep(dt_s));
        }
        self.time_s += dt_s;
        let heartbeat_due = self.time_s >= self.next_heartbeat_s;
        while self.next_heartbeat_s <= self.time_s {
            self.next_heartbeat_s += self.config.heartbeat_interval_s;
        }

        let mut out = Vec::new();
        for i in 0..self.agents.len() {
            if self.agents[i].status == AgentStatus::Failed {
                continue;
            }
            let arrived = advance(&mut self.agents[i], dt_s);
            if arrived {
                self.agents[i].status = AgentStatus::Sensing;
                out.extend(self.arrival_messages(scene, i)?);
            } else if self.agents[i].route.is_empty() && self.agents[i].status != AgentStatus::Idle {
                self.agents[i].status = AgentStatus::Idle;
            }

            let agent = &mut self.agents[i];
            agent.battery_pct = (agent.battery_pct - self.config.drain_rate_pct_s * dt_s).max(0.0);
            if agent.battery_pct == 0.0 {
                agent.status = AgentStatus::Failed;
                agent.route.clear();
                let body = StatusBody {
                    status: AgentStatus::Failed.as_str().into(),
                    battery_pct: 0.0,
                    reason: "battery depleted".into(),
                };
                out.push(self.envelope(i, MessageType::Status, &body));
            } else if heartbeat_due {
                let a = &self.agents[i];
                let body = HeartbeatBody {
                    battery_pct: a.battery_pct,
                    position: geo::from_enu(scene.origin(), &a.position)?,
                    status: a.status.as_str().into(),
                };
                out.push(self.envelope(i, MessageType::Heartbeat, &body));
            }
        }
        Ok(out)
    }

    fn arrival_messages(&mut self, scene: &Scene, slot: usize) -> Result<Vec<Envelope>, SwarmError> {
        let config = self.config.clone();
        let time = self.time_s;
        let reading = sample_radiation(scene, &mut self.agents[slot], &mut self.rngs[slot], &config, time);
        let (meta, detections) = capture_image(scene, &mut self.agents[slot], &mut self.rngs[slot], &config, time);

        let origin = scene.origin();
        let mission_id = self.agents[slot].mission_id.clone().unwrap_or_default();
        let reading_body = SensorReadingBody {
            kind: reading.kind.into(),
            value: reading.value,
            seq: reading.seq,
            position: geo::from_enu(origin, &reading.position)?,
        };
        let index = meta.grid_index.unwrap_or(GridIndex { row: 0, col: 0 });
        let meta_body = ImageMetaBody {
            capture_id: meta.capture_id.clone(),
            mission_id,
            row: index.row,
            col: index.col,
            position: geo::from_enu(origin, &meta.position)?,
            footprint_half_width_m: meta.footprint_half_width_m,
            detection_count: detections.len() as u32,
        };
        let mut out = vec![
            self.envelope(slot, MessageType::SensorReading, &reading_body),
            self.envelope(slot, MessageType::ImageMeta, &meta_body),
        ];
        for d in &detections {
            let body = DetectionBody {
                capture_id: d.capture_id.clone(),
                label: d.label.clone(),
                confidence: d.confidence,
                bbox: d.bbox,
                position: geo::from_enu(origin, &d.geo_position)?,
            };
            out.push(self.envelope(slot, MessageType::Detection, &body));
        }
        Ok(out)
    }

    /// Floods `msg` from `from_agent` over radio links; each endpoint
    /// receives a given message id at most once over the whole run.
    pub fn relay_message(&mut self, msg: &Envelope, from_agent: u32) -> Result<DeliveryReport, SwarmError> {
        let sender = self.slot(from_agent)?;
        let from = self.agents[sender].endpoint();
        let mut report = DeliveryReport { msg_id: msg.msg_id.clone(), from: from.clone(), recipients: Vec::new() };
        if self.agents[sender].status == AgentStatus::Failed {
            return Ok(report);
        }

        // nodes: live agents, then the hub
        let mut nodes: Vec<(String, EnuPoint<f64>, f64)> = self
            .agents
            .iter()
            .filter(|a| a.status != AgentStatus::Failed)
            .map(|a| (a.endpoint(), a.position, a.radio_range_m))
            .collect();
        nodes.push((HUB.to_string(), self.config.hub_position, self.config.hub_radio_range_m));
        let start = nodes.iter().position(|n| n.0 == from).expect("live sender is a node");

        let mut hops: Vec<Option<u32>> = vec![None; nodes.len()];
        hops[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let (_, pos, range) = &nodes[u];
            let h = hops[u].expect("queued nodes have a hop count");
            for v in 0..nodes.len() {
                if hops[v].is_none() && pos.distance(&nodes[v].1) <= *range {
                    hops[v] = Some(h + 1);
                    queue.push_back(v);
                }
            }
        }

        let mut reached: Vec<Delivery> = nodes
            .iter()
            .zip(&hops)
            .filter_map(|((name, _, _), h)| match h {
                Some(h) if *h > 0 => Some(Delivery { endpoint: name.clone(), hops: *h }),
                _ => None,
            })
            .collect();
        reached.sort_by(|a, b| a.hops.cmp(&b.hops).then_with(|| a.endpoint.cmp(&b.endpoint)));
        self.seen.entry(from).or_default().insert(msg.msg_id.clone());
        for d in reached {
            if self.seen.entry(d.endpoint.clone()).or_default().insert(msg.msg_id.clone()) {
                report.recipients.push(d);
            }
        }
        Ok(report)
    }

    /// True when no live agent has waypoints left.
    pub fn is_quiescent(&self) -> bool {
        self.agents.iter().all(|a| a.status == AgentStatus::Failed || a.route.is_empty())
    }
}

/// Moves toward the next waypoint without overshooting; true on arrival.
fn advance(agent: &mut AgentState, dt_s: f64) -> bool {
    let Some(wp) = agent.route.front().copied() else { return false };
    agent.status = AgentStatus::Enroute;
    let remaining = agent.position.distance(&wp.position);
    let travel = agent.speed_m_s * dt_s;
    if travel >= remaining {
        agent.position = wp.position;
        agent.last_index = Some(wp.index);
        agent.route.pop_front();
        true
    } else {
        let step = wp.position.sub(&agent.position).scale(travel / remaining);
        agent.position = agent.position.add(&step);
        false
    }
}

/// Functional form of [`SwarmState::step_in_place`].
pub fn step(scene: &Scene, state: &SwarmState, dt_s: f64) -> Result<(SwarmState, Vec<Envelope>), SwarmError> {
    let mut next = state.clone();
    let messages = next.step_in_place(scene, dt_s)?;
    Ok((next, messages))
}

/// Noisy dose-rate reading at the agent's position.
///
/// `value = max(0, true_dose · (1 + ε))` with `ε ~ N(0, max(floor, rel))`.
pub fn sample_radiation(
    scene: &Scene,
    agent: &mut AgentState,
    rng: &mut ChaCha8Rng,
    config: &SwarmConfig,
    timestamp: f64,
) -> SensorReading {
    let truth = scene.radiation_at(&agent.position);
    let sigma = config.sensor_noise_floor.max(config.sensor_noise_rel);
    let eps = Normal::new(0.0, sigma).expect("sigma is finite and non-negative").sample(rng);
    let seq = agent.next_seq;
    agent.next_seq += 1;
    SensorReading {
        agent_id: agent.agent_id,
        position: agent.position,
        kind: RADIATION_DOSE,
        value: (truth * (1.0 + eps)).max(0.0),
        timestamp,
        seq,
    }
}

/// Simulated camera frame and detector output at the agent's position.
pub fn capture_image(
    scene: &Scene,
    agent: &mut AgentState,
    rng: &mut ChaCha8Rng,
    config: &SwarmConfig,
    timestamp: f64,
) -> (ImageCaptureMeta, Vec<Detection>) {
    let capture_id = format!("{}-cap-{}", agent.endpoint(), agent.next_capture);
    agent.next_capture += 1;
    let center = agent.position.on_ground();
    let hw = config.footprint_half_width_m;
    let scale = IMAGE_SIZE_PX / (2.0 * hw);
    let to_px = |v: f64| (v * scale).clamp(0.0, IMAGE_SIZE_PX);

    let mut detections = Vec::new();
    for obj in scene.objects_in_footprint(&center, hw) {
        let Some(class) = config.detector.classes.get(&obj.class_label) else { continue };
        if rng.random::<f64>() >= class.p_d {
            continue;
        }
        let draw = rng.random::<f64>();
        let mut cumulative = 0.0;
        let mut chosen = None;
        for (label, p) in &class.confusion {
            cumulative += p;
            if draw < cumulative {
                chosen = Some((label, *p));
                break;
            }
        }
        let (label, p) = chosen
            .or_else(|| class.confusion.iter().rev().find(|(_, p)| **p > 0.0).map(|(l, p)| (l, *p)))
            .unwrap_or((&obj.class_label, 1.0));
        let jitter = rng.random_range(-CONFIDENCE_JITTER..=CONFIDENCE_JITTER);
        let confidence = (p + jitter).clamp(f64::EPSILON, 1.0);

        let left = center.east_m - hw;
        let top = center.north_m + hw;
        let (e, n, r) = (obj.position.east_m, obj.position.north_m, obj.radius_m);
        let bbox = [to_px(e - r - left), to_px(top - (n + r)), to_px(e + r - left), to_px(top - (n - r))];
        detections.push(Detection {
            capture_id: capture_id.clone(),
            bbox,
            label: label.clone(),
            confidence,
            geo_position: center,
            object_id: obj.id,
        });
    }
    let meta = ImageCaptureMeta {
        capture_id,
        agent_id: agent.agent_id,
        position: agent.position,
        grid_index: agent.last_index,
        footprint_half_width_m: hw,
        timestamp,
    };
    (meta, detections)
}

/// Geodetic position of an agent.
pub fn agent_geo(scene: &Scene, agent: &AgentState) -> Result<GeoPoint, GeoError> {
    geo::from_enu(scene.origin(), &agent.position)
}
