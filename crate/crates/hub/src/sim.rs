//! Scenario driver: steps the swarm and feeds the hub what reaches it.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use cbrne_core::inference::Category;
use cbrne_core::protocol::{self, Command, Envelope, EvidenceBody, MessageType, MsgIdGen, HUB};
use cbrne_core::scenario::{MissionSpec, Scenario, ScriptedAction};
use cbrne_core::scene::build_scene;
use cbrne_core::swarm::SwarmState;
use cbrne_core::{RankedDoc, Scene};
use serde::{Deserialize, Serialize};

use crate::config::HubConfig;
use crate::hub::{Hub, MissionRequest};
use crate::log::EventLog;
use crate::state::{Knowledge, MissionProgress, MissionState, MostProbable};
use crate::HubError;

/// Message-id stream for scripted responder and console messages.
const SCRIPT_ID_STREAM: u64 = 3;

pub fn load_scenario(path: &Path) -> Result<Scenario, HubError> {
    Scenario::load(path).map_err(|e| HubError::Setup(format!("{}: {e}", path.display())))
}

/// Hub settings for a scenario file, honouring an override file.
pub fn scenario_config(scenario: &Scenario, path: &Path, override_path: Option<&Path>) -> Result<HubConfig, HubError> {
    HubConfig::select(&scenario.hub, path.parent().unwrap_or(Path::new(".")), override_path)
}

pub fn knowledge_for(scenario: &Scenario, config: &HubConfig) -> Result<Arc<Knowledge>, HubError> {
    let origin = scenario.scene.origin;
    Ok(Arc::new(Knowledge::load(config, origin, scenario.scene.background_dose_usv_h)?))
}

pub struct Simulation {
    scenario: Scenario,
    scene: Scene,
    swarm: SwarmState,
    ids: MsgIdGen,
    next_script: usize,
    next_mission: usize,
    steps: u64,
    dropped: u64,
    seed: u64,
}

impl Simulation {
    /// Builds the scene and swarm; `seed` replaces the scenario's seeds.
    pub fn new(mut scenario: Scenario, seed: Option<u64>) -> Result<Self, HubError> {
        if let Some(seed) = seed {
            scenario.scene.rng_seed = seed;
            scenario.swarm.rng_seed = seed;
        }
        let seed = scenario.swarm.rng_seed;
        let scene = build_scene(scenario.scene.clone())?;
        let swarm = SwarmState::new(scenario.swarm.clone(), &scenario.agents, &scene)?;
        let mut script_order: Vec<usize> = (0..scenario.script.len()).collect();
        script_order.sort_by(|a, b| scenario.script[*a].at_s.total_cmp(&scenario.script[*b].at_s));
        scenario.script = script_order.iter().map(|i| scenario.script[*i].clone()).collect();
        scenario.missions.sort_by(|a, b| a.at_s.total_cmp(&b.at_s));
        Ok(Self {
            scenario,
            scene,
            swarm,
            ids: MsgIdGen::with_stream(seed, SCRIPT_ID_STREAM),
            next_script: 0,
            next_mission: 0,
            steps: 0,
            dropped: 0,
            seed,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn time_s(&self) -> f64 {
        self.swarm.time_s
    }

    pub fn dt_s(&self) -> f64 {
        self.swarm.config.dt_s
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    pub fn swarm(&self) -> &SwarmState {
        &self.swarm
    }

    /// Agents announce themselves over the relay network.
    pub fn start(&mut self, hub: &mut Hub) -> Result<(), HubError> {
        let msgs = self.swarm.register_messages(&self.scene)?;
        self.forward(hub, msgs)
    }

    fn forward(&mut self, hub: &mut Hub, msgs: Vec<Envelope>) -> Result<(), HubError> {
        for msg in msgs {
            let from = protocol::parse_rav_endpoint(&msg.src).ok_or_else(|| HubError::Setup(format!("bad sender {}", msg.src)))?;
            if self.swarm.relay_message(&msg, from)?.reached_hub() {
                hub.ingest(msg)?;
            } else {
                self.dropped += 1;
            }
        }
        Ok(())
    }

    fn scripted(&mut self, hub: &mut Hub, now: f64) -> Result<(), HubError> {
        while let Some(event) = self.scenario.script.get(self.next_script).filter(|e| e.at_s <= now).cloned() {
            self.next_script += 1;
            let ts = event.at_s;
            let env = match event.action {
                ScriptedAction::Evidence { variable, value, region_id } => Envelope::new(
                    self.ids.next_id(),
                    ts,
                    event.src,
                    HUB,
                    MessageType::Evidence,
                    &EvidenceBody { variable, value, region_id },
                ),
                ScriptedAction::Keywords { keywords } => Envelope::new(
                    self.ids.next_id(),
                    ts,
                    event.src,
                    HUB,
                    MessageType::Command,
                    &Command::AddKeywords { keywords },
                ),
            };
            hub.ingest(env)?;
        }
        while let Some(spec) = self.scenario.missions.get(self.next_mission).filter(|m| m.at_s <= now).cloned() {
            self.next_mission += 1;
            hub.create_mission(mission_request(&spec), protocol::CONSOLE)?;
        }
        Ok(())
    }

    /// One tick: scripted inputs, downlink, swarm motion, uplink.
    pub fn step(&mut self, hub: &mut Hub) -> Result<(), HubError> {
        let now = self.swarm.time_s;
        self.scripted(hub, now)?;
        for msg in hub.take_outbox() {
            if protocol::parse_rav_endpoint(&msg.dst).is_some_and(|id| self.swarm.agent(id).is_some()) {
                self.swarm.apply_route_assignment(&self.scene, &msg)?;
            }
        }
        let dt = self.swarm.config.dt_s;
        let msgs = self.swarm.step_in_place(&self.scene, dt)?;
        self.forward(hub, msgs)?;
        self.steps += 1;
        Ok(())
    }

    /// True once every scripted input has fired and no survey work remains.
    pub fn finished(&self, hub: &Hub) -> bool {
        let inputs_done =
            self.next_script == self.scenario.script.len() && self.next_mission == self.scenario.missions.len();
        let missions_done = hub.state().missions.values().all(|m| !m.is_open());
        inputs_done && (missions_done || self.swarm.is_quiescent())
    }
}

fn mission_request(spec: &MissionSpec) -> MissionRequest {
    MissionRequest {
        corners: spec.corners.clone(),
        spacing_m: spec.spacing_m,
        altitude_m: spec.altitude_m,
        agent_ids: spec.agent_ids.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub steps: u64,
    pub sim_time_s: f64,
    pub coverage_pct: f64,
    pub belief: std::collections::BTreeMap<Category, f64>,
    pub substances: std::collections::BTreeMap<String, f64>,
    pub most_probable: MostProbable,
    pub evidence_count: u64,
    pub missions: Vec<MissionProgress>,
    pub ranked_docs: Vec<RankedDoc>,
    pub event_count: u64,
    pub messages_dropped: u64,
}

impl RunReport {
    pub fn build(sim: &Simulation, hub: &Hub) -> Self {
        let snapshot = hub.snapshot();
        let (visited, total) = snapshot.missions.iter().fold((0, 0), |(v, t), m| (v + m.visited, t + m.total));
        let coverage_pct = if total == 0 { 0.0 } else { 100.0 * visited as f64 / total as f64 };
        Self {
            seed: sim.seed(),
            steps: sim.steps(),
            sim_time_s: sim.time_s(),
            coverage_pct,
            belief: snapshot.belief.categories.clone(),
            substances: snapshot.belief.substances.iter().map(|(id, (_, p))| (id.clone(), *p)).collect(),
            most_probable: snapshot.most_probable.clone(),
            evidence_count: snapshot.belief.evidence_count,
            missions: snapshot.missions.clone(),
            ranked_docs: snapshot.ranked_docs.clone(),
            event_count: hub.event_count() as u64,
            messages_dropped: sim.dropped(),
        }
    }

    pub fn all_missions_complete(&self) -> bool {
        !self.missions.is_empty() && self.missions.iter().all(|m| m.state == MissionState::Complete)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub steps: u64,
    pub seed: Option<u64>,
    /// Event log file, overriding the config.
    pub log: Option<PathBuf>,
    /// Hub config file replacing the scenario's inline section.
    pub config: Option<PathBuf>,
}

/// Runs a scenario to completion or `options.steps` ticks.
pub fn run_headless(scenario_path: &Path, options: &RunOptions) -> Result<(RunReport, Hub), HubError> {
    let scenario = load_scenario(scenario_path)?;
    let config = scenario_config(&scenario, scenario_path, options.config.as_deref())?;
    let knowledge = knowledge_for(&scenario, &config)?;
    let mut sim = Simulation::new(scenario, options.seed)?;
    let log = match options.log.as_ref().or(config.log.as_ref()) {
        Some(path) => EventLog::create(path)?,
        None => EventLog::in_memory(),
    };
    let mut hub = Hub::new(knowledge, sim.seed(), log);
    sim.start(&mut hub)?;
    while sim.steps() < options.steps && !sim.finished(&hub) {
        sim.step(&mut hub)?;
    }
    Ok((RunReport::build(&sim, &hub), hub))
}
