//! Scenario files and strict JSON loading for configuration documents.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::geo::GeoPoint;
use crate::scene::SceneConfig;
use crate::swarm::{AgentSpec, SwarmConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown fields: {}", .0.join(", "))]
    UnknownFields(Vec<String>),
}

/// Parses `text` into `T`, rejecting any field `T` does not declare.
///
/// Every unknown field is reported, not just the first: the parsed value is
/// re-serialized and compared key by key with the input.
pub fn parse_strict<T: DeserializeOwned + Serialize>(text: &str) -> Result<T, ConfigError> {
    let raw: Value = serde_json::from_str(text)?;
    let parsed: T = serde_json::from_value(raw.clone())?;
    let known = serde_json::to_value(&parsed)?;
    let mut unknown = Vec::new();
    collect_unknown(&raw, &known, "", &mut unknown);
    if unknown.is_empty() {
        Ok(parsed)
    } else {
        Err(ConfigError::UnknownFields(unknown))
    }
}

pub fn load_strict<T: DeserializeOwned + Serialize>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_strict(&text)
}

fn collect_unknown(raw: &Value, known: &Value, path: &str, out: &mut Vec<String>) {
    match (raw, known) {
        (Value::Object(r), Value::Object(k)) => {
            for (key, rv) in r {
                let child = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
                match k.get(key) {
                    Some(kv) => collect_unknown(rv, kv, &child, out),
                    None => out.push(child),
                }
            }
        }
        (Value::Array(r), Value::Array(k)) => {
            for (i, (rv, kv)) in r.iter().zip(k).enumerate() {
                collect_unknown(rv, kv, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// A survey mission the headless runner creates at a scripted time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSpec {
    pub at_s: f64,
    pub corners: Vec<GeoPoint<f64>>,
    pub spacing_m: f64,
    pub altitude_m: f64,
    pub agent_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScriptedAction {
    /// An observation reported by a person on scene.
    Evidence { variable: String, value: bool, region_id: String },
    /// Keywords typed in by investigators.
    Keywords { keywords: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEvent {
    pub at_s: f64,
    /// Sending endpoint, e.g. `responder-1` or `console`.
    pub src: String,
    #[serde(flatten)]
    pub action: ScriptedAction,
}

/// Everything needed to run a simulated incident end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub scene: SceneConfig<f64>,
    pub swarm: SwarmConfig,
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub missions: Vec<MissionSpec>,
    #[serde(default)]
    pub script: Vec<ScriptedEvent>,
    /// Hub settings, interpreted by the hub.
    #[serde(default)]
    pub hub: Value,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        load_strict(path)
    }
}
