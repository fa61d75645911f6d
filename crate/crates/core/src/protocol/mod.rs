//! The JSON message envelope shared by every subsystem.
//!
//! ```text
//! {"body":{...},"dst":"hub","msg_id":"…","src":"rav-1","ts":12.5,"type":"heartbeat","version":1}
//! ```
//!
//! [`encode`] always produces the canonical form (see [`canonical`]), so two
//! structurally equal envelopes encode to the same bytes. Bodies are kept as
//! JSON objects: fields a reader does not understand survive a
//! decode/encode round trip untouched.

pub mod body;
pub mod canonical;
mod validate;

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

pub use body::*;
pub use validate::{validate, Violation};

pub const PROTOCOL_VERSION: u64 = 1;

pub const HUB: &str = "hub";
pub const CONSOLE: &str = "console";
pub const BROADCAST: &str = "broadcast";

pub fn rav_endpoint(id: u32) -> String {
    format!("rav-{id}")
}

pub fn parse_rav_endpoint(endpoint: &str) -> Option<u32> {
    endpoint.strip_prefix("rav-")?.parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageType {
    Register,
    Heartbeat,
    Command,
    RouteAssignment,
    SensorReading,
    ImageMeta,
    Detection,
    Status,
    Evidence,
    Error,
}

impl MessageType {
    pub const ALL: [MessageType; 10] = [
        MessageType::Register,
        MessageType::Heartbeat,
        MessageType::Command,
        MessageType::RouteAssignment,
        MessageType::SensorReading,
        MessageType::ImageMeta,
        MessageType::Detection,
        MessageType::Status,
        MessageType::Evidence,
        MessageType::Error,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MessageType::Register => "register",
            MessageType::Heartbeat => "heartbeat",
            MessageType::Command => "command",
            MessageType::RouteAssignment => "route_assignment",
            MessageType::SensorReading => "sensor_reading",
            MessageType::ImageMeta => "image_meta",
            MessageType::Detection => "detection",
            MessageType::Status => "status",
            MessageType::Evidence => "evidence",
            MessageType::Error => "error",
        }
    }

    /// Body fields that must be present for [`decode`] to accept a message.
    pub fn required_body_fields(&self) -> &'static [&'static str] {
        match self {
            MessageType::Register => &["kind", "position", "battery_pct", "speed_m_s", "radio_range_m"],
            MessageType::Heartbeat => &["battery_pct", "position", "status"],
            MessageType::Command => &["action"],
            MessageType::RouteAssignment => &["mission_id", "waypoints"],
            MessageType::SensorReading => &["kind", "value", "seq", "position"],
            MessageType::ImageMeta => {
                &["capture_id", "mission_id", "row", "col", "position", "footprint_half_width_m", "detection_count"]
            }
            MessageType::Detection => &["capture_id", "label", "confidence", "bbox", "position"],
            MessageType::Status => &["status", "battery_pct", "reason"],
            MessageType::Evidence => &["variable", "value", "region_id"],
            MessageType::Error => &["code", "message"],
        }
    }
}

impl fmt::Display for MessageType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MessageType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Self::ALL.into_iter().find(|t| t.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub version: u64,
    pub msg_id: String,
    /// Simulation seconds.
    pub ts: f64,
    pub src: String,
    pub dst: String,
    /// Message type name; see [`MessageType`].
    pub msg_type: String,
    pub body: Map<String, Value>,
}

impl Envelope {
    /// Builds an envelope from a typed body.
    pub fn new<B: Serialize>(
        msg_id: String,
        ts: f64,
        src: impl Into<String>,
        dst: impl Into<String>,
        msg_type: MessageType,
        body: &B,
    ) -> Self {
        let body = match serde_json::to_value(body).expect("body types serialize") {
            Value::Object(map) => map,
            other => panic!("message bodies must be JSON objects, got {other}"),
        };
        Self {
            version: PROTOCOL_VERSION,
            msg_id,
            ts,
            src: src.into(),
            dst: dst.into(),
            msg_type: msg_type.as_str().to_string(),
            body,
        }
    }

    pub fn kind(&self) -> Option<MessageType> {
        self.msg_type.parse().ok()
    }

    /// Reads the body through a typed view.
    pub fn body_as<B: DeserializeOwned>(&self) -> Result<B, serde_json::Error> {
        serde_json::from_value(Value::Object(self.body.clone()))
    }

    pub fn to_value(&self) -> Value {
        let mut map = Map::new();
        map.insert("version".into(), Value::from(self.version));
        map.insert("msg_id".into(), Value::String(self.msg_id.clone()));
        map.insert(
            "ts".into(),
            serde_json::Number::from_f64(self.ts).map(Value::Number).unwrap_or(Value::Null),
        );
        map.insert("src".into(), Value::String(self.src.clone()));
        map.insert("dst".into(), Value::String(self.dst.clone()));
        map.insert("type".into(), Value::String(self.msg_type.clone()));
        map.insert("body".into(), Value::Object(self.body.clone()));
        Value::Object(map)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("message violates the protocol: {}", list(.0))]
    Invalid(Vec<Violation>),
}

fn list(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("message is not a JSON object")]
    NotAnObject,
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("field `{field}` must be {expected}")]
    WrongType { field: String, expected: &'static str },
    #[error("unsupported protocol version {0}")]
    UnsupportedVersion(u64),
    #[error("unknown message type {0:?}")]
    UnknownType(String),
    #[error("unknown envelope field `{0}`")]
    UnknownField(String),
}

/// Canonical bytes for a valid message.
pub fn encode(msg: &Envelope) -> Result<Vec<u8>, EncodeError> {
    validate(msg).map_err(EncodeError::Invalid)?;
    Ok(canonical::to_canonical_string(&msg.to_value()).into_bytes())
}

const ENVELOPE_FIELDS: [&str; 7] = ["version", "msg_id", "ts", "src", "dst", "type", "body"];

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

pub fn decode(bytes: &[u8]) -> Result<Envelope, DecodeError> {
    let text = std::str::from_utf8(bytes).map_err(|e| DecodeError::Parse {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })?;
    let value: Value = serde_json::from_str(text).map_err(|e| DecodeError::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let Value::Object(mut map) = value else {
        return Err(DecodeError::NotAnObject);
    };
    for field in ENVELOPE_FIELDS {
        if !map.contains_key(field) {
            return Err(DecodeError::MissingField(field.to_string()));
        }
    }
    if let Some(extra) = map.keys().find(|k| !ENVELOPE_FIELDS.contains(&k.as_str())) {
        return Err(DecodeError::UnknownField(extra.clone()));
    }
    let wrong = |field: &str, expected| DecodeError::WrongType { field: field.to_string(), expected };

    let version = map["version"].as_u64().ok_or_else(|| wrong("version", "a non-negative integer"))?;
    if version != PROTOCOL_VERSION {
        return Err(DecodeError::UnsupportedVersion(version));
    }
    let mut take_string = |field: &str| match map.remove(field) {
        Some(Value::String(s)) => Ok(s),
        _ => Err(wrong(field, "a string")),
    };
    let msg_id = take_string("msg_id")?;
    let src = take_string("src")?;
    let dst = take_string("dst")?;
    let msg_type = take_string("type")?;
    let ts = map["ts"].as_f64().ok_or_else(|| wrong("ts", "a number"))?;
    let Some(Value::Object(body)) = map.remove("body") else {
        return Err(wrong("body", "an object"));
    };

    let kind: MessageType = msg_type.parse().map_err(|_| DecodeError::UnknownType(msg_type.clone()))?;
    if let Some(missing) = kind.required_body_fields().iter().find(|f| !body.contains_key(**f)) {
        return Err(DecodeError::MissingField(format!("body.{missing}")));
    }
    Ok(Envelope { version, msg_id, ts, src, dst, msg_type, body })
}

/// Seeded source of message identifiers.
#[derive(Debug, Clone)]
pub struct MsgIdGen {
    rng: ChaCha8Rng,
}

impl MsgIdGen {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent generator sharing `seed`, e.g. one stream per sender.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    pub fn next_id(&mut self) -> String {
        let mut bytes = [0u8; 16];
        self.rng.fill_bytes(&mut bytes);
        uuid::Builder::from_random_bytes(bytes).into_uuid().hyphenated().to_string()
    }
}

/// True for lowercase hyphenated 128-bit identifiers.
pub fn is_canonical_msg_id(s: &str) -> bool {
    uuid::Uuid::try_parse(s).is_ok_and(|u| u.hyphenated().to_string() == s)
}
