use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{is_canonical_msg_id, AgentStatus, Command, Envelope, MessageType, BROADCAST, IMAGE_SIZE_PX, PROTOCOL_VERSION, RADIATION_DOSE};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.out.push(Violation { field: field.into(), message: message.into() });
    }

    fn number(&mut self, body: &Map<String, Value>, prefix: &str, key: &str) -> Option<f64> {
        let field = format!("{prefix}{key}");
        match body.get(key) {
            None => self.fail(field, "missing"),
            Some(v) => match v.as_f64() {
                Some(x) => return Some(x),
                None => self.fail(field, "must be a number"),
            },
        }
        None
    }

    fn range(&mut self, body: &Map<String, Value>, prefix: &str, key: &str, lo: f64, hi: f64) -> Option<f64> {
        let x = self.number(body, prefix, key)?;
        if !(lo..=hi).contains(&x) {
            self.fail(format!("{prefix}{key}"), format!("{x} is outside [{lo}, {hi}]"));
            return None;
        }
        Some(x)
    }

    fn non_negative(&mut self, body: &Map<String, Value>, prefix: &str, key: &str) {
        if let Some(x) = self.number(body, prefix, key) {
            if x < 0.0 {
                self.fail(format!("{prefix}{key}"), "must not be negative");
            }
        }
    }

    fn positive(&mut self, body: &Map<String, Value>, prefix: &str, key: &str) {
        if let Some(x) = self.number(body, prefix, key) {
            if x <= 0.0 {
                self.fail(format!("{prefix}{key}"), "must be positive");
            }
        }
    }

    fn string<'a>(&mut self, body: &'a Map<String, Value>, prefix: &str, key: &str) -> Option<&'a str> {
        let field = format!("{prefix}{key}");
        match body.get(key) {
            Some(Value::String(s)) if !s.is_empty() => return Some(s),
            Some(Value::String(_)) => self.fail(field, "must not be empty"),
            None => self.fail(field, "missing"),
            Some(_) => self.fail(field, "must be a string"),
        }
        None
    }

    fn integer(&mut self, body: &Map<String, Value>, prefix: &str, key: &str) -> Option<u64> {
        let field = format!("{prefix}{key}");
        match body.get(key).map(Value::as_u64) {
            Some(Some(n)) => return Some(n),
            Some(None) => self.fail(field, "must be a non-negative integer"),
            None => self.fail(field, "missing"),
        }
        None
    }

    fn boolean(&mut self, body: &Map<String, Value>, prefix: &str, key: &str) -> Option<bool> {
        let field = format!("{prefix}{key}");
        match body.get(key) {
            Some(Value::Bool(b)) => return Some(*b),
            Some(_) => self.fail(field, "must be a boolean"),
            None => self.fail(field, "missing"),
        }
        None
    }

    fn object<'a>(&mut self, body: &'a Map<String, Value>, prefix: &str, key: &str) -> Option<&'a Map<String, Value>> {
        let field = format!("{prefix}{key}");
        match body.get(key) {
            Some(Value::Object(m)) => return Some(m),
            Some(_) => self.fail(field, "must be an object"),
            None => self.fail(field, "missing"),
        }
        None
    }

    fn geo_fields(&mut self, m: &Map<String, Value>, prefix: &str) {
        self.range(m, prefix, "lat_deg", -90.0, 90.0);
        self.range(m, prefix, "lon_deg", -180.0, 180.0);
        self.non_negative(m, prefix, "alt_m");
    }

    fn position(&mut self, body: &Map<String, Value>, prefix: &str) {
        if let Some(p) = self.object(body, prefix, "position") {
            self.geo_fields(p, &format!("{prefix}position."));
        }
    }

    fn status(&mut self, body: &Map<String, Value>, prefix: &str) {
        if let Some(s) = self.string(body, prefix, "status") {
            if s.parse::<AgentStatus>().is_err() {
                self.fail(format!("{prefix}status"), format!("unknown status {s:?}"));
            }
        }
    }

    fn string_list(&mut self, body: &Map<String, Value>, prefix: &str, key: &str, allow_empty: bool) {
        let field = format!("{prefix}{key}");
        match body.get(key) {
            Some(Value::Array(items)) => {
                if items.is_empty() && !allow_empty {
                    self.fail(field.clone(), "must not be empty");
                }
                for (i, item) in items.iter().enumerate() {
                    if !item.as_str().is_some_and(|s| !s.is_empty()) {
                        self.fail(format!("{field}[{i}]"), "must be a non-empty string");
                    }
                }
            }
            Some(_) => self.fail(field, "must be an array"),
            None => self.fail(field, "missing"),
        }
    }
}

/// Checks envelope invariants and the type-specific body schema, reporting
/// every violation in field order.
pub fn validate(msg: &Envelope) -> Result<(), Vec<Violation>> {
    let mut c = Checker { out: Vec::new() };
    if msg.version != PROTOCOL_VERSION {
        c.fail("version", format!("must be {PROTOCOL_VERSION}"));
    }
    if !is_canonical_msg_id(&msg.msg_id) {
        c.fail("msg_id", "must be a lowercase hyphenated 128-bit identifier");
    }
    if !msg.ts.is_finite() || msg.ts < 0.0 {
        c.fail("ts", "must be a finite, non-negative number");
    }
    if msg.src.is_empty() {
        c.fail("src", "must not be empty");
    } else if msg.src == BROADCAST {
        c.fail("src", "broadcast is only valid as a destination");
    }
    if msg.dst.is_empty() {
        c.fail("dst", "must not be empty");
    } else if msg.dst == msg.src {
        c.fail("dst", "must differ from src");
    }
    let kind = msg.msg_type.parse::<MessageType>();
    if kind.is_err() {
        c.fail("type", format!("unknown message type {:?}", msg.msg_type));
    }
    if let Ok(kind) = kind {
        check_body(&mut c, kind, &msg.body);
    }
    if c.out.is_empty() {
        Ok(())
    } else {
        Err(c.out)
    }
}

fn check_body(c: &mut Checker, kind: MessageType, b: &Map<String, Value>) {
    let p = "body.";
    match kind {
        MessageType::Register => {
            c.string(b, p, "kind");
            c.position(b, p);
            c.range(b, p, "battery_pct", 0.0, 100.0);
            c.positive(b, p, "speed_m_s");
            c.positive(b, p, "radio_range_m");
        }
        MessageType::Heartbeat => {
            c.range(b, p, "battery_pct", 0.0, 100.0);
            c.position(b, p);
            c.status(b, p);
        }
        MessageType::Command => check_command(c, b),
        MessageType::RouteAssignment => {
            c.string(b, p, "mission_id");
            let aborted = match b.get("aborted") {
                None => false,
                Some(Value::Bool(a)) => *a,
                Some(_) => {
                    c.fail("body.aborted", "must be a boolean");
                    false
                }
            };
            match b.get("waypoints") {
                Some(Value::Array(wps)) => {
                    if wps.is_empty() && !aborted {
                        c.fail("body.waypoints", "must not be empty unless the mission is aborted");
                    }
                    for (i, wp) in wps.iter().enumerate() {
                        let prefix = format!("body.waypoints[{i}].");
                        match wp.as_object() {
                            Some(w) => {
                                c.geo_fields(w, &prefix);
                                c.integer(w, &prefix, "row");
                                c.integer(w, &prefix, "col");
                            }
                            None => c.fail(format!("body.waypoints[{i}]"), "must be an object"),
                        }
                    }
                }
                Some(_) => c.fail("body.waypoints", "must be an array"),
                None => c.fail("body.waypoints", "missing"),
            }
        }
        MessageType::SensorReading => {
            if let Some(k) = c.string(b, p, "kind") {
                if k != RADIATION_DOSE {
                    c.fail("body.kind", format!("unknown sensor kind {k:?}"));
                }
            }
            if let Some(v) = c.number(b, p, "value") {
                if v < 0.0 {
                    c.fail("body.value", "must be non-negative");
                }
            }
            c.integer(b, p, "seq");
            c.position(b, p);
        }
        MessageType::ImageMeta => {
            c.string(b, p, "capture_id");
            c.string(b, p, "mission_id");
            c.integer(b, p, "row");
            c.integer(b, p, "col");
            c.position(b, p);
            c.positive(b, p, "footprint_half_width_m");
            c.integer(b, p, "detection_count");
        }
        MessageType::Detection => {
            c.string(b, p, "capture_id");
            c.string(b, p, "label");
            if let Some(conf) = c.number(b, p, "confidence") {
                if !(conf > 0.0 && conf <= 1.0) {
                    c.fail("body.confidence", "must be in (0, 1]");
                }
            }
            check_bbox(c, b.get("bbox"));
            c.position(b, p);
        }
        MessageType::Status => {
            c.status(b, p);
            c.range(b, p, "battery_pct", 0.0, 100.0);
            if !b.get("reason").is_some_and(Value::is_string) {
                c.fail("body.reason", "must be a string");
            }
        }
        MessageType::Evidence => {
            c.string(b, p, "variable");
            c.boolean(b, p, "value");
            if !b.get("region_id").is_some_and(Value::is_string) {
                c.fail("body.region_id", "must be a string");
            }
        }
        MessageType::Error => {
            c.string(b, p, "code");
            if !b.get("message").is_some_and(Value::is_string) {
                c.fail("body.message", "must be a string");
            }
        }
    }
}

fn check_bbox(c: &mut Checker, v: Option<&Value>) {
    let coords: Option<Vec<f64>> = v.and_then(Value::as_array).and_then(|a| a.iter().map(Value::as_f64).collect());
    match coords {
        Some(xs) if xs.len() == 4 => {
            if xs.iter().any(|x| !(0.0..=IMAGE_SIZE_PX).contains(x)) {
                c.fail("body.bbox", format!("coordinates must lie in [0, {IMAGE_SIZE_PX}]"));
            }
            if !(xs[0] < xs[2] && xs[1] < xs[3]) {
                c.fail("body.bbox", "requires x_min < x_max and y_min < y_max");
            }
        }
        _ => c.fail("body.bbox", "must be an array of four numbers"),
    }
}

fn check_command(c: &mut Checker, b: &Map<String, Value>) {
    let p = "body.";
    let Some(action) = c.string(b, p, "action") else { return };
    match action {
        "create_mission" => {
            c.string(b, p, "mission_id");
            match b.get("corners") {
                Some(Value::Array(corners)) => {
                    if corners.len() != 4 {
                        c.fail("body.corners", format!("needs exactly 4 corners, got {}", corners.len()));
                    }
                    for (i, corner) in corners.iter().enumerate() {
                        match corner.as_object() {
                            Some(m) => c.geo_fields(m, &format!("body.corners[{i}].")),
                            None => c.fail(format!("body.corners[{i}]"), "must be an object"),
                        }
                    }
                }
                Some(_) => c.fail("body.corners", "must be an array"),
                None => c.fail("body.corners", "missing"),
            }
            c.positive(b, p, "spacing_m");
            c.non_negative(b, p, "altitude_m");
            c.string_list(b, p, "agent_ids", false);
        }
        "abort_mission" => {
            c.string(b, p, "mission_id");
        }
        "add_keywords" => c.string_list(b, p, "keywords", false),
        other => c.fail("body.action", format!("unknown action {other:?}; expected one of {:?}", Command::ACTIONS)),
    }
}
