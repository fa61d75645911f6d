use cbrne_core::protocol::{
    decode, encode, validate, AgentStatus, DecodeError, DetectionBody, Envelope, EvidenceBody, HeartbeatBody,
    MessageType, MsgIdGen, SensorReadingBody, StatusBody, HUB,
};
use cbrne_core::GeoPoint;
use cbrne_testkit::workspace_root;
use proptest::prelude::*;
use rand::Rng;

fn goldens() -> Vec<(String, Vec<u8>)> {
    let dir = workspace_root().join("protocol/golden");
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".golden.json"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn goldens_round_trip_byte_for_byte() {
    let all = goldens();
    assert_eq!(all.len(), MessageType::ALL.len());
    for (name, bytes) in &all {
        let msg = decode(bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(validate(&msg), Ok(()), "{name}");
        let again = encode(&msg).unwrap();
        assert_eq!(String::from_utf8_lossy(&again), String::from_utf8_lossy(bytes), "{name}");
        assert_eq!(format!("{}.golden.json", msg.msg_type), *name);
    }
}

#[test]
fn golden_heartbeat_fields() {
    let bytes = std::fs::read(workspace_root().join("protocol/golden/heartbeat.golden.json")).unwrap();
    let msg = decode(&bytes).unwrap();
    let body: HeartbeatBody = msg.body_as().unwrap();
    assert_eq!(body.battery_pct, 87.5);
    assert_eq!(body.status, "enroute");
    assert_eq!(msg.src, "rav-1");
    assert_eq!(msg.dst, HUB);
}

#[test]
fn unknown_body_fields_survive_a_round_trip() {
    let bytes = std::fs::read(workspace_root().join("protocol/golden/evidence.golden.json")).unwrap();
    let mut msg = decode(&bytes).unwrap();
    msg.body.insert("operator_note".into(), "smell of almonds".into());
    assert_eq!(validate(&msg), Ok(()));
    let back = decode(&encode(&msg).unwrap()).unwrap();
    assert_eq!(back.body["operator_note"], "smell of almonds");
    assert_eq!(back, msg);
}

#[test]
fn missing_msg_id_is_named() {
    let bytes = std::fs::read(workspace_root().join("protocol/golden/status.golden.json")).unwrap();
    let mut raw: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    raw.as_object_mut().unwrap().remove("msg_id");
    assert_eq!(decode(raw.to_string().as_bytes()), Err(DecodeError::MissingField("msg_id".into())));
}

#[test]
fn other_versions_are_rejected() {
    let bytes = std::fs::read(workspace_root().join("protocol/golden/register.golden.json")).unwrap();
    let mut raw: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    raw["version"] = 2.into();
    assert_eq!(decode(raw.to_string().as_bytes()), Err(DecodeError::UnsupportedVersion(2)));
}

#[test]
fn invalid_messages_refuse_to_encode() {
    let mut msg = decode(&std::fs::read(workspace_root().join("protocol/golden/detection.golden.json")).unwrap()).unwrap();
    msg.body.insert("confidence".into(), 1.5.into());
    msg.dst = msg.src.clone();
    let violations = validate(&msg).unwrap_err();
    let fields: Vec<&str> = violations.iter().map(|v| v.field.as_str()).collect();
    assert_eq!(fields, vec!["dst", "body.confidence"]);
    assert!(encode(&msg).is_err());
}

fn mutate(rng: &mut impl Rng, seed: &[u8]) -> Vec<u8> {
    let mut out = seed.to_vec();
    for _ in 0..rng.random_range(1..8) {
        if out.is_empty() {
            out.push(rng.random());
            continue;
        }
        let at = rng.random_range(0..out.len());
        match rng.random_range(0..4) {
            0 => out[at] = rng.random(),
            1 => {
                out.remove(at);
            }
            2 => out.insert(at, b"{}[]\",:0-e.9"[rng.random_range(0..12)]),
            _ => out.truncate(at),
        }
    }
    out
}

#[test]
fn decoder_never_panics_on_garbage() {
    let seeds: Vec<Vec<u8>> = goldens().into_iter().map(|(_, b)| b).collect();
    let mut rng = cbrne_testkit::rng(0xF022);
    let mut accepted = 0;
    for i in 0..100_000 {
        let input = if i % 4 == 0 {
            (0..rng.random_range(0..64)).map(|_| rng.random()).collect()
        } else {
            let pick = rng.random_range(0..seeds.len());
            mutate(&mut rng, &seeds[pick])
        };
        if let Ok(msg) = decode(&input) {
            accepted += 1;
            let _ = validate(&msg);
            let _ = encode(&msg);
        }
    }
    println!("{accepted} of 100000 fuzz inputs decoded");
}

fn geo() -> impl Strategy<Value = GeoPoint> {
    (-90.0f64..=90.0, -180.0f64..=180.0, 0.0f64..5000.0).prop_map(|(lat_deg, lon_deg, alt_m)| GeoPoint { lat_deg, lon_deg, alt_m })
}

fn label() -> impl Strategy<Value = String> {
    "[a-z_]{1,12}"
}

fn envelope() -> impl Strategy<Value = Envelope> {
    let body = prop_oneof![
        (0.0f64..=100.0, geo(), 0usize..5).prop_map(|(battery_pct, position, s)| (
            MessageType::Heartbeat,
            serde_json::to_value(HeartbeatBody { battery_pct, position, status: AgentStatus::ALL[s].as_str().into() }).unwrap()
        )),
        (0.0f64..1e6, any::<u32>(), geo()).prop_map(|(value, seq, position)| (
            MessageType::SensorReading,
            serde_json::to_value(SensorReadingBody { kind: "radiation_dose".into(), value, seq: seq as u64, position }).unwrap()
        )),
        (label(), 0.001f64..=1.0, [0.0f64..1000.0, 0.0f64..1000.0, 0.5f64..24.0, 0.5f64..24.0], geo()).prop_map(
            |(label, confidence, b, position)| {
                let bbox = [b[0], b[1], b[0] + b[2], b[1] + b[3]];
                (
                    MessageType::Detection,
                    serde_json::to_value(DetectionBody { capture_id: "rav-1-cap-0".into(), label, confidence, bbox, position })
                        .unwrap(),
                )
            }
        ),
        (label(), any::<bool>(), label()).prop_map(|(variable, value, region_id)| (
            MessageType::Evidence,
            serde_json::to_value(EvidenceBody { variable, value, region_id }).unwrap()
        )),
        (0usize..5, 0.0f64..=100.0, ".{0,24}").prop_map(|(s, battery_pct, reason)| (
            MessageType::Status,
            serde_json::to_value(StatusBody { status: AgentStatus::ALL[s].as_str().into(), battery_pct, reason }).unwrap()
        )),
    ];
    (any::<u64>(), 0.0f64..1e7, 1u32..50, body).prop_map(|(seed, ts, agent, (kind, body))| {
        Envelope::new(MsgIdGen::new(seed).next_id(), ts, format!("rav-{agent}"), HUB, kind, &body)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn valid_messages_round_trip(msg in envelope()) {
        prop_assert_eq!(validate(&msg), Ok(()));
        let bytes = encode(&msg).unwrap();
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(encode(&back).unwrap(), bytes);
    }
}
