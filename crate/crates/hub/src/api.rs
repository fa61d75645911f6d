//! HTTP interface.

use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cbrne_core::protocol::{decode, DecodeError, Violation, CONSOLE};
use serde::Deserialize;
use serde_json::json;
use tower_http::cors::CorsLayer;

use crate::hub::{Hub, MissionRequest};
use crate::log::EventView;
use crate::state::MostProbable;
use crate::HubError;

pub type SharedHub = Arc<Mutex<Hub>>;

pub fn router(hub: SharedHub) -> Router {
    Router::new()
        .route("/api/v1/messages", post(post_message))
        .route("/api/v1/missions", post(post_mission))
        .route("/api/v1/missions/{id}", get(get_mission))
        .route("/api/v1/agents", get(get_agents))
        .route("/api/v1/threats", get(get_threats))
        .route("/api/v1/documents/ranked", get(get_ranked))
        .route("/api/v1/snapshot", get(get_snapshot))
        .route("/api/v1/events", get(get_events))
        .layer(CorsLayer::permissive())
        .with_state(hub)
}

fn lock(hub: &SharedHub) -> MutexGuard<'_, Hub> {
    hub.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

impl IntoResponse for HubError {
    fn into_response(self) -> Response {
        let (status, body) = match &self {
            HubError::Invalid(violations) => {
                (StatusCode::UNPROCESSABLE_ENTITY, json!({ "error": "invalid", "violations": violations }))
            }
            HubError::Conflict(m) => (StatusCode::CONFLICT, json!({ "error": m })),
            HubError::UnknownMission(id) => (StatusCode::NOT_FOUND, json!({ "error": format!("no mission {id}") })),
            other => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": other.to_string() })),
        };
        (status, Json(body)).into_response()
    }
}

fn decode_violation(e: &DecodeError) -> Violation {
    let field = match e {
        DecodeError::MissingField(f) | DecodeError::UnknownField(f) => f.clone(),
        DecodeError::WrongType { field, .. } => field.clone(),
        DecodeError::UnsupportedVersion(_) => "version".into(),
        DecodeError::UnknownType(_) => "type".into(),
        DecodeError::Parse { .. } | DecodeError::NotAnObject => String::new(),
    };
    Violation { field, message: e.to_string() }
}

async fn post_message(State(hub): State<SharedHub>, bytes: Bytes) -> Result<Response, HubError> {
    let env = decode(&bytes).map_err(|e| HubError::Invalid(vec![decode_violation(&e)]))?;
    let ingested = lock(&hub).ingest(env)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "seq": ingested.seq }))).into_response())
}

async fn post_mission(State(hub): State<SharedHub>, Json(request): Json<MissionRequest>) -> Result<Response, HubError> {
    let (mission_id, _) = lock(&hub).create_mission(request, CONSOLE)?;
    Ok((StatusCode::CREATED, Json(json!({ "mission_id": mission_id }))).into_response())
}

async fn get_mission(State(hub): State<SharedHub>, Path(id): Path<String>) -> Result<Response, HubError> {
    let hub = lock(&hub);
    let mission = hub.mission(&id).ok_or(HubError::UnknownMission(id))?;
    Ok(Json(mission).into_response())
}

async fn get_agents(State(hub): State<SharedHub>) -> Response {
    Json(lock(&hub).agents()).into_response()
}

async fn get_threats(State(hub): State<SharedHub>) -> Response {
    let hub = lock(&hub);
    let belief = hub.belief();
    Json(json!({ "belief": belief, "most_probable": MostProbable::of(belief) })).into_response()
}

#[derive(Debug, Deserialize)]
struct RankedQuery {
    k: Option<usize>,
}

async fn get_ranked(State(hub): State<SharedHub>, Query(q): Query<RankedQuery>) -> Response {
    let hub = lock(&hub);
    let k = q.k.unwrap_or(hub.knowledge().top_k);
    Json(hub.ranked(k)).into_response()
}

async fn get_snapshot(State(hub): State<SharedHub>) -> Response {
    Json(lock(&hub).snapshot()).into_response()
}

#[derive(Debug, Deserialize)]
struct EventsQuery {
    since: Option<u64>,
}

async fn get_events(State(hub): State<SharedHub>, Query(q): Query<EventsQuery>) -> Response {
    let hub = lock(&hub);
    let events: Vec<EventView> = hub.events_since(q.since.unwrap_or(0)).iter().map(EventView::from).collect();
    Json(events).into_response()
}
