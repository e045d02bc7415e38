//! Routes. Bodies are parsed by hand so malformed input still gets the
//! `{code, message, detail}` error shape.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::IntoResponse;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use bnx_core::{parse_network, Network, Scenario, ScenarioKind, Settings, TargetQuery};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use crate::bundle::{self, ExplanationBundle, Mode, WhatIfReport};
use crate::error::ApiError;
use crate::store::{Session, Store};

type AppState = Arc<Store>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/networks", post(create_network))
        .route("/networks/{id}", get(get_network))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/target", put(set_target))
        .route("/sessions/{id}/findings", put(set_findings))
        .route("/sessions/{id}/explanation", get(explanation))
        .route("/sessions/{id}/whatif", post(whatif))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(store)
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_body(e.to_string()))
}

/// Runs engine work off the async workers.
async fn compute<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> ApiResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

async fn create_network(State(store): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let text = std::str::from_utf8(&body).map_err(|e| ApiError::bad_body(e.to_string()))?;
    let net = parse_network(text)?;
    let id = store.add_network(net)?;
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

async fn get_network(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Network>> {
    let net = store.network(&id)?;
    Ok(Json(Network::clone(&net)))
}

#[derive(Deserialize)]
struct NewSession {
    network_id: String,
}

async fn create_session(State(store): State<AppState>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let req: NewSession = parse_body(&body)?;
    Ok((StatusCode::CREATED, Json(store.create_session(&req.network_id)?)))
}

async fn get_session(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    Ok(Json(store.session(&id)?))
}

async fn set_target(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Session>> {
    store.session(&id)?;
    let target: TargetQuery = parse_body(&body)?;
    Ok(Json(store.set_target(&id, target)?))
}

async fn set_findings(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Session>> {
    store.session(&id)?;
    let findings: BTreeMap<String, String> = parse_body(&body)?;
    Ok(Json(store.set_findings(&id, findings)?))
}

async fn explanation(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<ExplanationBundle>> {
    let mode = match params.get("mode") {
        None => Mode::default(),
        Some(m) => m.parse::<Mode>().map_err(|e| {
            ApiError::new(StatusCode::BAD_REQUEST, "invalid_mode", e.to_string()).with_detail(json!({ "mode": m }))
        })?,
    };
    let (session, net) = store.snapshot_of(&id)?;
    let target = session.target.ok_or_else(|| ApiError::no_target(&id))?;
    let bundle = compute(move || {
        Ok(bundle::explain(
            &net,
            &target,
            &session.scenario,
            mode,
            None,
            &Settings::default(),
        )?)
    })
    .await?;
    Ok(Json(bundle))
}

async fn whatif(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<WhatIfReport>> {
    let (session, net) = store.snapshot_of(&id)?;
    let target = session.target.ok_or_else(|| ApiError::no_target(&id))?;
    let findings: BTreeMap<String, String> = parse_body(&body)?;
    let hypothetical = Scenario {
        findings,
        kind: ScenarioKind::Hypothetical,
    };
    let report = compute(move || {
        Ok(bundle::whatif(
            &net,
            &target,
            &session.scenario,
            &hypothetical,
            &Settings::default(),
        )?)
    })
    .await?;
    Ok(Json(report))
}
