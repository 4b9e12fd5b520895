//! HTTP facade over grading sessions.
//!
//! | method | path | body / query | reply |
//! |---|---|---|---|
//! | POST | `/analyses` | `{"dataset": …, "params": …, "wait": true}` | 201 status, or 202 when `wait` is false |
//! | GET | `/analyses/{id}/status` | | status |
//! | GET | `/analyses/{id}/clusters` | | the analysis, as `mlp cluster` writes it |
//! | GET | `/analyses/{id}/representatives` | | representatives to grade |
//! | POST | `/analyses/{id}/grades` | `{"<solution id>": grade, …}` | grade report |
//! | GET | `/analyses/{id}/grades` | | latest grade report |
//! | GET | `/analyses/{id}/audit` | | accepted grade submissions |
//! | GET | `/analyses/{id}/solutions/{sid}/feedback` | `?epsilon=` | feedback trace |
//! | GET | `/analyses/{id}/graph` | `?threshold=` | similarity graph |
//!
//! Bodies are byte-identical to the files the command line writes.

mod error;
mod session;

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State as AxState};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};

use mlp_core::io::{from_json_str, parse_dataset, to_json_bytes};
use mlp_core::{analyze_with_progress, prepare, AnalysisParams, Method};

pub use error::ApiError;
pub use session::{AuditEntry, GradeBook, Session, Snapshot, State, Status, Store};

pub type AppState = Arc<Store>;

pub fn router() -> Router {
    router_with(AppState::default())
}

pub fn router_with(state: AppState) -> Router {
    Router::new()
        .route("/analyses", post(create))
        .route("/analyses/{id}/status", get(status))
        .route("/analyses/{id}/clusters", get(clusters))
        .route("/analyses/{id}/representatives", get(representatives))
        .route("/analyses/{id}/grades", post(submit_grades).get(current_grades))
        .route("/analyses/{id}/audit", get(audit))
        .route("/analyses/{id}/solutions/{sid}/feedback", get(feedback))
        .route("/analyses/{id}/graph", get(graph))
        .with_state(state)
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

pub(crate) fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], to_json_bytes(value)).into_response()
}

fn ok<T: Serialize>(value: &T) -> Response {
    json_response(StatusCode::OK, value)
}

fn default_wait() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    dataset: serde_json::Value,
    #[serde(default)]
    params: AnalysisParams,
    #[serde(default = "default_wait")]
    wait: bool,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let text = std::str::from_utf8(body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    from_json_str(text).map_err(|e| ApiError::from_io(e, "body"))
}

async fn create(AxState(store): AxState<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse_body(&body)?;
    let loaded = parse_dataset(&req.dataset.to_string()).map_err(|e| ApiError::from_io(e, "dataset"))?;
    let params = req.params;
    let dataset = loaded.dataset;
    let prep = {
        let dataset = dataset.clone();
        tokio::task::spawn_blocking(move || prepare(&dataset))
            .await
            .map_err(|e| ApiError::unprocessable(e.to_string()))?
            .map_err(ApiError::from)?
    };
    if params.method == Method::Sc && params.k.is_none() {
        return Err(ApiError::bad_request("spectral clustering needs params.k"));
    }

    let total = if params.method == Method::Bayes { params.gibbs.iterations } else { 1 };
    let (id, slot) = store.open(params.method, total);
    let job = {
        let slot = slot.clone();
        tokio::task::spawn_blocking(move || {
            let result = analyze_with_progress(&prep, &params, |d, t| slot.progress(d, t))
                .map(|analysis| Session::new(Snapshot { dataset, filtered: loaded.filtered, params, prep, analysis }))
                .map_err(ApiError::from);
            slot.finish(result);
        })
    };
    if !req.wait {
        return Ok(json_response(StatusCode::ACCEPTED, &slot.status(&id)));
    }
    job.await.map_err(|e| ApiError::unprocessable(e.to_string()))?;
    match slot.session() {
        Ok(_) => Ok(json_response(StatusCode::CREATED, &slot.status(&id))),
        Err(e) => {
            store.remove(&id);
            Err(e)
        }
    }
}

async fn status(AxState(store): AxState<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(ok(&store.get(&id)?.status(&id)))
}

fn session(store: &Store, id: &str) -> Result<Arc<Session>, ApiError> {
    store.get(id)?.session()
}

async fn clusters(AxState(store): AxState<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(ok(&session(&store, &id)?.snapshot.analysis))
}

async fn representatives(AxState(store): AxState<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = session(&store, &id)?;
    Ok(ok(&s.snapshot.analysis.representative_entries(&s.snapshot.dataset)))
}

async fn submit_grades(
    AxState(store): AxState<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let s = session(&store, &id)?;
    let grades: BTreeMap<String, f64> = parse_body(&body)?;
    let report = s.submit(grades)?;
    Ok(ok(&report))
}

async fn current_grades(AxState(store): AxState<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    match session(&store, &id)?.book().current {
        Some((_, report)) => Ok(ok(&report)),
        None => Err(ApiError::not_found("no grades submitted yet")),
    }
}

async fn audit(AxState(store): AxState<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(ok(&session(&store, &id)?.book().audit))
}

#[derive(Debug, Deserialize)]
struct FeedbackQuery {
    epsilon: Option<f64>,
}

async fn feedback(
    AxState(store): AxState<AppState>,
    Path((id, sid)): Path<(String, String)>,
    Query(q): Query<FeedbackQuery>,
) -> Result<Response, ApiError> {
    let s = session(&store, &id)?;
    let snap = &s.snapshot;
    if snap.prep.index_of(&sid).is_none() {
        return Err(ApiError::not_found(format!("no solution `{sid}`")));
    }
    if snap.analysis.method != Method::Bayes {
        return Err(ApiError::unprocessable("feedback traces need an MLP-B analysis"));
    }
    let Some((grades, _)) = s.book().current else {
        return Err(ApiError::conflict("submit representative grades first"));
    };
    let epsilon = q.epsilon.unwrap_or(snap.params.epsilon);
    let trace = snap.analysis.feedback(&snap.prep, &sid, &grades, epsilon)?.expect("bayes analysis");
    Ok(ok(&trace))
}

#[derive(Debug, Deserialize)]
struct GraphQuery {
    threshold: Option<f64>,
}

async fn graph(
    AxState(store): AxState<AppState>,
    Path(id): Path<String>,
    Query(q): Query<GraphQuery>,
) -> Result<Response, ApiError> {
    let s = session(&store, &id)?;
    let threshold = q.threshold.ok_or_else(|| ApiError::bad_request("missing query parameter `threshold`"))?;
    let g = s
        .snapshot
        .analysis
        .graph(&s.snapshot.prep, &s.node_grades(), threshold)
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    Ok(ok(&g))
}
