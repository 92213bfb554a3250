use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ethiplan::{Objective, PrincipleId, SearchBudget, SourceDocument, Suggestion};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::ApiError;
use crate::session::Session;
use crate::store::SessionStore;

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<SessionStore>,
    pub snapshot_path: Option<PathBuf>,
}

impl AppState {
    pub fn new(store: Arc<SessionStore>, snapshot_path: Option<PathBuf>) -> Self {
        AppState { store, snapshot_path }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/plan", get(get_plan))
        .route("/sessions/{id}/evaluate", post(evaluate))
        .route("/sessions/{id}/suggest", post(suggest))
        .route("/sessions/{id}/commit", post(commit))
        .route("/sessions/{id}/history", get(history))
        .route("/snapshot", post(snapshot))
        .with_state(state)
}

type ApiResult<T> = Result<T, ApiError>;

fn body<T: DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

fn principle(text: &str) -> ApiResult<PrincipleId> {
    text.parse()
        .map_err(|e: ethiplan::ethics::UnknownPrinciple| ApiError::new(StatusCode::BAD_REQUEST, "BadPrinciple", e.to_string()))
}

/// Runs `f` on the locked session off the async executor.
async fn with_session<T, F>(state: &AppState, id: String, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&mut Session) -> ApiResult<T> + Send + 'static,
{
    let handle = state.store.get(&id).ok_or_else(|| ApiError::not_found(&id))?;
    tokio::task::spawn_blocking(move || {
        let mut session = handle.lock().map_err(|_| ApiError::internal("session lock poisoned"))?;
        f(&mut session)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    domain: String,
    problem: String,
    #[serde(default)]
    objective: Objective,
    max_depth: Option<usize>,
    max_expansions: Option<usize>,
    plan: Option<Vec<String>>,
}

async fn create_session(State(state): State<AppState>, bytes: Bytes) -> ApiResult<Response> {
    let req: CreateRequest = body(&bytes)?;
    let defaults = SearchBudget::default();
    let budget = SearchBudget::new(
        req.max_depth.unwrap_or(defaults.max_depth),
        req.max_expansions.unwrap_or(defaults.max_expansions),
    )?;
    let session = tokio::task::spawn_blocking(move || {
        Session::create(
            &SourceDocument::new(req.domain, "domain"),
            &SourceDocument::new(req.problem, "problem"),
            req.objective,
            budget,
            req.plan.as_deref(),
        )
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    let summary = session.summary();
    state.store.insert(session);
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn list_sessions(State(state): State<AppState>) -> Json<Value> {
    let ids: Vec<Value> = state.store.sessions().iter().map(Session::summary).collect();
    Json(Value::Array(ids))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_session(&state, id, |s| Ok(s.summary())).await.map(Json)
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if state.store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(&id))
    }
}

async fn get_plan(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_session(&state, id, |s| Ok(s.plan_view())).await.map(Json)
}

#[derive(Deserialize)]
struct EvaluateRequest {
    principle: String,
}

async fn evaluate(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let req: EvaluateRequest = body(&bytes)?;
    let p = principle(&req.principle)?;
    with_session(&state, id, move |s| s.evaluate(p)).await.map(Json)
}

#[derive(Deserialize)]
struct SuggestRequest {
    suggestion: String,
    principle: String,
}

async fn suggest(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Response> {
    let req: SuggestRequest = body(&bytes)?;
    let suggestion: Suggestion = req
        .suggestion
        .parse()
        .map_err(|e: ethiplan::compile::SuggestionSyntaxError| {
            ApiError::new(StatusCode::BAD_REQUEST, "BadSuggestion", e.to_string())
        })?;
    let p = principle(&req.principle)?;
    let explanation = with_session(&state, id, move |s| s.suggest(suggestion, p)).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], explanation.payload_text()).into_response())
}

#[derive(Deserialize)]
struct CommitRequest {
    index: usize,
}

async fn commit(State(state): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> ApiResult<Json<Value>> {
    let req: CommitRequest = body(&bytes)?;
    with_session(&state, id, move |s| {
        s.commit(req.index)?;
        Ok(s.summary())
    })
    .await
    .map(Json)
}

async fn history(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    with_session(&state, id, |s| Ok(s.history_view())).await.map(Json)
}

async fn snapshot(State(state): State<AppState>) -> ApiResult<Json<Value>> {
    let path = state
        .snapshot_path
        .clone()
        .ok_or_else(|| ApiError::conflict("NoSnapshotPath", "no snapshot path is configured"))?;
    let store = state.store.clone();
    let p = path.clone();
    let n = tokio::task::spawn_blocking(move || store.snapshot(&p))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(json!({ "path": path, "sessions": n })))
}
