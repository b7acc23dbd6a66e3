//! HTTP view over analysis sessions.
//!
//! Reads clone an `Arc` of the current session and never block each other.
//! Writes (filter edits, configuration updates) are serialised per session:
//! the writer builds a modified copy off the async runtime and swaps it in,
//! so a concurrent reader sees either the old or the new fingerprint.

use std::collections::HashMap;
use std::path::{Path as FsPath, PathBuf};
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use cfscope_core::cohort::SortKey;
use cfscope_core::export::explanation_record;
use cfscope_core::predictor::{confusion_matrix, PredictError};
use cfscope_core::session::{CohortId, ConfigUpdate, SessionError, SessionSpec};
use cfscope_core::{FilterSet, Session};
use serde::Deserialize;
use serde_json::{json, Value as JsonValue};
use tokio::sync::Mutex;
use tracing::{info, warn};

pub const FINGERPRINT_HEADER: &str = "x-scheme-fingerprint";

struct SessionSlot {
    current: RwLock<Arc<Session>>,
    writer: Mutex<()>,
}

impl SessionSlot {
    fn new(session: Session) -> Self {
        Self {
            current: RwLock::new(Arc::new(session)),
            writer: Mutex::new(()),
        }
    }

    fn snapshot(&self) -> Arc<Session> {
        self.current.read().expect("session lock poisoned").clone()
    }

    fn replace(&self, session: Session) {
        *self.current.write().expect("session lock poisoned") = Arc::new(session);
    }
}

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<SessionSlot>>>>,
    session_dir: Option<PathBuf>,
}

impl AppState {
    /// Restores every `*.json` session found in `session_dir`.
    pub fn new(session_dir: Option<PathBuf>) -> Result<Self, SessionError> {
        let mut sessions = HashMap::new();
        if let Some(dir) = &session_dir {
            std::fs::create_dir_all(dir).map_err(|source| SessionError::Io {
                path: dir.clone(),
                source,
            })?;
            let entries = std::fs::read_dir(dir).map_err(|source| SessionError::Io {
                path: dir.clone(),
                source,
            })?;
            for entry in entries.flatten() {
                let path = entry.path();
                if path.extension().is_some_and(|e| e == "json") {
                    match Session::load(&path) {
                        Ok(s) => {
                            info!(id = s.id(), fingerprint = s.fingerprint(), "restored session");
                            sessions.insert(s.id().to_string(), Arc::new(SessionSlot::new(s)));
                        }
                        Err(e) => warn!(path = %path.display(), error = %e, "skipping unreadable session"),
                    }
                }
            }
        }
        Ok(Self {
            sessions: Arc::new(RwLock::new(sessions)),
            session_dir,
        })
    }

    fn slot(&self, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
        self.sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_string()).into())
    }

    fn session_path(&self, id: &str) -> Option<PathBuf> {
        self.session_dir.as_ref().map(|d| session_file(d, id))
    }

    /// Current snapshot of a session, for read handlers.
    pub fn session(&self, id: &str) -> Option<Arc<Session>> {
        self.slot(id).ok().map(|s| s.snapshot())
    }
}

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::UnknownSession(_) | SessionError::Aggregate(_) => StatusCode::NOT_FOUND,
            SessionError::Predict(PredictError::TransportFailure(_))
            | SessionError::Predict(PredictError::MalformedResponse(_))
            | SessionError::Predict(PredictError::OutOfRangeProbability(_)) => StatusCode::BAD_GATEWAY,
            e if e.is_validation() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

/// JSON body tagged with the scheme fingerprint, both in the payload and in
/// a response header.
fn view(fingerprint: &str, status: StatusCode, mut body: JsonValue) -> Response {
    if let Some(obj) = body.as_object_mut() {
        obj.insert("fingerprint".into(), json!(fingerprint));
    }
    let mut resp = (status, Json(body)).into_response();
    if let Ok(v) = HeaderValue::from_str(fingerprint) {
        resp.headers_mut()
            .insert(HeaderName::from_static(FINGERPRINT_HEADER), v);
    }
    resp
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SessionError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map_err(ApiError::from)
}

fn parse_cohort(s: &str) -> Result<CohortId, ApiError> {
    s.parse::<CohortId>().map_err(ApiError::from)
}

fn persist(state: &AppState, session: &Session) -> Result<(), SessionError> {
    match state.session_path(session.id()) {
        Some(path) => session.save(path),
        None => Ok(()),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({ "status": "ok" })) }))
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}/schema", get(schema))
        .route("/sessions/{id}/filters/{cohort}", put(put_filter).get(get_filter))
        .route("/sessions/{id}/compare", get(compare))
        .route("/sessions/{id}/aggregate/{cohort}", get(aggregate))
        .route("/sessions/{id}/explanations/{row_id}", get(explanation))
        .route("/sessions/{id}/slice", get(slice))
        .route("/sessions/{id}/config", put(update_config))
        .with_state(state)
}

pub async fn serve(state: AppState, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

fn session_overview(s: &Session) -> JsonValue {
    json!({
        "session_id": s.id(),
        "rows": s.dataset().len(),
        "explained_rows": s.explained_rows().len(),
        "success_rate": s.success_rate(),
        "confusion": confusion_matrix(s.cache()),
        "predictor": s.predictor().name(),
    })
}

async fn create_session(State(state): State<AppState>, Json(spec): Json<SessionSpec>) -> Result<Response, ApiError> {
    let writer = state.clone();
    let session = blocking(move || {
        let session = Session::create(&spec)?;
        persist(&writer, &session)?;
        Ok(session)
    })
    .await?;
    info!(
        id = session.id(),
        fingerprint = session.fingerprint(),
        "created session"
    );
    let resp = view(session.fingerprint(), StatusCode::CREATED, session_overview(&session));
    state
        .sessions
        .write()
        .expect("session table poisoned")
        .insert(session.id().to_string(), Arc::new(SessionSlot::new(session)));
    Ok(resp)
}

async fn list_sessions(State(state): State<AppState>) -> Json<JsonValue> {
    let table = state.sessions.read().expect("session table poisoned");
    let mut ids: Vec<JsonValue> = table
        .iter()
        .map(|(id, slot)| json!({ "session_id": id, "fingerprint": slot.snapshot().fingerprint() }))
        .collect();
    ids.sort_by(|a, b| a["session_id"].as_str().cmp(&b["session_id"].as_str()));
    Json(json!({ "sessions": ids }))
}

async fn schema(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let s = state.slot(&id)?.snapshot();
    Ok(view(s.fingerprint(), StatusCode::OK, s.schema_view()))
}

fn cohort_view(s: &Session, cohort: CohortId) -> Result<JsonValue, SessionError> {
    let (rows, summary) = s.cohort_summary(cohort)?;
    Ok(json!({
        "cohort": cohort.to_string(),
        "filter": s.filter(cohort),
        "row_ids": rows,
        "summary": summary,
    }))
}

async fn get_filter(
    State(state): State<AppState>,
    Path((id, cohort)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let cohort = parse_cohort(&cohort)?;
    let s = state.slot(&id)?.snapshot();
    let body = blocking({
        let s = s.clone();
        move || cohort_view(&s, cohort)
    })
    .await?;
    Ok(view(s.fingerprint(), StatusCode::OK, body))
}

async fn put_filter(
    State(state): State<AppState>,
    Path((id, cohort)): Path<(String, String)>,
    Json(filter): Json<FilterSet>,
) -> Result<Response, ApiError> {
    let cohort = parse_cohort(&cohort)?;
    let slot = state.slot(&id)?;
    let _guard = slot.writer.lock().await;
    let current = slot.snapshot();
    let writer = state.clone();
    let (next, body) = blocking(move || {
        let mut next = (*current).clone();
        next.set_filter(cohort, filter)?;
        let body = cohort_view(&next, cohort)?;
        persist(&writer, &next)?;
        Ok((next, body))
    })
    .await?;
    let resp = view(next.fingerprint(), StatusCode::OK, body);
    slot.replace(next);
    Ok(resp)
}

#[derive(Debug, Deserialize)]
struct CompareQuery {
    sort: Option<String>,
}

async fn compare(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<CompareQuery>,
) -> Result<Response, ApiError> {
    let sort = match q.sort.as_deref() {
        None => SortKey::default(),
        Some(s) => s.parse::<SortKey>().map_err(ApiError::bad_request)?,
    };
    let s = state.slot(&id)?.snapshot();
    let comparison = blocking({
        let s = s.clone();
        move || s.compare(sort)
    })
    .await?;
    let mut body = serde_json::to_value(&comparison).map_err(|e| ApiError::internal(e.to_string()))?;
    let names: Vec<&str> = s.dataset().schema().iter().map(|f| f.name.as_str()).collect();
    body["order_names"] = json!(comparison.order.iter().map(|&i| names[i]).collect::<Vec<_>>());
    Ok(view(s.fingerprint(), StatusCode::OK, body))
}

async fn aggregate(
    State(state): State<AppState>,
    Path((id, cohort)): Path<(String, String)>,
) -> Result<Response, ApiError> {
    let cohort = parse_cohort(&cohort)?;
    let s = state.slot(&id)?.snapshot();
    let body = blocking({
        let s = s.clone();
        move || {
            let agg = s.aggregate(cohort)?;
            let mut body = agg.to_json(s.dataset().schema());
            body["cohort"] = json!(cohort.to_string());
            body["explained"] = json!(agg.explained());
            Ok(body)
        }
    })
    .await?;
    Ok(view(s.fingerprint(), StatusCode::OK, body))
}

async fn explanation(
    State(state): State<AppState>,
    Path((id, row_id)): Path<(String, usize)>,
) -> Result<Response, ApiError> {
    let s = state.slot(&id)?.snapshot();
    let e = s.explanation(row_id)?;
    let original = &s.dataset().rows()[row_id].values;
    let counterfactual = e.apply_to(original);
    let schema = s.dataset().schema();
    let render = |values: &[cfscope_core::Value]| -> Vec<JsonValue> {
        values
            .iter()
            .enumerate()
            .map(|(f, v)| s.dataset().value_json(f, v))
            .collect()
    };
    let body = json!({
        "explanation": explanation_record(schema, e),
        "original": render(original),
        "counterfactual": render(&counterfactual),
        "changed_features": e.changes.iter().map(|c| c.feature()).collect::<Vec<_>>(),
    });
    Ok(view(s.fingerprint(), StatusCode::OK, body))
}

#[derive(Debug, Deserialize)]
struct SliceQuery {
    cohort: String,
    /// Feature index or name.
    feature: String,
    bin: usize,
}

async fn slice(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SliceQuery>,
) -> Result<Response, ApiError> {
    let cohort = parse_cohort(&q.cohort)?;
    let s = state.slot(&id)?.snapshot();
    let feature = q
        .feature
        .parse::<usize>()
        .ok()
        .filter(|&f| f < s.dataset().n_features())
        .or_else(|| s.dataset().feature_index(&q.feature))
        .ok_or_else(|| ApiError::bad_request(format!("unknown feature `{}`", q.feature)))?;
    let body = blocking({
        let s = s.clone();
        move || {
            let rows = s.slice(cohort, feature, q.bin)?;
            let bounds = s.scheme().bin_bounds(q.bin, feature).ok();
            let rows: Vec<JsonValue> = rows
                .iter()
                .map(|r| {
                    json!({
                        "row_id": r.row_id,
                        "values": r.values.iter().enumerate().map(|(f, v)| s.dataset().value_json(f, v)).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(json!({
                "cohort": cohort.to_string(),
                "feature": s.dataset().feature(feature).name,
                "feature_index": feature,
                "bin": q.bin,
                "bounds": bounds,
                "rows": rows,
            }))
        }
    })
    .await?;
    Ok(view(s.fingerprint(), StatusCode::OK, body))
}

async fn update_config(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(update): Json<ConfigUpdate>,
) -> Result<Response, ApiError> {
    let slot = state.slot(&id)?;
    let _guard = slot.writer.lock().await;
    let current = slot.snapshot();
    let writer = state.clone();
    let (next, report) = blocking(move || {
        let mut next = (*current).clone();
        let report = next.update_config(&update)?;
        if report.regenerated {
            persist(&writer, &next)?;
        }
        Ok((next, report))
    })
    .await?;
    info!(
        id = next.id(),
        fingerprint = next.fingerprint(),
        regenerated = report.regenerated,
        "config updated"
    );
    let body = serde_json::to_value(&report).map_err(|e| ApiError::internal(e.to_string()))?;
    let resp = view(next.fingerprint(), StatusCode::OK, body);
    slot.replace(next);
    Ok(resp)
}

/// Path of a session document inside a session directory.
pub fn session_file(dir: &FsPath, id: &str) -> PathBuf {
    dir.join(format!("{id}.json"))
}
