//! HTTP routes.

use std::collections::HashMap;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use eclosure_core::{Engine, LossFunction, Subset};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::session::{AuditEntry, AuditView, BoundResponse, CreateSession, FinalizeResponse, MembershipResponse, Session, Summary};
use crate::store::{Snapshot, Store};

/// Shared server state.
pub struct AppState {
    store: Store,
    engine: Engine,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(store: Store, engine: Engine) -> Arc<Self> {
        Arc::new(AppState { store, engine, sessions: RwLock::new(HashMap::new()) })
    }

    /// The session `id`, replayed from storage if not yet loaded.
    pub fn session(&self, id: &str) -> ApiResult<Arc<Mutex<Session>>> {
        if let Some(s) = self.sessions.read().get(id) {
            return Ok(s.clone());
        }
        if uuid::Uuid::parse_str(id).is_err() {
            return Err(ApiError::not_found(format!("no session {id}")));
        }
        let Some((snap, entries)) = self.store.load(id)? else {
            return Err(ApiError::not_found(format!("no session {id}")));
        };
        let session = Session::replay(snap.id, snap.config, snap.created_ms, entries, self.engine)?;
        let mut map = self.sessions.write();
        Ok(map.entry(id.to_string()).or_insert_with(|| Arc::new(Mutex::new(session))).clone())
    }

    fn persist(&self, id: &str, entry: &AuditEntry) -> ApiResult<()> {
        Ok(self.store.append(id, entry)?)
    }
}

/// A loss given either by name (`"fdr"`, `"kfwer:2"`) or as a tagged object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LossInput {
    Name(String),
    Spec(LossFunction),
}

impl LossInput {
    fn resolve(self) -> ApiResult<LossFunction> {
        match self {
            LossInput::Name(s) => Ok(s.parse()?),
            LossInput::Spec(l) => Ok(l),
        }
    }
}

fn resolve_loss(l: Option<LossInput>) -> ApiResult<LossFunction> {
    l.map_or(Ok(LossFunction::Fdp), LossInput::resolve)
}

#[derive(Debug, Deserialize)]
pub struct MembershipRequest {
    pub set: Subset,
    #[serde(default)]
    pub loss: Option<LossInput>,
}

#[derive(Debug, Deserialize)]
pub struct SwitchLossRequest {
    pub loss: LossInput,
}

#[derive(Debug, Deserialize)]
pub struct AlphaRequest {
    pub alpha: f64,
}

#[derive(Debug, Deserialize)]
pub struct FinalizeRequest {
    pub set: Subset,
    #[serde(default)]
    pub loss: Option<LossInput>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Deserialize)]
pub struct BoundQuery {
    #[serde(default)]
    pub set: String,
}

#[derive(Debug, Deserialize)]
pub struct AuditQuery {
    #[serde(default)]
    pub certificate: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SessionList {
    pub sessions: Vec<String>,
}

type Body<T> = Result<Json<T>, JsonRejection>;

fn body<T>(b: Body<T>) -> ApiResult<T> {
    b.map(|Json(v)| v).map_err(|e| ApiError::bad_request(e.body_text()))
}

fn parse_set(spec: &str, m: usize) -> ApiResult<Subset> {
    let mut ix = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        ix.push(part.parse::<usize>().map_err(|_| ApiError::bad_request(format!("bad index '{part}'")))?);
    }
    Ok(Subset::from_one_based(&ix, m)?)
}

async fn create(State(st): State<Arc<AppState>>, payload: Body<CreateSession>) -> ApiResult<(StatusCode, Json<Summary>)> {
    let config = body(payload)?;
    let id = uuid::Uuid::new_v4().to_string();
    let (session, entry) = Session::create(id.clone(), config.clone(), st.engine)?;
    let summary = session.summary()?;
    st.store.save_snapshot(&Snapshot { id: id.clone(), created_ms: session.created_ms, config })?;
    st.persist(&id, &entry)?;
    st.sessions.write().insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn list(State(st): State<Arc<AppState>>) -> ApiResult<Json<SessionList>> {
    let mut ids: Vec<String> = st.sessions.read().keys().cloned().collect();
    ids.extend(st.store.list()?);
    ids.sort();
    ids.dedup();
    Ok(Json(SessionList { sessions: ids }))
}

async fn get_session(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Summary>> {
    let s = st.session(&id)?;
    let summary = s.lock().summary()?;
    Ok(Json(summary))
}

async fn membership(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    req: Body<MembershipRequest>,
) -> ApiResult<Json<MembershipResponse>> {
    let req = body(req)?;
    let loss = resolve_loss(req.loss)?;
    let s = st.session(&id)?;
    let mut s = s.lock();
    let (resp, entry) = s.membership(loss, req.set)?;
    st.persist(&id, &entry)?;
    Ok(Json(resp))
}

async fn switch_loss(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    req: Body<SwitchLossRequest>,
) -> ApiResult<Json<MembershipResponse>> {
    let loss = body(req)?.loss.resolve()?;
    let s = st.session(&id)?;
    let mut s = s.lock();
    let (resp, entry) = s.switch_loss(loss)?;
    st.persist(&id, &entry)?;
    Ok(Json(resp))
}

async fn set_alpha(State(st): State<Arc<AppState>>, Path(id): Path<String>, req: Body<AlphaRequest>) -> ApiResult<Json<Summary>> {
    let alpha = body(req)?.alpha;
    let s = st.session(&id)?;
    let mut s = s.lock();
    let (summary, entry) = s.set_alpha(alpha)?;
    st.persist(&id, &entry)?;
    Ok(Json(summary))
}

async fn finalize(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    req: Body<FinalizeRequest>,
) -> ApiResult<Json<FinalizeResponse>> {
    let req = body(req)?;
    let loss = resolve_loss(req.loss)?;
    let s = st.session(&id)?;
    let mut s = s.lock();
    let (resp, entry) = s.finalize(loss, req.set, req.alpha)?;
    st.persist(&id, &entry)?;
    Ok(Json(resp))
}

async fn audit(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<AuditQuery>,
) -> ApiResult<Json<AuditView>> {
    let s = st.session(&id)?;
    let mut view = s.lock().audit()?;
    if let Some(cert) = q.certificate {
        view.entries.retain(|e| e.certificate_id == cert);
        if view.entries.is_empty() {
            return Err(ApiError::not_found(format!("no audit entry with certificate id {cert}")));
        }
    }
    Ok(Json(view))
}

async fn bound(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<BoundQuery>,
) -> ApiResult<Json<BoundResponse>> {
    let s = st.session(&id)?;
    let s = s.lock();
    let set = parse_set(&q.set, s.collection().m())?;
    Ok(Json(s.bound(set)?))
}

/// All routes, with JSON error bodies for unknown paths.
pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/membership", post(membership))
        .route("/sessions/{id}/switch-loss", post(switch_loss))
        .route("/sessions/{id}/alpha", post(set_alpha))
        .route("/sessions/{id}/finalize", post(finalize))
        .route("/sessions/{id}/audit", get(audit))
        .route("/sessions/{id}/bound", get(bound))
        .fallback(|| async { ApiError::not_found("no such route") })
        .with_state(state)
}
