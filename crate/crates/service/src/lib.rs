//! HTTP/JSON front end for playing the Fibonacci Quilt Game.
//!
//! | method | path | body | response |
//! |--------|------|------|----------|
//! | POST | `/sessions` | `{n, seed?}` | session |
//! | GET | `/sessions/{id}` | | session |
//! | GET | `/sessions/{id}/moves` | | moves |
//! | POST | `/sessions/{id}/moves` | `{move, turn?}` | session |
//! | POST | `/sessions/{id}/engine-move` | `{strategy, turn?}` | engine move |
//! | GET | `/meta/rules` | | rule table |
//! | GET | `/meta/sequence?max=K` | | sequence terms |
//! | GET | `/meta/schema` | | the payload schema |
//!
//! Payload field names are fixed by `api-schema.json` in this crate.

mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fibquilt::engine::R3F_ERRATUM;
use fibquilt::{QuiltSequence, Rule};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use store::{
    ConflictReason, EngineMoveView, MoveView, MovesView, ServiceConfig, SessionError,
    SessionResult, SessionStore, SessionView, Status, Strategy, TermView,
};

/// The JSON Schema document describing every request and response body.
pub const API_SCHEMA: &str = include_str!("../api-schema.json");

impl IntoResponse for SessionError {
    fn into_response(self) -> Response {
        let (status, code, reason) = match &self {
            SessionError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad-request", None),
            SessionError::NotFound(_) => (StatusCode::NOT_FOUND, "not-found", None),
            SessionError::Conflict { reason, .. } => {
                (StatusCode::CONFLICT, "conflict", Some(*reason))
            }
            SessionError::Unavailable(_) => (StatusCode::SERVICE_UNAVAILABLE, "unavailable", None),
            SessionError::Journal(_) | SessionError::Internal(_) => {
                (StatusCode::INTERNAL_SERVER_ERROR, "internal", None)
            }
        };
        let body = ErrorBody {
            error: code,
            reason,
            message: self.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub reason: Option<ConflictReason>,
    pub message: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    n: u64,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    #[serde(rename = "move")]
    mv: String,
    turn: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EngineMoveRequest {
    strategy: Strategy,
    turn: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct SequenceQuery {
    max: Option<usize>,
}

type Shared = Arc<SessionStore>;

pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/moves", get(list_moves).post(play_move))
        .route("/sessions/{id}/engine-move", post(engine_move))
        .route("/meta/rules", get(rules))
        .route("/meta/sequence", get(sequence))
        .route("/meta/schema", get(schema))
        .with_state(store)
}

/// Runs blocking store work off the async executor.
async fn blocking<T, F>(f: F) -> SessionResult<T>
where
    F: FnOnce() -> SessionResult<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| SessionError::Internal(e.to_string()))?
}

async fn create_session(
    State(store): State<Shared>,
    Json(req): Json<CreateRequest>,
) -> SessionResult<(StatusCode, Json<SessionView>)> {
    let view = store.create(req.n, req.seed)?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn get_session(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> SessionResult<Json<SessionView>> {
    store.get(&id).map(Json)
}

async fn list_moves(
    State(store): State<Shared>,
    Path(id): Path<String>,
) -> SessionResult<Json<MovesView>> {
    store.list_moves(&id).map(Json)
}

async fn play_move(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> SessionResult<Json<SessionView>> {
    blocking(move || store.play(&id, &req.mv, req.turn))
        .await
        .map(Json)
}

async fn engine_move(
    State(store): State<Shared>,
    Path(id): Path<String>,
    Json(req): Json<EngineMoveRequest>,
) -> SessionResult<Json<EngineMoveView>> {
    blocking(move || store.engine_move(&id, req.strategy, req.turn))
        .await
        .map(Json)
}

/// The move table, including the corrected R3f variant.
pub fn rules_document() -> serde_json::Value {
    let rules: Vec<_> = Rule::ALL
        .iter()
        .map(|r| {
            json!({
                "tag": r.tag(),
                "rewrite": r.template(),
                "parameter": r.index_range().map(|(lo, hi)| json!({
                    "min": lo,
                    "max": if hi == usize::MAX { None } else { Some(hi) },
                })),
                "variants": if r.has_variants() { vec!["A", "B"] } else { vec![] },
                "reduces_term_count": r.reduces_term_count(),
            })
        })
        .collect();
    json!({ "rules": rules, "erratum": R3F_ERRATUM })
}

async fn rules() -> Json<serde_json::Value> {
    Json(rules_document())
}

async fn sequence(Query(query): Query<SequenceQuery>) -> SessionResult<Json<serde_json::Value>> {
    let max = query.max.unwrap_or(20);
    let seq = QuiltSequence::generate(max).map_err(|e| SessionError::BadRequest(e.to_string()))?;
    let terms: Vec<_> = seq
        .terms()
        .iter()
        .enumerate()
        .map(|(k, v)| json!({ "index": k + 1, "value": v }))
        .collect();
    Ok(Json(json!({ "max_index": max, "terms": terms })))
}

async fn schema() -> Response {
    (
        [(axum::http::header::CONTENT_TYPE, "application/json")],
        API_SCHEMA,
    )
        .into_response()
}

/// Serves the API until the process is stopped.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let store = SessionStore::new(config).map_err(std::io::Error::other)?;
    let recovered = store.recover().map_err(std::io::Error::other)?;
    if recovered > 0 {
        tracing::info!(recovered, "reloaded sessions from journal");
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(store))).await
}
