//! HTTP routes.
//!
//! ```text
//! POST /classify            {"text"}                          -> 200 {label, scores, elapsed_us}
//! POST /messages            {"sender", "recipient", "body"}   -> 201 {id, status, score}
//! GET  /inbox/{user}?since=ID                                 -> 200 {messages}
//! GET  /outbox/{user}?since=ID                                -> 200 {messages}
//! GET  /health                                                -> 200 {status, model_variant, vocab_size, format_version}
//! ```
//!
//! Errors are JSON `{"error": ...}`: 400 for malformed input, 404 for
//! unknown routes, 503 while no model is loaded.

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use crate::screen::{ModelInfo, Screen};
use crate::store::{Message, MessageId, MessageStore, Status, Verdict};

#[derive(Clone)]
pub struct AppState {
    pub screen: Option<Arc<dyn Screen>>,
    pub store: Arc<MessageStore>,
}

impl AppState {
    pub fn new(screen: Option<Arc<dyn Screen>>, store: MessageStore) -> Self {
        AppState {
            screen,
            store: Arc::new(store),
        }
    }
}

#[derive(Debug)]
pub enum ApiError {
    BadRequest(String),
    NotFound,
    MethodNotAllowed,
    NoModel,
    Internal(String),
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, message) = match self {
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, m),
            ApiError::NotFound => (StatusCode::NOT_FOUND, "no such route".to_string()),
            ApiError::MethodNotAllowed => (StatusCode::METHOD_NOT_ALLOWED, "method not allowed".to_string()),
            ApiError::NoModel => (StatusCode::SERVICE_UNAVAILABLE, "no model loaded".to_string()),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, m),
        };
        (status, Json(json!({ "error": message }))).into_response()
    }
}

/// Any body that is not valid JSON of the expected shape is a 400,
/// regardless of content type.
fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("invalid request body: {e}")))
}

fn required(field: &str, value: Option<String>) -> Result<String, ApiError> {
    match value {
        Some(v) if !v.trim().is_empty() => Ok(v),
        Some(_) => Err(ApiError::BadRequest(format!("field `{field}` must not be empty"))),
        None => Err(ApiError::BadRequest(format!("missing field `{field}`"))),
    }
}

#[derive(Deserialize)]
struct ClassifyRequest {
    text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyResponse {
    pub label: u8,
    pub scores: [f64; 2],
    pub elapsed_us: u64,
}

async fn classify(State(state): State<AppState>, body: Bytes) -> Result<Json<ClassifyResponse>, ApiError> {
    let request: ClassifyRequest = parse_body(&body)?;
    let text = request
        .text
        .ok_or_else(|| ApiError::BadRequest("missing field `text`".into()))?;
    let screen = state.screen.as_ref().ok_or(ApiError::NoModel)?;
    let out = screen.screen(&text);
    Ok(Json(ClassifyResponse {
        label: out.label.index() as u8,
        scores: out.scores,
        elapsed_us: out.elapsed_us,
    }))
}

#[derive(Deserialize)]
struct SendRequest {
    sender: Option<String>,
    recipient: Option<String>,
    body: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SendResponse {
    pub id: MessageId,
    pub status: Status,
    pub score: f64,
}

async fn send_message(State(state): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<SendResponse>), ApiError> {
    let request: SendRequest = parse_body(&body)?;
    let sender = required("sender", request.sender)?;
    let recipient = required("recipient", request.recipient)?;
    let text = required("body", request.body)?;
    let screen = state.screen.as_ref().ok_or(ApiError::NoModel)?;
    // classified once, outside the store lock; the verdict is final
    let out = screen.screen(&text);
    let verdict = Verdict {
        blocked: out.label == sentinel_core::Label::Bullying,
        score: out.score,
        classify_elapsed_us: out.elapsed_us,
    };
    let message = state
        .store
        .append(&sender, &recipient, &text, verdict)
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok((
        StatusCode::CREATED,
        Json(SendResponse {
            id: message.id,
            status: message.status,
            score: message.score,
        }),
    ))
}

#[derive(Deserialize)]
struct SinceQuery {
    since: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageList {
    pub messages: Vec<Message>,
}

fn cursor(query: SinceQuery) -> Result<Option<MessageId>, ApiError> {
    query
        .since
        .map(|s| MessageId::parse(&s).ok_or_else(|| ApiError::BadRequest(format!("invalid since cursor {s:?}"))))
        .transpose()
}

async fn inbox(
    State(state): State<AppState>,
    Path(user): Path<String>,
    Query(query): Query<SinceQuery>,
) -> Result<Json<MessageList>, ApiError> {
    let since = cursor(query)?;
    Ok(Json(MessageList {
        messages: state.store.inbox(&user, since),
    }))
}

async fn outbox(
    State(state): State<AppState>,
    Path(user): Path<String>,
    Query(query): Query<SinceQuery>,
) -> Result<Json<MessageList>, ApiError> {
    let since = cursor(query)?;
    Ok(Json(MessageList {
        messages: state.store.outbox(&user, since),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model_variant: Option<String>,
    pub vocab_size: Option<usize>,
    pub format_version: Option<u32>,
}

async fn health(State(state): State<AppState>) -> Json<Health> {
    Json(match state.screen.as_ref().map(|s| s.info()) {
        Some(ModelInfo {
            model_variant,
            vocab_size,
            format_version,
        }) => Health {
            status: "ok".into(),
            model_variant: Some(model_variant),
            vocab_size: Some(vocab_size),
            format_version: Some(format_version),
        },
        None => Health {
            status: "degraded".into(),
            model_variant: None,
            vocab_size: None,
            format_version: None,
        },
    })
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/classify", post(classify))
        .route("/messages", post(send_message))
        .route("/inbox/{user}", get(inbox))
        .route("/outbox/{user}", get(outbox))
        .route("/health", get(health))
        .fallback(|| async { ApiError::NotFound })
        .method_not_allowed_fallback(|| async { ApiError::MethodNotAllowed })
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state)).with_graceful_shutdown(shutdown).await
}
