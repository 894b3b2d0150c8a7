use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Redirect, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use metaforge::ecore::{parse_ecore, EcoreDocument, EcoreOptions};
use metaforge::evaluation::{compare_in_context, ComparisonReport};
use metaforge::pipeline::{IterationSummary, Session, Step};
use metaforge::Metamodel;
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::store::SessionSlot;
use crate::AppState;

/// Session used by the id-less endpoints.
pub const DEFAULT_SESSION: &str = "default";

const XML: &str = "application/xml; charset=utf-8";
const TEXT: &str = "text/plain; charset=utf-8";

pub fn api_routes() -> Router<Arc<AppState>> {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info))
        .route("/sessions/{id}/updateMetamodel", post(update_session))
        .route("/sessions/{id}/metamodel", get(session_metamodel))
        .route("/sessions/{id}/history", get(session_history))
        .route("/evaluate", post(evaluate))
        .route("/updateMetamodel", post(update_default))
        .route("/getCurrentMetamodel", get(current_default))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionInfo {
    pub id: String,
    pub created_at: u64,
    pub history: Vec<IterationSummary>,
}

impl From<&Session> for SessionInfo {
    fn from(s: &Session) -> Self {
        SessionInfo {
            id: s.id.clone(),
            created_at: s.created_at,
            history: s.summaries(),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct UpdateRequest {
    pub requirements: String,
    #[serde(default = "default_step")]
    pub step: Step,
}

fn default_step() -> Step {
    Step::Update
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UpdateResponse {
    pub ecore: String,
    pub warnings: Vec<String>,
    pub record: IterationSummary,
}

#[derive(Debug, Deserialize)]
pub struct FormatQuery {
    pub format: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluateRequest {
    pub candidate_ecore: String,
    pub reference_ecore: String,
    #[serde(default)]
    pub context_ecore: Option<String>,
}

async fn slot(state: &AppState, id: &str) -> Result<Arc<SessionSlot>, ApiError> {
    state.store.get(id).await.ok_or_else(|| ApiError::not_found(id))
}

async fn create_session(State(state): State<Arc<AppState>>) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let slot = state.store.create(state.pipeline.seed()).await?;
    let info = SessionInfo::from(&*slot.state.read().await);
    Ok((StatusCode::CREATED, Json(info)))
}

async fn session_info(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionInfo>, ApiError> {
    let slot = slot(&state, &id).await?;
    let info = SessionInfo::from(&*slot.state.read().await);
    Ok(Json(info))
}

/// Runs one iteration off the async runtime and commits it. Mutations of one
/// session are serialized; the session is only replaced once the snapshot
/// is on disk, so a failure at any point leaves it untouched.
async fn apply_update(state: &Arc<AppState>, slot: &SessionSlot, request: UpdateRequest) -> Result<Session, ApiError> {
    let _serialized = slot.update.lock().await;
    let mut working = slot.state.read().await.clone();
    let pipeline = state.pipeline.clone();
    let updated = tokio::task::spawn_blocking(move || {
        working.apply(&pipeline, &request.requirements, request.step)?;
        Ok::<_, ApiError>(working)
    })
    .await
    .map_err(|e| ApiError::internal(format!("update task failed: {e}")))??;
    state.store.persist(&updated)?;
    *slot.state.write().await = updated.clone();
    Ok(updated)
}

fn update_response(session: &Session) -> UpdateResponse {
    let record = session.history.last().expect("history is never empty").summary();
    UpdateResponse {
        ecore: session.ecore().raw_xml,
        warnings: record.warnings.clone(),
        record,
    }
}

async fn update_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(request): Json<UpdateRequest>,
) -> Result<Json<UpdateResponse>, ApiError> {
    let slot = slot(&state, &id).await?;
    let session = apply_update(&state, &slot, request).await?;
    Ok(Json(update_response(&session)))
}

fn render(metamodel: &Metamodel, format: Option<&str>, default: &str, state: &AppState) -> Result<Response, ApiError> {
    let valid = "valid metamodel";
    match format.unwrap_or(default) {
        "ecore" | "xml" => {
            let doc = metaforge::ecore::emit_ecore(metamodel).expect(valid);
            Ok(([(header::CONTENT_TYPE, XML)], doc.raw_xml).into_response())
        }
        "puml" | "plantuml" => {
            let doc = metaforge::plantuml::emit_puml(metamodel).expect(valid);
            Ok(([(header::CONTENT_TYPE, TEXT)], doc.raw_text).into_response())
        }
        "png" => {
            let Some(server) = &state.plantuml_server else {
                return Err(ApiError::new(
                    StatusCode::NOT_IMPLEMENTED,
                    "no-renderer",
                    "PNG output needs MF_PLANTUML_SERVER; use format=puml and render client-side",
                ));
            };
            let doc = metaforge::plantuml::emit_puml(metamodel).expect(valid);
            let url = format!("{server}/png/~h{}", hex::encode(doc.raw_text.as_bytes()));
            Ok(Redirect::temporary(&url).into_response())
        }
        other => Err(ApiError::bad_request(format!("unknown format `{other}` (expected ecore, puml or png)"))),
    }
}

async fn session_metamodel(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<FormatQuery>,
) -> Result<Response, ApiError> {
    let slot = slot(&state, &id).await?;
    let current = slot.state.read().await.current.clone();
    render(&current, query.format.as_deref(), "ecore", &state)
}

async fn session_history(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<Vec<IterationSummary>>, ApiError> {
    let slot = slot(&state, &id).await?;
    let history = slot.state.read().await.summaries();
    Ok(Json(history))
}

fn parse_input(name: &str, xml: &str) -> Result<Metamodel, ApiError> {
    parse_ecore(&EcoreDocument::new(xml), &EcoreOptions::default())
        .map(|p| p.metamodel)
        .map_err(|e| {
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid-input", format!("{name}: {}", e.diagnostics().join("; ")))
        })
}

async fn evaluate(Json(request): Json<EvaluateRequest>) -> Result<Json<ComparisonReport>, ApiError> {
    let candidate = parse_input("candidateEcore", &request.candidate_ecore)?;
    let reference = parse_input("referenceEcore", &request.reference_ecore)?;
    let context = request.context_ecore.as_deref().map(|c| parse_input("contextEcore", c)).transpose()?;
    Ok(Json(compare_in_context(&candidate, &reference, context.as_ref())))
}

/// `POST /updateMetamodel`: the body is either JSON `{requirements, step}`
/// or the requirements as plain text. Answers with the Ecore document.
async fn update_default(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Result<Response, ApiError> {
    let is_json = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("application/json"));
    let request = if is_json {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))?
    } else {
        let text = String::from_utf8(body.to_vec()).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
        UpdateRequest {
            requirements: text,
            step: Step::Update,
        }
    };
    let slot = state.store.get_or_create(DEFAULT_SESSION, state.pipeline.seed()).await?;
    let session = apply_update(&state, &slot, request).await?;
    let response = update_response(&session);
    let mut out = ([(header::CONTENT_TYPE, XML)], response.ecore).into_response();
    let count = HeaderValue::from(response.warnings.len());
    out.headers_mut().insert("x-metaforge-warnings", count);
    Ok(out)
}

/// `GET /getCurrentMetamodel`: PlantUML by default, for rendering.
async fn current_default(State(state): State<Arc<AppState>>, Query(query): Query<FormatQuery>) -> Result<Response, ApiError> {
    let slot = state.store.get_or_create(DEFAULT_SESSION, state.pipeline.seed()).await?;
    let current = slot.state.read().await.current.clone();
    render(&current, query.format.as_deref(), "puml", &state)
}
