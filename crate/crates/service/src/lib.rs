//! HTTP service around the metamodel construction pipeline.
//!
//! Sessions hold a metamodel and its iteration history. Besides the session
//! API, `POST /updateMetamodel` and `GET /getCurrentMetamodel` operate on a
//! session named `default`.

mod config;
mod error;
mod routes;
mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::http::HeaderValue;
use axum::Router;
use metaforge::llm::{ChatBackend, LlmError};
use metaforge::pipeline::Pipeline;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

pub use config::{ConfigError, ServiceConfig, DEFAULT_PORT};
pub use error::{ApiError, ErrorBody};
pub use routes::{EvaluateRequest, SessionInfo, UpdateRequest, UpdateResponse, DEFAULT_SESSION};
pub use store::{SessionSlot, SessionStore, StoreError};

pub struct AppState {
    pub pipeline: Arc<Pipeline>,
    pub store: SessionStore,
    pub plantuml_server: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Backend(#[from] LlmError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl AppState {
    /// State with the backend described by `config`.
    pub fn from_config(config: &ServiceConfig) -> Result<Self, ServiceError> {
        let backend: Arc<dyn ChatBackend> = Arc::from(config.backend.build()?);
        Self::with_backend(config, backend)
    }

    pub fn with_backend(config: &ServiceConfig, backend: Arc<dyn ChatBackend>) -> Result<Self, ServiceError> {
        Ok(AppState {
            pipeline: Arc::new(Pipeline::new(backend, config.pipeline.clone())),
            store: SessionStore::open(config.data_dir.clone())?,
            plantuml_server: config.plantuml_server.clone(),
        })
    }
}

/// The full application: API routes, CORS and the optional static UI.
pub fn router(state: AppState, config: &ServiceConfig) -> Router {
    let origin = match config.cors_origin.as_deref().and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods(tower_http::cors::Any)
        .allow_headers(tower_http::cors::Any);
    let mut app = routes::api_routes().with_state(Arc::new(state));
    if let Some(dir) = &config.ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app.layer(cors)
}

/// Binds `0.0.0.0:<port>` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = AppState::from_config(&config)?;
    let app = router(state, &config);
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
