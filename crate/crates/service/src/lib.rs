//! JSON-over-HTTP access to a trained model: encode, decode, interpolate,
//! sample, metrics, exemplars and MIDI export.
//!
//! Pianorolls travel as arrays of timesteps, each `[drums, bass, guitar,
//! strings]` tokens. Model work runs on the blocking pool against an
//! immutable [`Session`].

mod error;
mod routes;
mod session;
mod wire;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::http::{HeaderValue, Method};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::{Any, CorsLayer};

pub use error::ApiError;
pub use routes::{DEFAULT_EXEMPLAR_LIMIT, MAX_SAMPLE_COUNT};
pub use session::{Session, SessionError};

/// CORS for the editor UI: one origin when given, any origin otherwise.
pub fn cors(origin: Option<&str>) -> Result<CorsLayer, String> {
    let layer = CorsLayer::new().allow_methods([Method::GET, Method::POST]).allow_headers(Any);
    Ok(match origin {
        Some(o) => layer.allow_origin(HeaderValue::from_str(o).map_err(|e| format!("bad CORS origin {o:?}: {e}"))?),
        None => layer.allow_origin(Any),
    })
}

pub fn router(session: Arc<Session>, cors: CorsLayer) -> Router {
    Router::new()
        .route("/health", get(routes::health))
        .route("/genres", get(routes::genres))
        .route("/exemplars", get(routes::exemplars))
        .route("/encode", post(routes::encode))
        .route("/decode", post(routes::decode))
        .route("/interpolate", post(routes::interpolate))
        .route("/sample", post(routes::sample))
        .route("/metrics", post(routes::metrics))
        .route("/export", post(routes::export))
        .with_state(session)
        .layer(cors)
}

pub async fn serve(session: Arc<Session>, addr: SocketAddr, cors: CorsLayer) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(session, cors)).await
}
