//! The Telebrain stage server.
//!
//! HTTP serves the live performance list and content blobs; the
//! `/perform` WebSocket carries wire frames; a UDP socket takes inbound
//! OSC. Each live performance runs its own event loop.

mod actor;
mod conn;
mod error;
mod hub;

pub use conn::MAX_BAD_FRAMES;
pub use error::ServerError;
pub use hub::{Hub, HubOptions};

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, State, WebSocketUpgrade};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use telebrain_core::audio::HttpTts;
use telebrain_core::config::ServerConfig;
use telebrain_core::osc;
use telebrain_core::store::{ContentStore, StoreError};
use telebrain_core::timing::SystemClock;
use tokio::net::{TcpListener, UdpSocket};

/// Routes: `GET /performances`, `GET /blob/{id}`, `GET /perform` (upgrade).
pub fn router(hub: Arc<Hub>) -> Router {
    Router::new()
        .route("/performances", get(performances))
        .route("/blob/:id", get(blob))
        .route("/perform", get(perform))
        .with_state(hub)
}

async fn performances(State(hub): State<Arc<Hub>>) -> impl IntoResponse {
    Json(hub.summaries())
}

async fn blob(State(hub): State<Arc<Hub>>, Path(id): Path<String>) -> Response {
    let found = tokio::task::spawn_blocking(move || hub.store().blob(&id)).await;
    match found {
        Ok(Ok(bytes)) => (
            [
                (header::CONTENT_TYPE, sniff_mime(&bytes)),
                // Blob ids are content hashes.
                (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
            ],
            bytes,
        )
            .into_response(),
        Ok(Err(StoreError::MissingBlob(id))) => (StatusCode::NOT_FOUND, format!("no blob {id}")).into_response(),
        Ok(Err(e)) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

async fn perform(State(hub): State<Arc<Hub>>, ws: WebSocketUpgrade) -> Response {
    ws.on_upgrade(move |socket| conn::run(socket, hub))
}

/// Blobs are stored without metadata; the media kinds the store writes are
/// recognisable by their leading bytes.
fn sniff_mime(bytes: &[u8]) -> &'static str {
    match bytes {
        [b'R', b'I', b'F', b'F', _, _, _, _, b'W', b'A', b'V', b'E', ..] => "audio/wav",
        [0x89, b'P', b'N', b'G', ..] => "image/png",
        [0xFF, 0xD8, 0xFF, ..] => "image/jpeg",
        [b'G', b'I', b'F', b'8', ..] => "image/gif",
        [b'R', b'I', b'F', b'F', _, _, _, _, b'W', b'E', b'B', b'P', ..] => "image/webp",
        [b'I', b'D', b'3', ..] | [0xFF, 0xFB | 0xF3 | 0xF2, ..] => "audio/mpeg",
        _ => "application/octet-stream",
    }
}

/// Decodes datagrams from `socket` and offers them to every performance.
/// Undecodable datagrams are logged and dropped.
pub async fn osc_listener(socket: UdpSocket, hub: Arc<Hub>) {
    let mut buf = vec![0u8; 65_536];
    loop {
        let (n, from) = match socket.recv_from(&mut buf).await {
            Ok(r) => r,
            Err(e) => {
                log::warn!("osc receive failed: {e}");
                continue;
            }
        };
        match osc::decode(&buf[..n]) {
            Ok(msg) => hub.osc_inbound(&msg),
            Err(e) => log::warn!("dropped osc datagram from {from}: {e}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot open store: {0}")]
    Store(#[from] StoreError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("server failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Builds a hub from `config` with the system clock.
pub fn hub_from_config(config: &ServerConfig) -> Result<Arc<Hub>, StoreError> {
    let mut store = ContentStore::open(&config.data_dir)?;
    if let Some(tts) = &config.tts {
        store = store.with_tts(Arc::new(HttpTts::new(tts.clone())));
    }
    let options = HubOptions {
        rng_seed: config.rng_seed,
        delay_budget_ms: config.delay_budget_ms,
        timezone: config.timezone_offset(),
        osc_send_port: config.osc.default_send_port,
    };
    Ok(Hub::new(Arc::new(store), Arc::new(SystemClock::new()), options))
}

/// Runs the server until the process ends.
pub async fn serve(config: ServerConfig) -> Result<(), ServeError> {
    let hub = hub_from_config(&config)?;
    let http = SocketAddr::from(([0, 0, 0, 0], config.http_port));
    let udp = SocketAddr::from(([0, 0, 0, 0], config.osc.listen_port));
    let listener = TcpListener::bind(http)
        .await
        .map_err(|source| ServeError::Bind { addr: http, source })?;
    let socket = UdpSocket::bind(udp)
        .await
        .map_err(|source| ServeError::Bind { addr: udp, source })?;
    log::info!("http on {http}, osc on {udp}, data in {}", config.data_dir.display());
    tokio::spawn(osc_listener(socket, Arc::clone(&hub)));
    axum::serve(listener, router(hub)).await?;
    Ok(())
}
