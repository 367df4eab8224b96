//! WebSocket service hosting live decoder sessions.
//!
//! Each connection to `/session` owns one decoder session and one task-flow
//! state machine ([`task::Connection`]). Messages are processed strictly in
//! arrival order and every reply is flushed before the next frame is read.

pub mod client;
pub mod protocol;
pub mod task;

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use tokio::net::TcpListener;

pub use protocol::{ClientMessage, ErrorCode, ServerMessage, PROTOCOL_VERSION};
pub use task::{Connection, ServiceConfig};

struct Shared {
    config: ServiceConfig,
    connections: AtomicU64,
}

pub fn router(config: ServiceConfig) -> Router {
    let shared = Arc::new(Shared { config, connections: AtomicU64::new(0) });
    Router::new().route("/session", get(upgrade)).with_state(shared)
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> impl IntoResponse {
    let id = shared.connections.fetch_add(1, Ordering::Relaxed);
    let connection = Connection::new(shared.config.clone(), lattice_core::seed::derive(shared.config.seed, &[id]));
    ws.on_upgrade(move |socket| run(socket, connection, id))
}

async fn run(socket: WebSocket, mut connection: Connection, id: u64) {
    let (mut tx, mut rx) = socket.split();
    tracing::debug!(connection = id, "session opened");
    while let Some(Ok(frame)) = rx.next().await {
        let reply = match frame {
            Message::Text(text) => connection.handle_text(text.as_str()),
            Message::Binary(_) => {
                let mut r = connection.handle_text("\u{0}");
                r.close = true;
                r
            }
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => continue,
        };
        for m in &reply.messages {
            let text = serde_json::to_string(m).expect("server messages serialise");
            if tx.feed(Message::Text(text.into())).await.is_err() {
                return;
            }
        }
        if tx.flush().await.is_err() {
            return;
        }
        if reply.close {
            let _ = tx.send(Message::Close(None)).await;
            break;
        }
    }
    tracing::debug!(connection = id, "session closed");
}

/// Serves on an already bound listener until the task is cancelled.
pub async fn serve(listener: TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config)).await
}

/// Binds `addr` and serves in the background; returns the bound address.
pub async fn spawn(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<(SocketAddr, tokio::task::JoinHandle<()>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        if let Err(e) = serve(listener, config).await {
            tracing::error!("service stopped: {e}");
        }
    });
    Ok((local, handle))
}
