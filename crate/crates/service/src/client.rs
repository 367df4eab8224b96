//! Minimal client used to replay recorded sample streams through a running
//! service.

use futures_util::{SinkExt, StreamExt};
use lattice_core::engine::GazeSample;
use tokio_tungstenite::tungstenite::Message;

use crate::protocol::{ClientMessage, ServerMessage};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    WebSocket(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("bad server frame: {0}")]
    Decode(#[from] serde_json::Error),
    #[error("connection closed before all replies arrived")]
    Closed,
}

/// Opens a connection, sends `setup` messages, then streams `samples`
/// while collecting replies. Returns every server message in order; the
/// stream is considered complete once one `State` per sample has arrived.
pub async fn replay(
    url: &str,
    setup: &[ClientMessage],
    samples: &[GazeSample<f64>],
) -> Result<Vec<ServerMessage>, ClientError> {
    let (ws, _) = tokio_tungstenite::connect_async(url).await?;
    let (mut tx, mut rx) = ws.split();
    let mut frames: Vec<String> = setup.iter().map(|m| serde_json::to_string(m).expect("serialise")).collect();
    frames.extend(samples.iter().map(|s| {
        serde_json::to_string(&ClientMessage::Sample { t: s.t, x: s.p.x, y: s.p.y, valid: s.valid }).expect("serialise")
    }));
    let sender = tokio::spawn(async move {
        for f in frames {
            tx.feed(Message::Text(f.into())).await?;
        }
        tx.flush().await?;
        Ok::<_, tokio_tungstenite::tungstenite::Error>(tx)
    });
    let mut out = Vec::new();
    let mut states = 0;
    while states < samples.len() {
        match rx.next().await {
            Some(Ok(Message::Text(text))) => {
                let m: ServerMessage = serde_json::from_str(text.as_str())?;
                if matches!(m, ServerMessage::State { .. }) {
                    states += 1;
                }
                out.push(m);
            }
            Some(Ok(Message::Close(_))) | None => return Err(ClientError::Closed),
            Some(Ok(_)) => {}
            Some(Err(e)) => return Err(e.into()),
        }
    }
    let mut tx = sender.await.expect("sender task")?;
    let _ = tx.send(Message::Close(None)).await;
    Ok(out)
}
