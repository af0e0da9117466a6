//! WebSocket endpoint: one text frame per message, one engine for all
//! connections.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc};
use tokio_tungstenite::tungstenite::Message;

use crate::gateway::Gateway;

struct Shared {
    gateway: Mutex<Gateway>,
    fanout: broadcast::Sender<String>,
}

/// Accepts connections on `listener` until the task is dropped.
pub async fn serve(listener: TcpListener, gateway: Gateway) -> std::io::Result<()> {
    let (fanout, _) = broadcast::channel(1024);
    let shared = Arc::new(Shared {
        gateway: Mutex::new(gateway),
        fanout,
    });
    loop {
        let (stream, peer) = listener.accept().await?;
        let shared = shared.clone();
        tokio::spawn(async move {
            if let Err(e) = connection(shared, stream, peer).await {
                log::warn!("{peer}: {e}");
            }
        });
    }
}

async fn connection(shared: Arc<Shared>, stream: TcpStream, peer: SocketAddr) -> anyhow::Result<()> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();
    let session = shared.gateway.lock().expect("gateway lock").open_session();
    let mut fanout = shared.fanout.subscribe();
    log::info!("{peer}: session {session} open");

    // Direct replies and broadcasts share one writer so each session sees
    // messages in engine order.
    let (direct_tx, mut direct_rx) = mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                Some(text) = direct_rx.recv() => text,
                msg = fanout.recv() => match msg {
                    Ok(text) => text,
                    Err(broadcast::error::RecvError::Lagged(n)) => {
                        log::warn!("session {session} dropped {n} broadcasts");
                        continue;
                    }
                    Err(broadcast::error::RecvError::Closed) => break,
                },
                else => break,
            };
            if sink.send(Message::text(text)).await.is_err() {
                break;
            }
        }
    });

    while let Some(frame) = source.next().await {
        let text = match frame? {
            Message::Text(text) => text.to_string(),
            Message::Close(_) => break,
            _ => continue,
        };
        let mut gateway = shared.gateway.lock().expect("gateway lock");
        let outcome = gateway.handle_text(session, &text);
        for msg in outcome.replies {
            let _ = direct_tx.send(msg.to_json());
        }
        for msg in outcome.broadcast {
            let _ = shared.fanout.send(msg.to_json());
        }
    }

    shared.gateway.lock().expect("gateway lock").close_session(session);
    writer.abort();
    log::info!("{peer}: session {session} closed");
    Ok(())
}
