//! WebSocket front end: one [`Session`] per connection.

use std::future::pending;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::time::{interval, Interval, MissedTickBehavior};
use tokio_tungstenite::tungstenite::Message;

use crate::protocol::{encode, ErrorCode, ServerMessage};
use crate::session::{Session, SessionConfig};

pub const DEFAULT_BIND: &str = "127.0.0.1:8765";

/// Accepts connections until the listener fails.
pub async fn serve(listener: TcpListener, config: SessionConfig) -> std::io::Result<()> {
    let config = Arc::new(config);
    let counter = AtomicU64::new(1);
    loop {
        let (stream, peer) = listener.accept().await?;
        let id = format!("s{}", counter.fetch_add(1, Ordering::Relaxed));
        let config = Arc::clone(&config);
        tokio::spawn(async move {
            if let Err(e) = connection(stream, id.clone(), (*config).clone()).await {
                eprintln!("session {id} ({peer}): {e}");
            }
        });
    }
}

pub async fn bind(addr: &str) -> std::io::Result<(TcpListener, SocketAddr)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((listener, local))
}

fn ticker(rate: f64) -> Interval {
    let mut t = interval(Duration::from_secs_f64(1.0 / rate));
    t.set_missed_tick_behavior(MissedTickBehavior::Delay);
    t
}

async fn next_tick(t: &mut Option<Interval>) {
    match t {
        Some(t) => {
            t.tick().await;
        }
        None => pending().await,
    }
}

async fn connection(
    stream: TcpStream,
    id: String,
    config: SessionConfig,
) -> Result<(), tokio_tungstenite::tungstenite::Error> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut tx, mut rx) = ws.split();
    let mut session = Session::new(id, config);
    let mut clock: Option<Interval> = None;

    loop {
        let out: Vec<ServerMessage> = tokio::select! {
            incoming = rx.next() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let out = session.handle_text(text.as_str());
                    if clock.is_none() && session.is_running() {
                        clock = session.tick_rate().map(ticker);
                    }
                    out
                }
                Some(Ok(Message::Binary(_))) => {
                    session.error(ErrorCode::Malformed, "binary frames are not part of the protocol")
                }
                Some(Ok(Message::Close(_))) | None => break,
                Some(Ok(_)) => Vec::new(),
                Some(Err(e)) => return Err(e),
            },
            _ = next_tick(&mut clock), if session.is_running() => session.tick(),
        };
        for msg in &out {
            tx.feed(Message::text(encode(msg))).await?;
        }
        if !out.is_empty() {
            tx.flush().await?;
        }
        if !session.is_running() && clock.is_some() {
            clock = None;
        }
    }
    Ok(())
}
