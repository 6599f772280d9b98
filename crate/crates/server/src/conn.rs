//! One `/perform` WebSocket: a reader that validates frames and forwards
//! them to the joined performance, and a writer that stamps outgoing seqs.

use std::sync::Arc;

use axum::extract::ws::{Message as WsMessage, WebSocket};
use futures::{SinkExt, StreamExt};
use telebrain_core::venue::ConnectionId;
use telebrain_core::wire::{self, ClockPong, Frame, Message, SeqCounter, SeqStatus, SeqTracker};
use tokio::sync::{mpsc, oneshot};

use crate::error::ServerError;
use crate::hub::{Command, Hub, Outbox, Outgoing};

/// Consecutive unreadable frames tolerated before the connection is closed.
pub const MAX_BAD_FRAMES: u32 = 16;

pub(crate) async fn run(socket: WebSocket, hub: Arc<Hub>) {
    let conn = hub.connection_id();
    let (mut sink, mut stream) = socket.split();
    let (outbox, mut rx) = mpsc::unbounded_channel::<Outgoing>();

    let writer = tokio::spawn(async move {
        let mut seq = SeqCounter::default();
        while let Some(out) = rx.recv().await {
            let msg = match out {
                Outgoing::Message(msg) => msg,
                Outgoing::Close => break,
            };
            let text = wire::serialize(&Frame::from_message(seq.next(), &msg));
            if sink.send(WsMessage::Text(text)).await.is_err() {
                return;
            }
        }
        let _ = sink.send(WsMessage::Close(None)).await;
    });

    let mut session = Session {
        hub,
        conn,
        outbox,
        joined: None,
        seqs: SeqTracker::new(),
        bad_streak: 0,
    };
    while let Some(Ok(ws)) = stream.next().await {
        let received_at = session.hub.now_ms();
        let result = match ws {
            WsMessage::Text(text) => session.frame(&text, received_at).await,
            WsMessage::Binary(_) => session.report(ServerError::BinaryFrame, None),
            WsMessage::Close(_) => break,
            WsMessage::Ping(_) | WsMessage::Pong(_) => Ok(()),
        };
        if result.is_err() {
            break;
        }
    }
    session.disconnect().await;
    let _ = session.outbox.send(Outgoing::Close);
    let _ = writer.await;
}

struct Session {
    hub: Arc<Hub>,
    conn: ConnectionId,
    outbox: Outbox,
    /// Name of the performance this connection is in.
    joined: Option<String>,
    seqs: SeqTracker,
    bad_streak: u32,
}

/// `Err` means close the connection.
type Flow = Result<(), ()>;

impl Session {
    fn send(&self, msg: Message) {
        let _ = self.outbox.send(Outgoing::Message(msg));
    }

    fn report(&mut self, e: ServerError, in_reply_to: Option<u64>) -> Flow {
        if matches!(e, ServerError::Wire(_) | ServerError::BinaryFrame) {
            self.bad_streak += 1;
        }
        let fatal = e.is_fatal();
        self.send(Message::Error(e.frame(in_reply_to)));
        if fatal {
            return Err(());
        }
        if self.bad_streak > MAX_BAD_FRAMES {
            return self.report(ServerError::Flood, None);
        }
        Ok(())
    }

    async fn frame(&mut self, text: &str, received_at: i64) -> Flow {
        let frame = match wire::deserialize(text) {
            Ok(f) => f,
            Err(e) => return self.report(e.into(), None),
        };
        let seq = frame.seq;
        match self.seqs.observe(seq) {
            SeqStatus::InOrder => {}
            SeqStatus::Gap { expected, got } => self.report(ServerError::SeqGap { expected, got }, Some(seq))?,
            SeqStatus::Regression { last, got } => {
                return self.report(ServerError::SeqRegression { last, got }, Some(seq));
            }
        }
        let msg = match frame.message() {
            Ok(m) => m,
            Err(e) => return self.report(e.into(), Some(seq)),
        };
        self.bad_streak = 0;
        match self.handle(msg, seq, received_at).await {
            Ok(()) => Ok(()),
            Err(e) => self.report(e, Some(seq)),
        }
    }

    async fn handle(&mut self, msg: Message, seq: u64, received_at: i64) -> Result<(), ServerError> {
        match msg {
            Message::ClockPing(ping) => {
                let t2 = self.hub.now_ms();
                self.send(Message::ClockPong(ClockPong {
                    t0: ping.t0,
                    t1: received_at,
                    t2,
                }));
                Ok(())
            }
            Message::Join(join) => {
                if let Some(name) = &self.joined {
                    return Err(ServerError::AlreadyJoined(name.clone()));
                }
                let name = join.performance.clone();
                self.hub.join(join, self.conn, self.outbox.clone()).await?;
                self.joined = Some(name);
                Ok(())
            }
            Message::Leave(_) => {
                let name = self.joined.take().ok_or(ServerError::NotJoined)?;
                let (reply, rx) = oneshot::channel();
                self.hub.command(&name, Command::Leave { conn: self.conn, reply: Some(reply) })?;
                rx.await.unwrap_or(Ok(()))
            }
            Message::SendRequest(request) => self.forward(|conn| Command::Send { conn, seq, request }),
            Message::CueAck(ack) => self.forward(|conn| Command::CueAck { conn, ack }),
            Message::FunctionalityChange(change) => self.forward(|conn| Command::Functionality { conn, seq, change }),
            Message::TestToggle(t) => self.forward(|conn| Command::Test { conn, seq, on: t.on }),
            other => Err(ServerError::UnexpectedType(other.kind().tag())),
        }
    }

    fn forward(&mut self, cmd: impl FnOnce(ConnectionId) -> Command) -> Result<(), ServerError> {
        let name = self.joined.as_ref().ok_or(ServerError::NotJoined)?;
        let result = self.hub.command(name, cmd(self.conn));
        if result.is_err() {
            self.joined = None;
        }
        result
    }

    /// A dropped connection leaves its performance.
    async fn disconnect(&mut self) {
        if let Some(name) = self.joined.take() {
            let (reply, rx) = oneshot::channel();
            if self.hub.command(&name, Command::Leave { conn: self.conn, reply: Some(reply) }).is_ok() {
                let _ = rx.await;
            }
        }
    }
}
