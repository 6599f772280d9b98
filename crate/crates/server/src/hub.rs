use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Mutex, MutexGuard};

use chrono::FixedOffset;
use telebrain_core::model::{Document, ObjectId, Venue};
use telebrain_core::osc::{OscMessage, OscSender};
use telebrain_core::store::ContentStore;
use telebrain_core::timing::Clock;
use telebrain_core::venue::{
    ActivityEntry, ConnectionId, JoinRequest, Performance, PerformanceOptions, PerformanceSummary, SendRequest,
    VenueError,
};
use telebrain_core::wire::{CueAck, FunctionalityChange, Join, Message};
use tokio::sync::{mpsc as tmpsc, oneshot};

use crate::actor;
use crate::error::ServerError;

/// What a connection's writer task is asked to do.
#[derive(Debug)]
pub enum Outgoing {
    Message(Message),
    /// Send a close frame and stop.
    Close,
}

pub type Outbox = tmpsc::UnboundedSender<Outgoing>;

pub(crate) type Reply = oneshot::Sender<Result<(), ServerError>>;

/// Work for one performance's event loop.
pub(crate) enum Command {
    Join {
        req: JoinRequest,
        conn: ConnectionId,
        outbox: Outbox,
        reply: Reply,
    },
    /// An explicit leave or a dropped connection.
    Leave { conn: ConnectionId, reply: Option<Reply> },
    Send { conn: ConnectionId, seq: u64, request: SendRequest },
    CueAck { conn: ConnectionId, ack: CueAck },
    Functionality { conn: ConnectionId, seq: u64, change: FunctionalityChange },
    Test { conn: ConnectionId, seq: u64, on: bool },
    Osc(OscMessage),
}

pub(crate) struct Handle {
    pub tx: mpsc::Sender<Command>,
    pub summary: Arc<Mutex<PerformanceSummary>>,
}

#[derive(Default)]
pub(crate) struct Lobby {
    pub live: BTreeMap<String, Handle>,
    /// Final global logs of destroyed performances, kept until exit.
    pub ended: BTreeMap<String, Vec<ActivityEntry>>,
}

/// Defaults applied to every performance this server starts.
#[derive(Clone, Debug)]
pub struct HubOptions {
    /// Fixed seed for every performance; random per performance when absent.
    pub rng_seed: Option<u64>,
    pub delay_budget_ms: u64,
    pub timezone: FixedOffset,
    pub osc_send_port: u16,
}

impl Default for HubOptions {
    fn default() -> Self {
        let p = PerformanceOptions::default();
        Self {
            rng_seed: None,
            delay_budget_ms: p.delay_budget_ms,
            timezone: p.timezone,
            osc_send_port: telebrain_core::osc::DEFAULT_SEND_PORT,
        }
    }
}

/// Shared server state: the store, the clock and the lobby of live
/// performances. Performance state itself lives in each performance's loop.
pub struct Hub {
    pub(crate) store: Arc<ContentStore>,
    pub(crate) clock: Arc<dyn Clock>,
    pub(crate) osc: Option<OscSender>,
    pub(crate) options: HubOptions,
    lobby: Mutex<Lobby>,
    next_conn: AtomicU64,
}

impl Hub {
    pub fn new(store: Arc<ContentStore>, clock: Arc<dyn Clock>, options: HubOptions) -> Arc<Self> {
        let osc = OscSender::ephemeral()
            .map_err(|e| log::warn!("outbound osc disabled: {e}"))
            .ok();
        Arc::new(Self {
            store,
            clock,
            osc,
            options,
            lobby: Mutex::default(),
            next_conn: AtomicU64::new(1),
        })
    }

    pub fn store(&self) -> &ContentStore {
        &self.store
    }

    pub fn now_ms(&self) -> i64 {
        self.clock.now_ms()
    }

    pub(crate) fn connection_id(&self) -> ConnectionId {
        self.next_conn.fetch_add(1, Ordering::Relaxed)
    }

    pub(crate) fn lobby(&self) -> MutexGuard<'_, Lobby> {
        self.lobby.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Live performances for the Join menu.
    pub fn summaries(&self) -> Vec<PerformanceSummary> {
        self.lobby()
            .live
            .values()
            .map(|h| h.summary.lock().unwrap_or_else(|e| e.into_inner()).clone())
            .collect()
    }

    /// Final log of a destroyed performance.
    pub fn ended_log(&self, name: &str) -> Option<Vec<ActivityEntry>> {
        self.lobby().ended.get(name).cloned()
    }

    fn resolve_venue(&self, key: &str) -> Result<Venue, ServerError> {
        if let Ok(v) = self.store.venue(&ObjectId::from(key)) {
            return Ok(v);
        }
        match self.store.find_by_name("venue", key) {
            Some(Document::Venue(v)) => Ok(v),
            _ => Err(ServerError::UnknownVenue(key.to_string())),
        }
    }

    /// Joins a live performance, or starts one when the request names a
    /// venue. On success the performance has already queued a join_ack
    /// and roster update on `outbox`.
    pub(crate) async fn join(self: &Arc<Self>, join: Join, conn: ConnectionId, outbox: Outbox) -> Result<(), ServerError> {
        let req = JoinRequest {
            nickname: join.nickname,
            role: join.role,
            passcode: join.passcode,
            local_ip: join.local_ip,
        };
        if let Some(key) = join.venue {
            let venue = self.resolve_venue(&key)?;
            return self.start(venue, &join.performance, req, conn, outbox);
        }
        let (reply, rx) = oneshot::channel();
        self.command(&join.performance, Command::Join { req, conn, outbox, reply })?;
        rx.await.unwrap_or_else(|_| Err(VenueError::Gone(join.performance).into()))
    }

    fn start(
        self: &Arc<Self>,
        venue: Venue,
        name: &str,
        req: JoinRequest,
        conn: ConnectionId,
        outbox: Outbox,
    ) -> Result<(), ServerError> {
        let mut lobby = self.lobby();
        if lobby.live.contains_key(name) {
            return Err(VenueError::DuplicateName(name.to_string()).into());
        }
        let seed = self.options.rng_seed.unwrap_or_else(rand::random);
        let opts = PerformanceOptions {
            seed,
            delay_budget_ms: self.options.delay_budget_ms,
            timezone: self.options.timezone,
        };
        let perf = Performance::start(venue, name, &req, conn, opts)?;
        log::info!("performance {name} started by {} with seed {seed}", req.nickname);
        let summary = Arc::new(Mutex::new(PerformanceSummary::of(&perf)));
        let (tx, rx) = mpsc::channel();
        actor::spawn(Arc::clone(self), perf, (conn, outbox), rx, Arc::clone(&summary));
        lobby.ended.remove(name);
        lobby.live.insert(name.to_string(), Handle { tx, summary });
        Ok(())
    }

    /// Queues `cmd` on the named performance, or reports it gone or unknown.
    pub(crate) fn command(&self, name: &str, cmd: Command) -> Result<(), ServerError> {
        let lobby = self.lobby();
        let missing = || {
            if lobby.ended.contains_key(name) {
                VenueError::Gone(name.to_string())
            } else {
                VenueError::NotFound(name.to_string())
            }
        };
        let handle = lobby.live.get(name).ok_or_else(missing)?;
        handle.tx.send(cmd).map_err(|_| VenueError::Gone(name.to_string()).into())
    }

    /// Offers an inbound OSC message to every live performance; each fires
    /// only the bindings it has switched on.
    pub fn osc_inbound(&self, msg: &OscMessage) {
        for handle in self.lobby().live.values() {
            let _ = handle.tx.send(Command::Osc(msg.clone()));
        }
    }

    /// Called by a performance loop once its last performer has left.
    pub(crate) fn retire(&self, name: &str, log: Vec<ActivityEntry>) {
        let mut lobby = self.lobby();
        lobby.live.remove(name);
        lobby.ended.insert(name.to_string(), log);
        log::info!("performance {name} destroyed");
    }
}
