//! One thread per live performance. The thread owns the [`Performance`]
//! and every connection's outbox; nothing else touches them.

use std::collections::HashMap;
use std::sync::{mpsc, Arc, Mutex};
use std::time::Duration;

use telebrain_core::model::Capability;
use telebrain_core::osc::OscMessage;
use telebrain_core::timing::Scheduler;
use telebrain_core::venue::{
    Catalog, ConnectionId, Dispatched, LeaveOutcome, PartKind, Performance, PerformanceSummary, VenueError,
};
use telebrain_core::wire::{
    capability_map, capability_set, ActivityLine, ActivityUpdate, ClockPong, Cue, CuePart, ErrorFrame,
    FunctionalityChange, JoinAck, LogScope, Message, RosterEntry, RosterUpdate,
};

use crate::error::ServerError;
use crate::hub::{Command, Hub, Outbox, Outgoing};

pub(crate) fn spawn(
    hub: Arc<Hub>,
    perf: Performance,
    first: (ConnectionId, Outbox),
    rx: mpsc::Receiver<Command>,
    summary: Arc<Mutex<PerformanceSummary>>,
) {
    let name = perf.name().to_string();
    let mut actor = Actor {
        hub,
        perf,
        outboxes: HashMap::from([first.clone()]),
        osc_due: Scheduler::new(),
        summary,
    };
    std::thread::Builder::new()
        .name(format!("perf-{name}"))
        .spawn(move || {
            actor.welcome(first.0);
            actor.run(rx);
        })
        .expect("spawn performance thread");
}

struct Actor {
    hub: Arc<Hub>,
    perf: Performance,
    outboxes: HashMap<ConnectionId, Outbox>,
    /// Outbound OSC held until its cue's execute-at.
    osc_due: Scheduler<(String, OscMessage)>,
    summary: Arc<Mutex<PerformanceSummary>>,
}

impl Actor {
    fn catalog(&self) -> Arc<telebrain_core::store::ContentStore> {
        Arc::clone(&self.hub.store)
    }

    fn run(&mut self, rx: mpsc::Receiver<Command>) {
        loop {
            let deadline = [self.perf.next_deadline(), self.osc_due.next_deadline()]
                .into_iter()
                .flatten()
                .min();
            let received = match deadline {
                Some(at) => {
                    let wait = (at - self.hub.now_ms()).max(0) as u64;
                    rx.recv_timeout(Duration::from_millis(wait))
                }
                None => rx.recv().map_err(|_| mpsc::RecvTimeoutError::Disconnected),
            };
            match received {
                Ok(cmd) => self.handle(cmd),
                Err(mpsc::RecvTimeoutError::Timeout) => {}
                Err(mpsc::RecvTimeoutError::Disconnected) => return,
            }
            let now = self.hub.now_ms();
            let store = self.catalog();
            let fired = self.perf.fire_due(&*store, now);
            self.deliver(fired);
            self.flush_osc(now);
            if !self.perf.is_live() {
                self.hub.retire(self.perf.name(), self.perf.log().global().to_vec());
                // No new commands can arrive once retired; answer the queued ones.
                for cmd in rx.try_iter() {
                    self.refuse(cmd);
                }
                return;
            }
            *self.summary.lock().unwrap_or_else(|e| e.into_inner()) = PerformanceSummary::of(&self.perf);
        }
    }

    fn refuse(&self, cmd: Command) {
        let gone = || ServerError::from(VenueError::Gone(self.perf.name().to_string()));
        match cmd {
            Command::Join { reply, .. } => {
                let _ = reply.send(Err(gone()));
            }
            Command::Leave { reply: Some(reply), .. } => {
                let _ = reply.send(Err(gone()));
            }
            _ => {}
        }
    }

    fn handle(&mut self, cmd: Command) {
        let store = self.catalog();
        let now = self.hub.now_ms();
        match cmd {
            Command::Join { req, conn, outbox, reply } => match self.perf.join(&req, conn) {
                Ok(_) => {
                    self.outboxes.insert(conn, outbox);
                    let _ = reply.send(Ok(()));
                    self.welcome(conn);
                }
                Err(e) => {
                    let _ = reply.send(Err(e.into()));
                }
            },
            Command::Leave { conn, reply } => {
                let result = self.leave(conn);
                if let Some(reply) = reply {
                    let _ = reply.send(result);
                }
            }
            Command::Send { conn, seq, request } => {
                let result = self
                    .nickname(conn)
                    .and_then(|nick| Ok(self.perf.dispatch(&nick, &request, &*store, now)?));
                match result {
                    Ok(d) => self.deliver(d),
                    Err(e) => self.error(conn, &e, Some(seq)),
                }
            }
            Command::CueAck { conn, ack } => {
                let Ok(nick) = self.nickname(conn) else { return };
                if let Some(offset) = ack.clock_offset_ms {
                    let _ = self.perf.set_clock_offset(&nick, offset);
                }
                if ack.late || ack.error.is_some() {
                    log::info!(
                        "{}: cue {} for {nick} late={} error={:?}",
                        self.perf.name(),
                        ack.cue_id,
                        ack.late,
                        ack.error
                    );
                }
            }
            Command::Functionality { conn, seq, change } => match self.change(conn, &change, &*store) {
                Ok(()) => {
                    self.ack(conn);
                    self.broadcast_roster();
                }
                Err(e) => self.error(conn, &e, Some(seq)),
            },
            Command::Test { conn, seq, on } => {
                let result = self
                    .nickname(conn)
                    .and_then(|nick| Ok(self.perf.set_test_mode(&nick, on).map(|_| ())?));
                match result {
                    Ok(()) => self.broadcast_roster(),
                    Err(e) => self.error(conn, &e, Some(seq)),
                }
            }
            Command::Osc(msg) => {
                let d = self.perf.osc_inbound(&msg, &*store, now);
                self.deliver(d);
            }
        }
    }

    fn nickname(&self, conn: ConnectionId) -> Result<String, ServerError> {
        self.perf
            .performer_by_connection(conn)
            .filter(|p| p.present)
            .map(|p| p.nickname.clone())
            .ok_or(ServerError::NotJoined)
    }

    fn leave(&mut self, conn: ConnectionId) -> Result<(), ServerError> {
        let nick = self.nickname(conn)?;
        let outcome = self.perf.leave(&nick)?;
        self.outboxes.remove(&conn);
        if outcome == LeaveOutcome::Left {
            self.broadcast_roster();
        }
        Ok(())
    }

    /// Applies role, then flags, then interface; stops at the first refusal.
    fn change(&mut self, conn: ConnectionId, change: &FunctionalityChange, store: &dyn Catalog) -> Result<(), ServerError> {
        let nick = self.nickname(conn)?;
        if let Some(role) = &change.role {
            self.perf.change_role(&nick, role)?;
        }
        if let Some(map) = &change.capabilities {
            self.perf.change_functionality(&nick, capability_set(map))?;
        }
        if let Some(interface) = &change.interface {
            self.perf.change_interface(&nick, interface, store)?;
        }
        Ok(())
    }

    fn send(&self, conn: ConnectionId, msg: Message) {
        if let Some(outbox) = self.outboxes.get(&conn) {
            let _ = outbox.send(Outgoing::Message(msg));
        }
    }

    fn error(&self, conn: ConnectionId, e: &ServerError, in_reply_to: Option<u64>) {
        let frame: ErrorFrame = e.frame(in_reply_to);
        self.send(conn, Message::Error(frame));
    }

    fn welcome(&self, conn: ConnectionId) {
        self.ack(conn);
        self.broadcast_roster();
    }

    /// A join_ack with the performer's current flags. Also sent after a
    /// functionality change so the client can re-render.
    fn ack(&self, conn: ConnectionId) {
        let Some(me) = self.perf.performer_by_connection(conn) else { return };
        let now = self.hub.now_ms();
        let ack = JoinAck {
            performance: self.perf.name().to_string(),
            nickname: me.nickname.clone(),
            role: me.role.clone(),
            capabilities: capability_map(&me.capabilities),
            roles: self.perf.venue().roles.iter().map(|r| r.role.name.clone()).collect(),
            roster: self.roster(),
            clock: ClockPong { t0: now, t1: now, t2: now },
            delay_budget_ms: self.perf.delay_budget_ms(),
            timezone: format_timezone(&self.perf.timezone()),
        };
        self.send(conn, Message::JoinAck(ack));
    }

    fn roster(&self) -> Vec<RosterEntry> {
        self.perf.roster().iter().filter(|p| p.present).map(RosterEntry::from).collect()
    }

    fn broadcast_roster(&self) {
        let update = RosterUpdate { roster: self.roster() };
        for conn in self.outboxes.keys() {
            self.send(*conn, Message::RosterUpdate(update.clone()));
        }
    }

    /// Sends cues to their receivers, queues outbound OSC and pushes the
    /// new activity lines to whoever may see them.
    fn deliver(&mut self, d: Dispatched) {
        let budget = self.perf.delay_budget_ms();
        for envelope in d.cues {
            for delivery in envelope.deliveries {
                let (osc, parts): (Vec<_>, Vec<_>) =
                    delivery.parts.into_iter().partition(|p| p.kind == PartKind::Osc);
                for msg in osc.into_iter().filter_map(|p| p.osc) {
                    self.osc_due
                        .push(envelope.schedule.execute_at, (delivery.nickname.clone(), msg));
                }
                if parts.is_empty() {
                    continue;
                }
                let cue = Cue {
                    cue_id: envelope.cue_id,
                    sender: envelope.sender.clone(),
                    execute_at: envelope.schedule.execute_at,
                    delay_budget_ms: budget,
                    parts: parts.into_iter().map(CuePart::from).collect(),
                    test: envelope.test,
                };
                self.send(delivery.connection, Message::Cue(cue));
            }
        }
        for id in &d.armed {
            log::info!("{}: armed {id}", self.perf.name());
        }
        for id in &d.disarmed {
            log::info!("{}: disarmed {id}", self.perf.name());
        }
        if d.entries.is_empty() {
            return;
        }
        let tz = self.perf.timezone();
        for p in self.perf.roster().iter().filter(|p| p.present) {
            let (scope, entries): (_, Vec<_>) = if p.capabilities.has(Capability::GlobalActivityLog) {
                (LogScope::Global, d.entries.iter().collect())
            } else if p.capabilities.has(Capability::PerformerActivityLog) {
                (LogScope::Performer, d.entries.iter().filter(|e| e.involves(&p.nickname)).collect())
            } else {
                continue;
            };
            if entries.is_empty() {
                continue;
            }
            let update = ActivityUpdate {
                scope,
                entries: entries.into_iter().map(|e| ActivityLine::of(e, &tz)).collect(),
            };
            self.send(p.connection, Message::ActivityUpdate(update));
        }
    }

    fn flush_osc(&mut self, now: i64) {
        let Some(sender) = &self.hub.osc else {
            self.osc_due.pop_due(now);
            return;
        };
        for (_, (nick, msg)) in self.osc_due.pop_due(now) {
            let ip = self.perf.performer(&nick).and_then(|p| p.local_ip.as_deref());
            match sender.send_outbound(&nick, ip, self.hub.options.osc_send_port, &msg) {
                Ok(to) => log::debug!("osc {} -> {to}", msg.address),
                Err(e) => log::warn!("osc {} for {nick}: {e}", msg.address),
            }
        }
    }
}

/// `UTC` or `+HH:MM`, the form the config accepts.
pub(crate) fn format_timezone(tz: &chrono::FixedOffset) -> String {
    let secs = tz.local_minus_utc();
    if secs == 0 {
        return "UTC".into();
    }
    let sign = if secs < 0 { '-' } else { '+' };
    let m = secs.abs() / 60;
    format!("{sign}{:02}:{:02}", m / 60, m % 60)
}
