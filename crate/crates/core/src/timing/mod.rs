//! Server time, client offset estimation and delayed simultaneous execution.
//!
//! All times are integer milliseconds. Server time is the reference; a
//! client's offset is `local - server`, so a server instant `t` happens at
//! local time `t + offset` on that client.

mod clock;
mod scheduler;
pub mod sim;

pub use clock::{Clock, SystemClock, VirtualClock};
pub use scheduler::Scheduler;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::{AlgorithmKind, AlgorithmObject};

pub const DEFAULT_DELAY_BUDGET_MS: u64 = 200;
pub const SYNC_WINDOW: usize = 8;
pub const SYNC_INTERVAL_MS: u64 = 5_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimingError {
    #[error("no clock samples to choose from")]
    EmptyWindow,
    #[error("delay budget must be > 0")]
    ZeroBudget,
    #[error("interval must be > 0")]
    ZeroInterval,
    #[error("timer duration must be > 0")]
    ZeroDuration,
    #[error("algorithm {0} is not a timer")]
    NotATimer(String),
}

/// One two-way exchange: client send, server receive, server send, client
/// receive. Requires `t1 <= t2` and `t0 <= t3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockSample {
    pub t0: i64,
    pub t1: i64,
    pub t2: i64,
    pub t3: i64,
}

impl ClockSample {
    pub fn is_ordered(&self) -> bool {
        self.t1 <= self.t2 && self.t0 <= self.t3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetEstimate {
    /// `server - client` as measured by the exchange.
    pub offset_ms: i64,
    pub rtt_ms: i64,
}

/// Two-way time transfer. The error against the true offset is half the
/// difference between the two one-way latencies.
pub fn estimate_offset(s: &ClockSample) -> OffsetEstimate {
    OffsetEstimate {
        offset_ms: ((s.t1 - s.t0) + (s.t2 - s.t3)).div_euclid(2),
        rtt_ms: (s.t3 - s.t0) - (s.t2 - s.t1),
    }
}

/// Picks the estimate with the smallest round trip among the last
/// [`SYNC_WINDOW`] samples; the most recent wins ties.
pub fn smooth_offset(history: &[OffsetEstimate]) -> Result<i64, TimingError> {
    let window = &history[history.len().saturating_sub(SYNC_WINDOW)..];
    window
        .iter()
        .rev()
        .min_by_key(|e| e.rtt_ms)
        .map(|e| e.offset_ms)
        .ok_or(TimingError::EmptyWindow)
}

/// Client-side sliding window of clock estimates.
#[derive(Clone, Debug, Default)]
pub struct OffsetWindow {
    samples: VecDeque<OffsetEstimate>,
}

impl OffsetWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, estimate: OffsetEstimate) {
        if self.samples.len() == SYNC_WINDOW {
            self.samples.pop_front();
        }
        self.samples.push_back(estimate);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// The client's `local - server` offset.
    pub fn clock_offset(&self) -> Result<i64, TimingError> {
        let v: Vec<_> = self.samples.iter().copied().collect();
        smooth_offset(&v).map(|server_minus_client| -server_minus_client)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub execute_at: i64,
    pub delay_budget_ms: u64,
}

impl Schedule {
    /// The instant a client with the given offset fires this cue.
    pub fn local_fire_time(&self, clock_offset_ms: i64) -> i64 {
        to_local(self.execute_at, clock_offset_ms)
    }
}

/// `execute_at = issue + budget`.
pub fn schedule_cue(issue_ms: i64, delay_budget_ms: u64) -> Result<Schedule, TimingError> {
    if delay_budget_ms == 0 {
        return Err(TimingError::ZeroBudget);
    }
    Ok(Schedule {
        execute_at: issue_ms + delay_budget_ms as i64,
        delay_budget_ms,
    })
}

pub fn to_local(server_ms: i64, clock_offset_ms: i64) -> i64 {
    server_ms + clock_offset_ms
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub at_local: i64,
    pub late: bool,
}

/// Holds a cue until its local fire time; a cue that arrives after that time
/// runs on arrival and is flagged late.
pub fn execution(arrival_local: i64, fire_local: i64) -> Execution {
    if arrival_local > fire_local {
        Execution {
            at_local: arrival_local,
            late: true,
        }
    } else {
        Execution {
            at_local: fire_local,
            late: false,
        }
    }
}

/// Ticks are computed from the anchor, never from the previous tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metronome {
    pub anchor_ms: i64,
    pub interval_ms: u64,
    /// Synchronized metronomes anchor in server time; others in local time.
    pub synchronized: bool,
}

impl Metronome {
    pub fn new(anchor_ms: i64, interval_ms: u64, synchronized: bool) -> Result<Self, TimingError> {
        if interval_ms == 0 {
            return Err(TimingError::ZeroInterval);
        }
        Ok(Self {
            anchor_ms,
            interval_ms,
            synchronized,
        })
    }

    pub fn tick(&self, k: u64) -> i64 {
        self.anchor_ms + (k * self.interval_ms) as i64
    }

    /// Index of the first tick at or after `t`.
    pub fn next_index(&self, t: i64) -> u64 {
        if t <= self.anchor_ms {
            0
        } else {
            let elapsed = (t - self.anchor_ms) as u64;
            elapsed.div_ceil(self.interval_ms)
        }
    }

    /// The first `n` ticks in server time. Unsynchronized metronomes are
    /// anchored on the given client's local clock.
    pub fn server_ticks(&self, n: usize, clock_offset_ms: i64) -> Vec<i64> {
        let shift = if self.synchronized { 0 } else { -clock_offset_ms };
        (0..n as u64).map(|k| self.tick(k) + shift).collect()
    }
}

pub fn metronome_ticks(start_ms: i64, interval_ms: u64, n: usize) -> Result<Vec<i64>, TimingError> {
    let m = Metronome::new(start_ms, interval_ms, true)?;
    Ok((0..n as u64).map(|k| m.tick(k)).collect())
}

/// `fire_at = armed_at + duration`.
pub fn timer_fire(timer: &AlgorithmObject, armed_at: i64) -> Result<i64, TimingError> {
    match timer.kind {
        AlgorithmKind::Timer { duration_ms: 0 } => Err(TimingError::ZeroDuration),
        AlgorithmKind::Timer { duration_ms } => Ok(armed_at + duration_ms as i64),
        _ => Err(TimingError::NotATimer(timer.id.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectId;

    #[test]
    fn symmetric_exchange_is_exact() {
        let e = estimate_offset(&ClockSample { t0: 0, t1: 40, t2: 41, t3: 21 });
        assert_eq!(e, OffsetEstimate { offset_ms: 30, rtt_ms: 20 });
        let zero = estimate_offset(&ClockSample { t0: 0, t1: 0, t2: 0, t3: 0 });
        assert_eq!(zero, OffsetEstimate { offset_ms: 0, rtt_ms: 0 });
    }

    #[test]
    fn smoothing_prefers_low_rtt_then_recency() {
        let e = |offset_ms, rtt_ms| OffsetEstimate { offset_ms, rtt_ms };
        assert_eq!(smooth_offset(&[e(5, 40), e(9, 10), e(7, 80)]), Ok(9));
        assert_eq!(smooth_offset(&[e(1, 10), e(2, 10)]), Ok(2));
        assert_eq!(smooth_offset(&[]), Err(TimingError::EmptyWindow));
        let mut history = vec![e(100, 1)];
        history.extend((0..8).map(|i| e(i, 50)));
        assert_eq!(smooth_offset(&history), Ok(7), "old samples fall out of the window");
    }

    #[test]
    fn window_reports_local_minus_server() {
        let mut w = OffsetWindow::new();
        assert_eq!(w.clock_offset(), Err(TimingError::EmptyWindow));
        // client clock runs 30 ms ahead of the server
        w.push(estimate_offset(&ClockSample { t0: 30, t1: 10, t2: 10, t3: 50 }));
        assert_eq!(w.clock_offset(), Ok(30));
        for _ in 0..20 {
            w.push(OffsetEstimate { offset_ms: 0, rtt_ms: 99 });
        }
        assert_eq!(w.len(), SYNC_WINDOW);
    }

    #[test]
    fn schedule_and_translation() {
        let s = schedule_cue(10_000, 200).unwrap();
        assert_eq!(s.execute_at, 10_200);
        assert_eq!(s.local_fire_time(30), 10_230);
        assert_eq!(schedule_cue(0, 0), Err(TimingError::ZeroBudget));
        assert_eq!(execution(10_100, 10_230), Execution { at_local: 10_230, late: false });
        assert_eq!(execution(10_230, 10_230), Execution { at_local: 10_230, late: false });
        assert_eq!(execution(10_231, 10_230), Execution { at_local: 10_231, late: true });
    }

    #[test]
    fn metronome_is_anchored() {
        assert_eq!(metronome_ticks(1000, 250, 4).unwrap(), vec![1000, 1250, 1500, 1750]);
        assert_eq!(metronome_ticks(0, 0, 1), Err(TimingError::ZeroInterval));
        let m = Metronome::new(1000, 250, true).unwrap();
        assert_eq!(m.next_index(1000), 0);
        assert_eq!(m.next_index(1001), 1);
        assert_eq!(m.next_index(1250), 1);
        assert_eq!(m.server_ticks(2, 40), m.server_ticks(2, -75));
        let free = Metronome::new(1000, 250, false).unwrap();
        assert_ne!(free.server_ticks(2, 40), free.server_ticks(2, -75));
    }

    #[test]
    fn timers() {
        let timer = |duration_ms| AlgorithmObject {
            id: ObjectId::from("t"),
            name: "t".into(),
            kind: AlgorithmKind::Timer { duration_ms },
            lock: None,
        };
        assert_eq!(timer_fire(&timer(3000), 500), Ok(3500));
        assert_eq!(to_local(timer_fire(&timer(3000), 500).unwrap(), 30), 3530);
        assert_eq!(timer_fire(&timer(0), 500), Err(TimingError::ZeroDuration));
    }
}
