//! Simulated clients for checking clock sync and cue simultaneity without
//! a network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimClient {
    /// True `local - server` offset.
    pub clock_offset_ms: i64,
    pub uplink_ms: i64,
    pub downlink_ms: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimOutcome {
    pub estimated_offset_ms: i64,
    pub arrival_server_ms: i64,
    pub executed_server_ms: i64,
    pub late: bool,
}

impl SimClient {
    pub fn symmetric(latency_ms: i64, clock_offset_ms: i64) -> Self {
        Self {
            clock_offset_ms,
            uplink_ms: latency_ms,
            downlink_ms: latency_ms,
        }
    }

    /// One ping/pong exchange started at local time `t0`, with the server
    /// answering instantly.
    pub fn exchange(&self, t0: i64) -> ClockSample {
        let t1 = t0 - self.clock_offset_ms + self.uplink_ms;
        let t2 = t1;
        let t3 = t2 + self.downlink_ms + self.clock_offset_ms;
        ClockSample { t0, t1, t2, t3 }
    }

    /// Runs `rounds` exchanges [`SYNC_INTERVAL_MS`] apart and returns the
    /// client's smoothed `local - server` offset.
    pub fn synchronize(&self, rounds: usize) -> Result<i64, TimingError> {
        let mut window = OffsetWindow::new();
        for r in 0..rounds {
            window.push(estimate_offset(&self.exchange(r as i64 * SYNC_INTERVAL_MS as i64)));
        }
        window.clock_offset()
    }

    /// Delivers a cue issued at server time `issue_ms`.
    pub fn receive(&self, schedule: &Schedule, issue_ms: i64, estimated_offset_ms: i64) -> SimOutcome {
        let arrival_server_ms = issue_ms + self.downlink_ms;
        let arrival_local = to_local(arrival_server_ms, self.clock_offset_ms);
        let run = execution(arrival_local, schedule.local_fire_time(estimated_offset_ms));
        SimOutcome {
            estimated_offset_ms,
            arrival_server_ms,
            executed_server_ms: run.at_local - self.clock_offset_ms,
            late: run.late,
        }
    }
}

/// Syncs every client, then issues one cue at `issue_ms`.
pub fn simulate_cue(clients: &[SimClient], issue_ms: i64, delay_budget_ms: u64) -> Result<Vec<SimOutcome>, TimingError> {
    let schedule = schedule_cue(issue_ms, delay_budget_ms)?;
    clients
        .iter()
        .map(|c| Ok(c.receive(&schedule, issue_ms, c.synchronize(SYNC_WINDOW)?)))
        .collect()
}

/// `n` clients with symmetric latency drawn uniformly from `latency_ms`
/// and clock offsets drawn from `offset_ms`.
pub fn random_clients(
    n: usize,
    latency_ms: std::ops::RangeInclusive<i64>,
    offset_ms: std::ops::RangeInclusive<i64>,
    seed: u64,
) -> Vec<SimClient> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let latency = rng.gen_range(latency_ms.clone());
            SimClient::symmetric(latency, rng.gen_range(offset_ms.clone()))
        })
        .collect()
}
