use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::log::ActivityEntry;
use super::performance::*;
use crate::model::Venue;

/// Entry in the Join menu.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerformanceSummary {
    pub name: String,
    pub venue: String,
    pub performers: usize,
    pub roles: Vec<String>,
}

impl PerformanceSummary {
    pub fn of(p: &Performance) -> Self {
        Self {
            name: p.name().to_string(),
            venue: p.venue().name.clone(),
            performers: p.roster().len(),
            roles: p.venue().roles.iter().map(|r| r.role.name.clone()).collect(),
        }
    }
}

/// Every live performance by name, plus final logs of ended ones.
#[derive(Debug, Default)]
pub struct Stage {
    live: BTreeMap<String, Performance>,
    ended: BTreeMap<String, Vec<ActivityEntry>>,
}

impl Stage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn start(
        &mut self,
        venue: Venue,
        name: &str,
        first: &JoinRequest,
        connection: ConnectionId,
        opts: PerformanceOptions,
    ) -> Result<&mut Performance, VenueError> {
        if self.live.contains_key(name) {
            return Err(VenueError::DuplicateName(name.to_string()));
        }
        let p = Performance::start(venue, name, first, connection, opts)?;
        self.ended.remove(name);
        Ok(self.live.entry(name.to_string()).or_insert(p))
    }

    /// The live performance, or `Gone` / `NotFound`.
    pub fn get_mut(&mut self, name: &str) -> Result<&mut Performance, VenueError> {
        if !self.live.contains_key(name) {
            return Err(self.missing(name));
        }
        Ok(self.live.get_mut(name).expect("checked above"))
    }

    pub fn get(&self, name: &str) -> Option<&Performance> {
        self.live.get(name)
    }

    fn missing(&self, name: &str) -> VenueError {
        if self.ended.contains_key(name) {
            VenueError::Gone(name.to_string())
        } else {
            VenueError::NotFound(name.to_string())
        }
    }

    pub fn join(&mut self, name: &str, req: &JoinRequest, connection: ConnectionId) -> Result<&Performer, VenueError> {
        self.get_mut(name)?.join(req, connection)
    }

    pub fn leave(&mut self, name: &str, nickname: &str) -> Result<LeaveOutcome, VenueError> {
        let outcome = self.get_mut(name)?.leave(nickname)?;
        if outcome == LeaveOutcome::Destroyed {
            let p = self.live.remove(name).expect("present above");
            self.ended.insert(name.to_string(), p.log().global().to_vec());
        }
        Ok(outcome)
    }

    /// Final log of an ended performance.
    pub fn ended_log(&self, name: &str) -> Option<&[ActivityEntry]> {
        self.ended.get(name).map(Vec::as_slice)
    }

    pub fn summaries(&self) -> Vec<PerformanceSummary> {
        self.live.values().map(PerformanceSummary::of).collect()
    }
}
