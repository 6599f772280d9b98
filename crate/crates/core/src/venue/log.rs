use std::collections::BTreeSet;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityEntry {
    /// Server ms.
    pub timestamp: i64,
    pub sender: String,
    pub verb: String,
    pub content_name: String,
    /// Nicknames that received this part.
    pub receivers: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub test: bool,
}

impl ActivityEntry {
    /// `"<sender>: <verb>: <content name>"`, with a marker for test sends.
    pub fn line(&self) -> String {
        let base = format!("{}: {}: {}", self.sender, self.verb, self.content_name);
        if self.test {
            base + " [test]"
        } else {
            base
        }
    }

    pub fn display_time(&self, tz: &FixedOffset) -> String {
        DateTime::from_timestamp_millis(self.timestamp)
            .map(|t| t.with_timezone(tz).format("%H:%M").to_string())
            .unwrap_or_else(|| "--:--".into())
    }

    /// The line followed by a tab and the HH:MM time.
    pub fn render(&self, tz: &FixedOffset) -> String {
        format!("{}\t{}", self.line(), self.display_time(tz))
    }

    pub fn involves(&self, nickname: &str) -> bool {
        self.sender == nickname || self.receivers.contains(nickname)
    }
}

/// Append-only log whose timestamps never decrease.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityLog {
    entries: Vec<ActivityEntry>,
}

impl ActivityLog {
    /// Appends, clamping the timestamp to the previous entry's.
    pub fn push(&mut self, mut entry: ActivityEntry) -> &ActivityEntry {
        if let Some(last) = self.entries.last() {
            entry.timestamp = entry.timestamp.max(last.timestamp);
        }
        self.entries.push(entry);
        self.entries.last().expect("just pushed")
    }

    pub fn global(&self) -> &[ActivityEntry] {
        &self.entries
    }

    /// Entries sent or received by one performer.
    pub fn for_performer<'a>(&'a self, nickname: &'a str) -> impl Iterator<Item = &'a ActivityEntry> + 'a {
        self.entries.iter().filter(move |e| e.involves(nickname))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
