//! Live performances: roster, routing, fractions and activity logs.
//!
//! A [`Performance`] is a synchronous state machine. Callers pass the
//! current server time into every operation; it never reads a clock and
//! never performs I/O.

mod fraction;
mod log;
mod parts;
mod performance;
mod stage;

pub use fraction::{fraction_sizes, random_partition, refresh_persistent, Partition};
pub use log::{ActivityEntry, ActivityLog};
pub use parts::{
    content_parts, receive_needs, resolve_payload, send_capability_for, ContentError, Part, PartKind, Payload,
    Resolved,
};
pub use performance::*;
pub use stage::{PerformanceSummary, Stage};

use std::collections::BTreeMap;

use chrono::FixedOffset;

use crate::audio::{self, TtsAdapter};
use crate::model::{Document, ObjectId};

/// Read access to stored objects, plus live TTS rendering.
pub trait Catalog {
    fn document(&self, id: &ObjectId) -> Option<Document>;

    /// Renders live TTS into a deliverable part.
    fn live_tts(&self, text: &str, language: &str) -> Result<Part, String> {
        let _ = (text, language);
        Err("live tts is not available".into())
    }
}

/// In-memory catalog; live TTS uses the tone stub without storing blobs.
impl Catalog for BTreeMap<ObjectId, Document> {
    fn document(&self, id: &ObjectId) -> Option<Document> {
        self.get(id).cloned()
    }

    fn live_tts(&self, text: &str, language: &str) -> Result<Part, String> {
        tts_part(text, language, &audio::ToneStub, |wav| Ok(crate::content_address(wav)))
    }
}

/// Renders `text` and wraps it as a live TTS part; `store` persists the
/// WAV bytes and returns the blob id.
pub fn tts_part(
    text: &str,
    language: &str,
    adapter: &dyn TtsAdapter,
    store: impl FnOnce(&[u8]) -> Result<String, String>,
) -> Result<Part, String> {
    let render = audio::render_tts(text, language, adapter).map_err(|e| e.to_string())?;
    Ok(Part {
        blob_id: Some(store(&render.wav)?),
        mime: Some("audio/wav".into()),
        duration_ms: Some(render.duration_ms),
        text: Some(text.to_string()),
        ..Part::bare(PartKind::LiveTts, text)
    })
}

/// Parses `UTC`, `Z` or a `+HH:MM` / `-HH:MM` offset.
pub fn parse_timezone(s: &str) -> Option<FixedOffset> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("utc") || s == "Z" {
        return FixedOffset::east_opt(0);
    }
    let (sign, rest) = match s.as_bytes().first()? {
        b'+' => (1, &s[1..]),
        b'-' => (-1, &s[1..]),
        _ => return None,
    };
    let (h, m) = rest.split_once(':')?;
    if h.len() != 2 || m.len() != 2 {
        return None;
    }
    let h: i32 = h.parse().ok()?;
    let m: i32 = m.parse().ok()?;
    if h > 23 || m > 59 {
        return None;
    }
    FixedOffset::east_opt(sign * (h * 3600 + m * 60))
}
