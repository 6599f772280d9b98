use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{MessageType, WireError};
use crate::model::{Capability, CapabilitySet, ObjectId};
use crate::venue::{ActivityEntry, Part, Performer, SendRequest};

/// Joins a live performance, or starts one when `venue` is given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Join {
    pub performance: String,
    /// Venue name or id to instantiate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    pub nickname: String,
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passcode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_ip: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub nickname: String,
    pub role: String,
    pub present: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub test_mode: bool,
}

impl From<&Performer> for RosterEntry {
    fn from(p: &Performer) -> Self {
        Self {
            nickname: p.nickname.clone(),
            role: p.role.clone(),
            present: p.present,
            test_mode: p.test_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinAck {
    pub performance: String,
    pub nickname: String,
    pub role: String,
    /// Every flag, on or off; clients render controls from this.
    pub capabilities: BTreeMap<Capability, bool>,
    pub roles: Vec<String>,
    pub roster: Vec<RosterEntry>,
    pub clock: ClockPong,
    pub delay_budget_ms: u64,
    pub timezone: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leave {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterUpdate {
    pub roster: Vec<RosterEntry>,
}

/// A deliverable part as sent to one client. Audio and images carry a
/// fetchable `blob_url`, never the media itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuePart {
    #[serde(flatten)]
    pub part: Part,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blob_url: Option<String>,
}

impl From<Part> for CuePart {
    fn from(part: Part) -> Self {
        let blob_url = part.blob_id.as_ref().map(|id| format!("/blob/{id}"));
        Self { part, blob_url }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cue {
    pub cue_id: u64,
    pub sender: String,
    /// Server ms.
    pub execute_at: i64,
    pub delay_budget_ms: u64,
    pub parts: Vec<CuePart>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub test: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueAck {
    pub cue_id: u64,
    pub late: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The client's current `local - server` offset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clock_offset_ms: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockPing {
    pub t0: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockPong {
    pub t0: i64,
    pub t1: i64,
    pub t2: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityLine {
    pub timestamp: i64,
    /// `"<sender>: <verb>: <content name>"`.
    pub line: String,
    /// HH:MM in the venue's timezone.
    pub time: String,
}

impl ActivityLine {
    pub fn of(entry: &ActivityEntry, tz: &chrono::FixedOffset) -> Self {
        Self {
            timestamp: entry.timestamp,
            line: entry.line(),
            time: entry.display_time(tz),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogScope {
    Performer,
    Global,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityUpdate {
    pub scope: LogScope,
    pub entries: Vec<ActivityLine>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorFrame {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_reply_to: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

/// Any of role, flags or interface; the server answers with a roster
/// update and a fresh capability map.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalityChange {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capabilities: Option<BTreeMap<Capability, bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<ObjectId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestToggle {
    pub on: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Message {
    Join(Join),
    JoinAck(JoinAck),
    Leave(Leave),
    RosterUpdate(RosterUpdate),
    Cue(Cue),
    CueAck(CueAck),
    ClockPing(ClockPing),
    ClockPong(ClockPong),
    ActivityUpdate(ActivityUpdate),
    SendRequest(SendRequest),
    Error(ErrorFrame),
    FunctionalityChange(FunctionalityChange),
    TestToggle(TestToggle),
}

fn parse<T: DeserializeOwned>(kind: MessageType, payload: &Value) -> Result<T, WireError> {
    T::deserialize(payload).map_err(|e| WireError::BadPayload {
        kind: kind.tag(),
        reason: e.to_string(),
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("payloads always serialize")
}

impl Message {
    pub fn kind(&self) -> MessageType {
        match self {
            Self::Join(_) => MessageType::Join,
            Self::JoinAck(_) => MessageType::JoinAck,
            Self::Leave(_) => MessageType::Leave,
            Self::RosterUpdate(_) => MessageType::RosterUpdate,
            Self::Cue(_) => MessageType::Cue,
            Self::CueAck(_) => MessageType::CueAck,
            Self::ClockPing(_) => MessageType::ClockPing,
            Self::ClockPong(_) => MessageType::ClockPong,
            Self::ActivityUpdate(_) => MessageType::ActivityUpdate,
            Self::SendRequest(_) => MessageType::SendRequest,
            Self::Error(_) => MessageType::Error,
            Self::FunctionalityChange(_) => MessageType::FunctionalityChange,
            Self::TestToggle(_) => MessageType::TestToggle,
        }
    }

    pub fn payload_value(&self) -> Value {
        match self {
            Self::Join(p) => to_value(p),
            Self::JoinAck(p) => to_value(p),
            Self::Leave(p) => to_value(p),
            Self::RosterUpdate(p) => to_value(p),
            Self::Cue(p) => to_value(p),
            Self::CueAck(p) => to_value(p),
            Self::ClockPing(p) => to_value(p),
            Self::ClockPong(p) => to_value(p),
            Self::ActivityUpdate(p) => to_value(p),
            Self::SendRequest(p) => to_value(p),
            Self::Error(p) => to_value(p),
            Self::FunctionalityChange(p) => to_value(p),
            Self::TestToggle(p) => to_value(p),
        }
    }

    pub fn from_parts(kind: MessageType, payload: &Value) -> Result<Self, WireError> {
        Ok(match kind {
            MessageType::Join => Self::Join(parse(kind, payload)?),
            MessageType::JoinAck => Self::JoinAck(parse(kind, payload)?),
            MessageType::Leave => Self::Leave(parse(kind, payload)?),
            MessageType::RosterUpdate => Self::RosterUpdate(parse(kind, payload)?),
            MessageType::Cue => Self::Cue(parse(kind, payload)?),
            MessageType::CueAck => Self::CueAck(parse(kind, payload)?),
            MessageType::ClockPing => Self::ClockPing(parse(kind, payload)?),
            MessageType::ClockPong => Self::ClockPong(parse(kind, payload)?),
            MessageType::ActivityUpdate => Self::ActivityUpdate(parse(kind, payload)?),
            MessageType::SendRequest => Self::SendRequest(parse(kind, payload)?),
            MessageType::Error => Self::Error(parse(kind, payload)?),
            MessageType::FunctionalityChange => Self::FunctionalityChange(parse(kind, payload)?),
            MessageType::TestToggle => Self::TestToggle(parse(kind, payload)?),
        })
    }
}

/// The full flag map, every flag present.
pub fn capability_map(set: &CapabilitySet) -> BTreeMap<Capability, bool> {
    Capability::ALL.iter().map(|c| (*c, set.has(*c))).collect()
}

pub fn capability_set(map: &BTreeMap<Capability, bool>) -> CapabilitySet {
    map.iter().filter(|(_, on)| **on).map(|(c, _)| *c).collect()
}
