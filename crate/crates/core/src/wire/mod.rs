//! Client/server frames carried over the `/perform` WebSocket.
//!
//! Every frame is a UTF-8 JSON object `{"type", "seq", "payload", ...}`.
//! Fields this version does not know are kept and written back unchanged.

mod golden;
mod payload;
mod seq;

pub use golden::{golden_corpus, write_golden};
pub use payload::*;
pub use seq::{SeqCounter, SeqStatus, SeqTracker};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

macro_rules! message_types {
    ($( $variant:ident => $tag:literal ),* $(,)?) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum MessageType {
            $( #[serde(rename = $tag)] $variant, )*
        }

        impl MessageType {
            pub const ALL: &'static [MessageType] = &[$(MessageType::$variant),*];

            pub fn tag(self) -> &'static str {
                match self {
                    $(MessageType::$variant => $tag,)*
                }
            }

            pub fn from_tag(tag: &str) -> Option<Self> {
                match tag {
                    $($tag => Some(MessageType::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

message_types! {
    Join => "join",
    JoinAck => "join_ack",
    Leave => "leave",
    RosterUpdate => "roster_update",
    Cue => "cue",
    CueAck => "cue_ack",
    ClockPing => "clock_ping",
    ClockPong => "clock_pong",
    ActivityUpdate => "activity_update",
    SendRequest => "send_request",
    Error => "error",
    FunctionalityChange => "functionality_change",
    TestToggle => "test_toggle",
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("malformed frame: {0}")]
    Malformed(String),
    #[error("unknown message type {0:?}")]
    UnknownType(String),
    #[error("frame is missing {0}")]
    MissingField(&'static str),
    #[error("bad {kind} payload: {reason}")]
    BadPayload { kind: &'static str, reason: String },
}

impl WireError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Malformed(_) | Self::MissingField(_) => "malformed",
            Self::UnknownType(_) => "unknown_type",
            Self::BadPayload { .. } => "bad_payload",
        }
    }
}

/// One frame, with any unrecognised top-level fields in `extra`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub kind: MessageType,
    pub seq: u64,
    pub payload: Value,
    pub extra: Map<String, Value>,
}

impl Frame {
    pub fn new(kind: MessageType, seq: u64, payload: Value) -> Self {
        Self {
            kind,
            seq,
            payload,
            extra: Map::new(),
        }
    }

    pub fn from_message(seq: u64, msg: &Message) -> Self {
        Self::new(msg.kind(), seq, msg.payload_value())
    }

    pub fn message(&self) -> Result<Message, WireError> {
        Message::from_parts(self.kind, &self.payload)
    }
}

pub fn serialize(frame: &Frame) -> String {
    let mut obj = Map::new();
    obj.insert("type".into(), Value::String(frame.kind.tag().into()));
    obj.insert("seq".into(), Value::from(frame.seq));
    obj.insert("payload".into(), frame.payload.clone());
    for (k, v) in &frame.extra {
        obj.insert(k.clone(), v.clone());
    }
    Value::Object(obj).to_string()
}

pub fn deserialize(text: &str) -> Result<Frame, WireError> {
    let value: Value = serde_json::from_str(text).map_err(|e| WireError::Malformed(e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(WireError::Malformed("frame is not a json object".into()));
    };
    let tag = match obj.remove("type") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(WireError::Malformed("type must be a string".into())),
        None => return Err(WireError::MissingField("type")),
    };
    let kind = MessageType::from_tag(&tag).ok_or(WireError::UnknownType(tag))?;
    let seq = match obj.remove("seq") {
        Some(v) => v
            .as_u64()
            .ok_or_else(|| WireError::Malformed("seq must be a non-negative integer".into()))?,
        None => return Err(WireError::MissingField("seq")),
    };
    let payload = obj.remove("payload").unwrap_or(Value::Object(Map::new()));
    Ok(Frame {
        kind,
        seq,
        payload,
        extra: obj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn unknown_fields_survive() {
        let text = r#"{"type":"clock_ping","seq":4,"payload":{"t0":17,"future":[1,2]},"trace":"abc"}"#;
        let frame = deserialize(text).unwrap();
        assert_eq!(frame.extra["trace"], "abc");
        let again = deserialize(&serialize(&frame)).unwrap();
        assert_eq!(again, frame);
        assert_eq!(again.payload["future"], json!([1, 2]));
        assert_eq!(frame.message().unwrap(), Message::ClockPing(ClockPing { t0: 17 }));
    }

    #[test]
    fn rejects_unknown_type_and_garbage() {
        assert_eq!(
            deserialize(r#"{"type":"dance","seq":1,"payload":{}}"#),
            Err(WireError::UnknownType("dance".into()))
        );
        assert!(matches!(deserialize("{not json"), Err(WireError::Malformed(_))));
        assert_eq!(deserialize(r#"{"seq":1}"#), Err(WireError::MissingField("type")));
        assert!(matches!(deserialize(r#"{"type":"leave","seq":-1}"#), Err(WireError::Malformed(_))));
    }

    #[test]
    fn tags_round_trip() {
        for t in MessageType::ALL {
            assert_eq!(MessageType::from_tag(t.tag()), Some(*t));
        }
        assert_eq!(MessageType::ALL.len(), 13);
    }
}
