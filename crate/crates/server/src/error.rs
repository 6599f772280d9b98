use serde_json::json;
use telebrain_core::venue::VenueError;
use telebrain_core::wire::{ErrorFrame, WireError};

/// Everything a connection can be told went wrong. Each variant maps to a
/// stable `code` in the error frame.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ServerError {
    #[error(transparent)]
    Venue(#[from] VenueError),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error("no venue named or identified by {0}")]
    UnknownVenue(String),
    #[error("this connection has not joined a performance")]
    NotJoined,
    #[error("this connection is already in performance {0}")]
    AlreadyJoined(String),
    #[error("clients may not send {0} frames")]
    UnexpectedType(&'static str),
    #[error("expected seq {expected}, got {got}")]
    SeqGap { expected: u64, got: u64 },
    #[error("seq {got} does not follow {last}")]
    SeqRegression { last: u64, got: u64 },
    #[error("only text frames are accepted")]
    BinaryFrame,
    #[error("too many malformed frames in a row")]
    Flood,
}

impl ServerError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Venue(e) => e.code(),
            Self::Wire(e) => e.code(),
            Self::UnknownVenue(_) => "unknown_venue",
            Self::NotJoined => "not_joined",
            Self::AlreadyJoined(_) => "already_joined",
            Self::UnexpectedType(_) => "unexpected_type",
            Self::SeqGap { .. } => "seq_gap",
            Self::SeqRegression { .. } => "seq_regression",
            Self::BinaryFrame => "malformed",
            Self::Flood => "flood",
        }
    }

    /// Whether the connection is closed after reporting this.
    pub fn is_fatal(&self) -> bool {
        matches!(self, Self::SeqRegression { .. } | Self::Flood)
    }

    pub fn frame(&self, in_reply_to: Option<u64>) -> ErrorFrame {
        let details = match self {
            Self::Venue(VenueError::NoTargets(rejections)) => Some(json!({ "rejections": rejections })),
            Self::SeqGap { expected, got } => Some(json!({ "expected": expected, "got": got })),
            Self::SeqRegression { last, got } => Some(json!({ "last": last, "got": got })),
            _ => None,
        };
        ErrorFrame {
            code: self.code().to_string(),
            message: self.to_string(),
            in_reply_to,
            details,
        }
    }
}
