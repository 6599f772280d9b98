use serde_json::{json, Value};
use telebrain_core::audio::TtsError;
use telebrain_core::config::ConfigError;
use telebrain_core::perpl::scenario::SimConfigError;
use telebrain_core::perpl::BubbleError;
use telebrain_core::store::StoreError;

/// A failure reported as one JSON object on stderr.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Bubble(#[from] BubbleError),
    #[error(transparent)]
    Simulation(#[from] SimConfigError),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Serve(#[from] telebrain_server::ServeError),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::Config(_) => "config",
            Self::Store(e) => store_code(e),
            Self::Bubble(_) => "invalid-argument",
            Self::Simulation(_) => "simulation",
            Self::Read { .. } => "read-failed",
            Self::Write { .. } => "write-failed",
            Self::Parse { .. } => "parse-failed",
            Self::Serve(_) => "serve-failed",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "error": { "code": self.code(), "message": self.to_string() } });
        let details = match self {
            Self::Store(StoreError::Invalid(violations)) | Self::Config(ConfigError::Invalid(violations)) => {
                Some(json!(violations
                    .0
                    .iter()
                    .map(|x| json!({ "field": x.field, "message": x.message }))
                    .collect::<Vec<_>>()))
            }
            Self::Store(StoreError::Referenced { by, .. }) => Some(json!(by)),
            Self::Store(StoreError::MissingReferences(ids)) => Some(json!(ids)),
            _ => None,
        };
        if let Some(d) = details {
            v["error"]["details"] = d;
        }
        v
    }
}

fn store_code(e: &StoreError) -> &'static str {
    match e {
        StoreError::NotFound(_) => "not-found",
        StoreError::Locked(_) => "locked",
        StoreError::AlreadyLocked(_) => "already-locked",
        StoreError::NotLocked(_) => "not-locked",
        StoreError::WrongPasscode(_) => "wrong-passcode",
        StoreError::Referenced { .. } => "referenced",
        StoreError::MissingReferences(_) => "missing-references",
        StoreError::WrongKind { .. } => "wrong-kind",
        StoreError::Invalid(_) => "validation",
        StoreError::Fetch(_) => "fetch-failed",
        StoreError::Copyrighted => "copyrighted",
        StoreError::NotAudio => "not-audio",
        StoreError::NotImage => "not-image",
        StoreError::BadImageUrl(_) => "bad-image-url",
        StoreError::Tts(TtsError::TooLong(_)) => "text-too-long",
        StoreError::Tts(TtsError::Empty) => "text-empty",
        StoreError::Tts(TtsError::Timeout(_)) => "tts-timeout",
        StoreError::Tts(TtsError::Adapter(_)) => "tts-failed",
        StoreError::Audio(_) => "audio",
        StoreError::MissingBlob(_) => "missing-blob",
        StoreError::Io(_) => "io",
        StoreError::Corrupt { .. } => "corrupt-store",
    }
}
