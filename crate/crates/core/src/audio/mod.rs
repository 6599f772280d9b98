//! Audio rendering: sentence concatenation with offset tables, layer
//! mixing, and text-to-speech through a pluggable adapter.

pub mod decode;
mod mix;
mod pcm;
mod sentence;
pub mod tts;
pub mod wav;

pub use mix::{mix_layers, MixInput};
pub use pcm::{ms_to_samples, samples_to_ms, Pcm, SAMPLE_RATE};
pub use sentence::{concatenate_sentence, reorder, slice_member, SentenceMember, SentenceRender};
pub use tts::{render_tts, HttpTts, HttpTtsConfig, ToneStub, TtsAdapter, TtsError, TtsRender};

use crate::model::ObjectId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AudioError {
    #[error("not an audio media type")]
    NotAudio,
    #[error("malformed audio: {0}")]
    Malformed(String),
    #[error("unsupported audio: {0}")]
    Unsupported(String),
    #[error("{0}")]
    EmptyInput(&'static str),
    #[error("member {0} has zero duration")]
    ZeroDuration(ObjectId),
    #[error("volume {0} outside [0,1]")]
    InvalidVolume(f64),
}
