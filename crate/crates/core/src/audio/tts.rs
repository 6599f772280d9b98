//! Text-to-speech adapters.
//!
//! [`ToneStub`] is the default: it needs no network and is deterministic.
//! [`HttpTts`] talks to an external synthesis endpoint and is only used when
//! configured.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::pcm::{saturate, Pcm, SAMPLE_RATE};
use super::{decode, wav};
use crate::MAX_TTS_CHARS;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TtsError {
    #[error("tts text must not be empty")]
    Empty,
    #[error("tts text is {0} characters; the limit is 100")]
    TooLong(usize),
    #[error("tts adapter timed out after {0} ms")]
    Timeout(u64),
    #[error("tts adapter failed: {0}")]
    Adapter(String),
}

pub trait TtsAdapter: Send + Sync {
    fn render(&self, text: &str, language: &str) -> Result<Pcm, TtsError>;

    /// Deterministic adapters return identical audio for identical input.
    fn is_deterministic(&self) -> bool;
}

/// Renders each character as a 50 ms sine tone.
///
/// The tone for character `c` has frequency `200 + 10 * (c % 100)` Hz and
/// amplitude 8000; the phase restarts at every character. The language tag
/// is ignored.
#[derive(Clone, Copy, Debug, Default)]
pub struct ToneStub;

impl ToneStub {
    pub const TONE_MS: u64 = 50;
    pub const AMPLITUDE: f64 = 8000.0;

    pub fn frequency(c: char) -> f64 {
        200.0 + 10.0 * f64::from(u32::from(c) % 100)
    }
}

impl TtsAdapter for ToneStub {
    fn render(&self, text: &str, _language: &str) -> Result<Pcm, TtsError> {
        let per_char = (u64::from(SAMPLE_RATE) * Self::TONE_MS / 1000) as usize;
        let mut samples = Vec::with_capacity(per_char * text.chars().count());
        for c in text.chars() {
            let f = Self::frequency(c);
            samples.extend((0..per_char).map(|n| {
                saturate(Self::AMPLITUDE * (2.0 * PI * f * n as f64 / f64::from(SAMPLE_RATE)).sin())
            }));
        }
        Ok(Pcm::new(samples))
    }

    fn is_deterministic(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpTtsConfig {
    pub endpoint: String,
    /// Maps our language tags to the service's voice or locale names.
    #[serde(default)]
    pub language_map: BTreeMap<String, String>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    3000
}

/// Client for a synthesis service answering
/// `GET <endpoint>?text=<text>&lang=<language>` with WAV or MP3 bytes.
///
/// The whole request, body included, must finish within `timeout_ms`.
pub struct HttpTts {
    config: HttpTtsConfig,
}

impl HttpTts {
    pub fn new(config: HttpTtsConfig) -> Self {
        Self { config }
    }
}

impl TtsAdapter for HttpTts {
    fn render(&self, text: &str, language: &str) -> Result<Pcm, TtsError> {
        let lang = self
            .config
            .language_map
            .get(language)
            .map(String::as_str)
            .unwrap_or(language);
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(self.config.timeout_ms))
            .build()
            .map_err(|e| TtsError::Adapter(format!("client setup: {e}")))?;
        let resp = client
            .get(&self.config.endpoint)
            .query(&[("text", text), ("lang", lang)])
            .send()
            .map_err(|e| {
                if e.is_timeout() {
                    TtsError::Timeout(self.config.timeout_ms)
                } else {
                    TtsError::Adapter(format!("request to {} failed: {e}", self.config.endpoint))
                }
            })?;
        let status = resp.status();
        let mime = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = resp.bytes().map_err(|e| {
            if e.is_timeout() {
                TtsError::Timeout(self.config.timeout_ms)
            } else {
                TtsError::Adapter(format!("reading response: {e}"))
            }
        })?;
        if !status.is_success() {
            let snippet: String = String::from_utf8_lossy(&body).chars().take(200).collect();
            return Err(TtsError::Adapter(format!("service answered {status}: {snippet}")));
        }
        decode::decode_audio(&body, mime.as_deref())
            .map_err(|e| TtsError::Adapter(format!("undecodable audio from service: {e}")))
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}

/// TTS output ready to be stored as a blob.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TtsRender {
    pub pcm: Pcm,
    pub wav: Vec<u8>,
    pub blob_id: String,
    pub duration_ms: u64,
}

pub fn check_tts_text(text: &str) -> Result<(), TtsError> {
    let n = text.chars().count();
    if n == 0 {
        Err(TtsError::Empty)
    } else if n > MAX_TTS_CHARS {
        Err(TtsError::TooLong(n))
    } else {
        Ok(())
    }
}

/// Validates the text, then renders it. The adapter is never called for
/// rejected text.
pub fn render_tts(text: &str, language: &str, adapter: &dyn TtsAdapter) -> Result<TtsRender, TtsError> {
    check_tts_text(text)?;
    let pcm = adapter.render(text, language)?;
    if pcm.is_empty() {
        return Err(TtsError::Adapter("adapter returned no audio".into()));
    }
    let wav = wav::encode(&pcm);
    Ok(TtsRender {
        duration_ms: pcm.duration_ms(),
        blob_id: crate::content_address(&wav),
        pcm,
        wav,
    })
}
