//! Core of the Telebrain stage server.
//!
//! Telebrain stores multi-media performance instructions and distributes
//! them in real time to role-typed performers inside live performances,
//! with clock-synchronized execution. The crate is organised by subsystem:
//!
//! - [`model`]: persistent value types and their validation
//! - [`store`]: on-disk document and blob store with media ingestion
//! - [`audio`]: sentence concatenation, layer mixing and text-to-speech
//! - [`timing`]: clock offset estimation, cue scheduling, timers and metronomes
//! - [`venue`]: live performances, rosters, routing and activity logs
//! - [`osc`]: OSC 1.0 codec and address bindings
//! - [`wire`]: client/server message frames
//! - [`perpl`]: PerPL instruction builders and the virtual-performer simulator
//! - [`config`]: server configuration

pub mod audio;
pub mod config;
pub mod model;
pub mod osc;
pub mod perpl;
pub mod store;
pub mod timing;
pub mod venue;
pub mod wire;

use sha2::{Digest, Sha256};

/// Longest text accepted for text-to-speech, in characters.
pub const MAX_TTS_CHARS: usize = 100;

/// Hex SHA-256 of `bytes`; used as the blob id.
pub fn content_address(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
