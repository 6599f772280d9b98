//! Ingestion: turn uploaded or fetched bytes into pipeline PCM.

use std::io::Cursor;

use symphonia::core::audio::SampleBuffer;
use symphonia::core::codecs::DecoderOptions;
use symphonia::core::errors::Error as SymphoniaError;
use symphonia::core::formats::FormatOptions;
use symphonia::core::io::MediaSourceStream;
use symphonia::core::meta::MetadataOptions;
use symphonia::core::probe::Hint;

use super::pcm::{saturate, Pcm, SAMPLE_RATE};
use super::wav::{self, RawAudio};
use super::AudioError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AudioContainer {
    Wav,
    Mp3,
    /// Headerless little-endian 16-bit mono at 44.1 kHz.
    RawPcm,
}

/// Picks a container from the declared media type, falling back to magic bytes.
pub fn sniff(bytes: &[u8], mime: Option<&str>) -> Option<AudioContainer> {
    let mime = mime.map(|m| m.split(';').next().unwrap_or("").trim().to_ascii_lowercase());
    match mime.as_deref() {
        Some("audio/wav" | "audio/wave" | "audio/x-wav" | "audio/vnd.wave") => {
            return Some(AudioContainer::Wav)
        }
        Some("audio/mpeg" | "audio/mp3" | "audio/mpeg3" | "audio/x-mpeg-3") => {
            return Some(AudioContainer::Mp3)
        }
        Some("audio/pcm" | "audio/l16") => return Some(AudioContainer::RawPcm),
        Some(m) if !m.starts_with("audio/") && m != "application/octet-stream" => return None,
        _ => {}
    }
    if bytes.len() >= 12 && &bytes[0..4] == b"RIFF" && &bytes[8..12] == b"WAVE" {
        Some(AudioContainer::Wav)
    } else if bytes.starts_with(b"ID3") || (bytes.len() >= 2 && bytes[0] == 0xFF && bytes[1] & 0xE0 == 0xE0) {
        Some(AudioContainer::Mp3)
    } else {
        None
    }
}

/// Decodes any accepted container to mono 44.1 kHz PCM16.
pub fn decode_audio(bytes: &[u8], mime: Option<&str>) -> Result<Pcm, AudioError> {
    let container = sniff(bytes, mime).ok_or(AudioError::NotAudio)?;
    let raw = match container {
        AudioContainer::Wav => wav::decode(bytes)?,
        AudioContainer::Mp3 => decode_mp3(bytes)?,
        AudioContainer::RawPcm => {
            if !bytes.len().is_multiple_of(2) {
                return Err(AudioError::Malformed("odd byte count for pcm16".into()));
            }
            RawAudio {
                channels: 1,
                sample_rate: SAMPLE_RATE,
                interleaved: Pcm::from_le_bytes(bytes).samples,
            }
        }
    };
    Ok(normalize(raw))
}

pub fn normalize(raw: RawAudio) -> Pcm {
    let mono = downmix(&raw.interleaved, raw.channels);
    resample_linear(&mono, raw.sample_rate, SAMPLE_RATE)
}

pub fn downmix(interleaved: &[i16], channels: u16) -> Vec<i16> {
    if channels <= 1 {
        return interleaved.to_vec();
    }
    interleaved
        .chunks_exact(channels as usize)
        .map(|frame| {
            let sum: i64 = frame.iter().map(|s| i64::from(*s)).sum();
            saturate(sum as f64 / f64::from(channels))
        })
        .collect()
}

/// Linear-interpolation resampler. Output length is the input length scaled
/// by the rate ratio, rounded to nearest.
pub fn resample_linear(samples: &[i16], from_rate: u32, to_rate: u32) -> Pcm {
    if from_rate == to_rate || samples.is_empty() {
        return Pcm::new(samples.to_vec());
    }
    let out_len = ((samples.len() as u64 * u64::from(to_rate) + u64::from(from_rate) / 2)
        / u64::from(from_rate))
    .max(1) as usize;
    let step = f64::from(from_rate) / f64::from(to_rate);
    let last = samples.len() - 1;
    let out = (0..out_len)
        .map(|i| {
            let pos = i as f64 * step;
            let idx = (pos.floor() as usize).min(last);
            let frac = pos - idx as f64;
            let a = f64::from(samples[idx]);
            let b = f64::from(samples[(idx + 1).min(last)]);
            saturate(a + (b - a) * frac)
        })
        .collect();
    Pcm::new(out)
}

fn decode_mp3(bytes: &[u8]) -> Result<RawAudio, AudioError> {
    let mss = MediaSourceStream::new(Box::new(Cursor::new(bytes.to_vec())), Default::default());
    let mut hint = Hint::new();
    hint.with_extension("mp3");
    let probed = symphonia::default::get_probe()
        .format(&hint, mss, &FormatOptions::default(), &MetadataOptions::default())
        .map_err(|e| AudioError::Malformed(format!("mp3 probe failed: {e}")))?;
    let mut format = probed.format;
    let track = format
        .default_track()
        .ok_or_else(|| AudioError::Malformed("mp3 has no audio track".into()))?;
    let track_id = track.id;
    let mut decoder = symphonia::default::get_codecs()
        .make(&track.codec_params, &DecoderOptions::default())
        .map_err(|e| AudioError::Unsupported(format!("mp3 codec: {e}")))?;

    let mut channels = 0u16;
    let mut rate = 0u32;
    let mut interleaved = Vec::new();
    loop {
        let packet = match format.next_packet() {
            Ok(p) => p,
            Err(SymphoniaError::IoError(e)) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(AudioError::Malformed(format!("mp3 read: {e}"))),
        };
        if packet.track_id() != track_id {
            continue;
        }
        let decoded = match decoder.decode(&packet) {
            Ok(d) => d,
            Err(SymphoniaError::DecodeError(_)) => continue,
            Err(e) => return Err(AudioError::Malformed(format!("mp3 decode: {e}"))),
        };
        let spec = *decoded.spec();
        channels = spec.channels.count() as u16;
        rate = spec.rate;
        let mut buf = SampleBuffer::<i16>::new(decoded.capacity() as u64, spec);
        buf.copy_interleaved_ref(decoded);
        interleaved.extend_from_slice(buf.samples());
    }
    if interleaved.is_empty() || channels == 0 {
        return Err(AudioError::Malformed("mp3 contained no audio frames".into()));
    }
    Ok(RawAudio {
        channels,
        sample_rate: rate,
        interleaved,
    })
}
