//! RIFF/WAVE reading and writing.
//!
//! Writing always produces the canonical 44-byte header followed by mono
//! PCM16 at 44.1 kHz. Reading accepts integer PCM of 8/16/24/32 bits and
//! 32-bit float, any channel count and any rate; callers normalize with
//! [`super::decode`].

use super::pcm::{Pcm, SAMPLE_RATE};
use super::AudioError;

pub const HEADER_LEN: usize = 44;

pub fn encode(pcm: &Pcm) -> Vec<u8> {
    let data_len = (pcm.len() * 2) as u32;
    let mut out = Vec::with_capacity(HEADER_LEN + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&SAMPLE_RATE.to_le_bytes());
    out.extend_from_slice(&(SAMPLE_RATE * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    out.extend_from_slice(&pcm.to_le_bytes());
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFormat {
    Int(u16),
    Float32,
}

/// Interleaved samples scaled to i16 range, as stored in the file.
#[derive(Clone, Debug, PartialEq)]
pub struct RawAudio {
    pub channels: u16,
    pub sample_rate: u32,
    pub interleaved: Vec<i16>,
}

pub fn decode(bytes: &[u8]) -> Result<RawAudio, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::Malformed("missing RIFF/WAVE header".into()));
    }
    let mut pos = 12;
    let mut format: Option<(SampleFormat, u16, u32)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let len = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(len)
            .filter(|end| *end <= bytes.len())
            .ok_or_else(|| AudioError::Malformed(format!("chunk at byte {pos} overruns file")))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => format = Some(parse_fmt(body)?),
            b"data" => {
                let (fmt, channels, rate) = format
                    .ok_or_else(|| AudioError::Malformed("data chunk before fmt chunk".into()))?;
                return Ok(RawAudio {
                    channels,
                    sample_rate: rate,
                    interleaved: convert(body, fmt)?,
                });
            }
            _ => {}
        }
        // chunks are word aligned
        pos = body_end + (len & 1);
    }
    Err(AudioError::Malformed("no data chunk".into()))
}

fn parse_fmt(body: &[u8]) -> Result<(SampleFormat, u16, u32), AudioError> {
    if body.len() < 16 {
        return Err(AudioError::Malformed("fmt chunk too short".into()));
    }
    let mut tag = u16::from_le_bytes([body[0], body[1]]);
    let channels = u16::from_le_bytes([body[2], body[3]]);
    let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
    let bits = u16::from_le_bytes([body[14], body[15]]);
    if tag == 0xFFFE && body.len() >= 26 {
        // WAVE_FORMAT_EXTENSIBLE: the sub-format GUID starts with the real tag
        tag = u16::from_le_bytes([body[24], body[25]]);
    }
    if channels == 0 || rate == 0 {
        return Err(AudioError::Malformed("zero channels or sample rate".into()));
    }
    let fmt = match (tag, bits) {
        (1, 8 | 16 | 24 | 32) => SampleFormat::Int(bits),
        (3, 32) => SampleFormat::Float32,
        _ => {
            return Err(AudioError::Unsupported(format!(
                "wav format tag {tag} with {bits} bits"
            )))
        }
    };
    Ok((fmt, channels, rate))
}

fn convert(data: &[u8], fmt: SampleFormat) -> Result<Vec<i16>, AudioError> {
    Ok(match fmt {
        SampleFormat::Int(8) => data.iter().map(|b| (i16::from(*b) - 128) << 8).collect(),
        SampleFormat::Int(16) => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]))
            .collect(),
        SampleFormat::Int(24) => data
            .chunks_exact(3)
            .map(|c| (i32::from_le_bytes([0, c[0], c[1], c[2]]) >> 16) as i16)
            .collect(),
        SampleFormat::Int(32) => data
            .chunks_exact(4)
            .map(|c| (i32::from_le_bytes([c[0], c[1], c[2], c[3]]) >> 16) as i16)
            .collect(),
        SampleFormat::Float32 => data
            .chunks_exact(4)
            .map(|c| {
                let f = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                super::pcm::saturate(f64::from(f) * 32767.0)
            })
            .collect(),
        SampleFormat::Int(bits) => {
            return Err(AudioError::Unsupported(format!("{bits}-bit integer pcm")))
        }
    })
}

/// The PCM payload of a canonical WAV produced by [`encode`].
pub fn canonical_payload(bytes: &[u8]) -> Result<&[u8], AudioError> {
    if bytes.len() < HEADER_LEN || &bytes[36..40] != b"data" {
        return Err(AudioError::Malformed("not a canonical wav".into()));
    }
    Ok(&bytes[HEADER_LEN..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_header_layout() {
        let wav = encode(&Pcm::new(vec![1, -1, 300]));
        assert_eq!(wav.len(), HEADER_LEN + 6);
        assert_eq!(&wav[0..4], b"RIFF");
        assert_eq!(u32::from_le_bytes(wav[4..8].try_into().unwrap()), 42);
        assert_eq!(u32::from_le_bytes(wav[24..28].try_into().unwrap()), 44_100);
        assert_eq!(u32::from_le_bytes(wav[40..44].try_into().unwrap()), 6);
        assert_eq!(&wav[44..], &[1, 0, 0xff, 0xff, 0x2c, 0x01]);
    }

    #[test]
    fn decode_reads_what_encode_writes() {
        let pcm = Pcm::new((0..1000).map(|i| (i * 37 % 2000 - 1000) as i16).collect());
        let raw = decode(&encode(&pcm)).unwrap();
        assert_eq!(raw.channels, 1);
        assert_eq!(raw.sample_rate, 44_100);
        assert_eq!(raw.interleaved, pcm.samples);
    }

    #[test]
    fn truncated_chunk_is_malformed() {
        let mut wav = encode(&Pcm::new(vec![0; 10]));
        wav.truncate(50);
        assert!(matches!(decode(&wav), Err(AudioError::Malformed(_))));
        assert!(decode(b"<html></html>").is_err());
    }

    #[test]
    fn eight_and_float_formats_convert() {
        assert_eq!(convert(&[128, 255, 0], SampleFormat::Int(8)).unwrap(), vec![0, 127 << 8, -32768]);
        let f: Vec<u8> = [0.5f32, -1.0].iter().flat_map(|f| f.to_le_bytes()).collect();
        assert_eq!(convert(&f, SampleFormat::Float32).unwrap(), vec![16384, -32767]);
    }
}
