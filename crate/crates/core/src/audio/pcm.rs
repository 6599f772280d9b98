/// Every buffer inside the pipeline is mono 16-bit PCM at this rate.
pub const SAMPLE_RATE: u32 = 44_100;

/// Mono 16-bit PCM at [`SAMPLE_RATE`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Pcm {
    pub samples: Vec<i16>,
}

impl Pcm {
    pub fn new(samples: Vec<i16>) -> Self {
        Self { samples }
    }

    pub fn silence(len: usize) -> Self {
        Self {
            samples: vec![0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Duration rounded to the nearest millisecond (halves round up).
    pub fn duration_ms(&self) -> u64 {
        samples_to_ms(self.samples.len() as u64)
    }

    /// Little-endian sample bytes, exactly as they appear in a WAV data chunk.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.samples.iter().flat_map(|s| s.to_le_bytes()).collect()
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Self {
        Self {
            samples: bytes
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]))
                .collect(),
        }
    }
}

pub fn samples_to_ms(samples: u64) -> u64 {
    (samples * 1000 + u64::from(SAMPLE_RATE) / 2) / u64::from(SAMPLE_RATE)
}

/// First sample at or after `ms`.
pub fn ms_to_samples(ms: u64) -> u64 {
    (ms * u64::from(SAMPLE_RATE)).div_ceil(1000)
}

/// `f64::round` rounds half away from zero, which is the documented policy.
pub(crate) fn saturate(value: f64) -> i16 {
    let r = value.round();
    if r >= f64::from(i16::MAX) {
        i16::MAX
    } else if r <= f64::from(i16::MIN) {
        i16::MIN
    } else {
        r as i16
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duration_rounding() {
        assert_eq!(samples_to_ms(52_920), 1200);
        assert_eq!(samples_to_ms(44_100), 1000);
        assert_eq!(samples_to_ms(22), 0);
        assert_eq!(samples_to_ms(23), 1);
        assert_eq!(ms_to_samples(1000), 44_100);
        assert_eq!(ms_to_samples(1), 45);
    }

    #[test]
    fn saturate_rounds_half_away_from_zero() {
        assert_eq!(saturate(2.5), 3);
        assert_eq!(saturate(-2.5), -3);
        assert_eq!(saturate(40_000.0), i16::MAX);
        assert_eq!(saturate(-40_000.0), i16::MIN);
    }
}
