use super::pcm::{ms_to_samples, Pcm};
use super::AudioError;

pub struct MixInput<'a> {
    pub start_ms: u64,
    pub volume: f64,
    pub pcm: &'a Pcm,
}

/// Mixes layer entries into one buffer.
///
/// Each entry is scaled by its volume and rounded (half away from zero)
/// before summing, so the integer sum does not depend on entry order. The
/// sum saturates to the i16 range. Output runs until the last entry ends.
pub fn mix_layers(entries: &[MixInput<'_>]) -> Result<Pcm, AudioError> {
    if entries.is_empty() {
        return Err(AudioError::EmptyInput("layer needs at least one entry"));
    }
    for e in entries {
        if !(0.0..=1.0).contains(&e.volume) {
            return Err(AudioError::InvalidVolume(e.volume));
        }
    }
    let len = entries
        .iter()
        .map(|e| ms_to_samples(e.start_ms) as usize + e.pcm.len())
        .max()
        .unwrap_or(0);
    let mut acc = vec![0i64; len];
    for e in entries {
        let start = ms_to_samples(e.start_ms) as usize;
        for (slot, s) in acc[start..].iter_mut().zip(&e.pcm.samples) {
            *slot += (f64::from(*s) * e.volume).round() as i64;
        }
    }
    Ok(Pcm::new(
        acc.into_iter()
            .map(|v| v.clamp(i64::from(i16::MIN), i64::from(i16::MAX)) as i16)
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_volume_halves_with_half_away_rounding() {
        let src = Pcm::new(vec![3, -3, 100, -101, 32767, -32768]);
        let out = mix_layers(&[MixInput {
            start_ms: 0,
            volume: 0.5,
            pcm: &src,
        }])
        .unwrap();
        assert_eq!(out.samples, vec![2, -2, 50, -51, 16384, -16384]);
    }

    #[test]
    fn zero_volume_is_silence_of_same_length() {
        let src = Pcm::new(vec![5; 441]);
        let out = mix_layers(&[MixInput {
            start_ms: 0,
            volume: 0.0,
            pcm: &src,
        }])
        .unwrap();
        assert_eq!(out, Pcm::silence(441));
    }

    #[test]
    fn start_offset_pads_with_silence() {
        let src = Pcm::new(vec![7; 10]);
        let out = mix_layers(&[MixInput {
            start_ms: 1,
            volume: 1.0,
            pcm: &src,
        }])
        .unwrap();
        assert_eq!(out.len(), 45 + 10);
        assert!(out.samples[..45].iter().all(|s| *s == 0));
        assert!(out.samples[45..].iter().all(|s| *s == 7));
    }

    #[test]
    fn sums_saturate() {
        let a = Pcm::new(vec![30_000, -30_000]);
        let out = mix_layers(&[
            MixInput { start_ms: 0, volume: 1.0, pcm: &a },
            MixInput { start_ms: 0, volume: 1.0, pcm: &a },
        ])
        .unwrap();
        assert_eq!(out.samples, vec![i16::MAX, i16::MIN]);
    }

    #[test]
    fn invalid_volume_and_empty_input() {
        let a = Pcm::new(vec![1]);
        assert_eq!(
            mix_layers(&[MixInput { start_ms: 0, volume: 1.5, pcm: &a }]),
            Err(AudioError::InvalidVolume(1.5))
        );
        assert!(mix_layers(&[MixInput { start_ms: 0, volume: f64::NAN, pcm: &a }]).is_err());
        assert!(mix_layers(&[]).is_err());
    }
}
