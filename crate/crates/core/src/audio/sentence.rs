use crate::model::ObjectId;

use super::pcm::Pcm;
use super::{wav, AudioError};

pub struct SentenceMember<'a> {
    pub id: ObjectId,
    pub pcm: &'a Pcm,
}

/// A rendered Audio Sentence and its offset table.
///
/// `offsets_ms` are prefix sums of the members' millisecond durations.
/// `offset_samples` are the sample-exact start positions used to slice the
/// rendered data back into its members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceRender {
    pub members: Vec<ObjectId>,
    pub offsets_ms: Vec<u64>,
    pub offset_samples: Vec<u64>,
    pub member_samples: Vec<u64>,
    pub total_duration_ms: u64,
    pub pcm: Pcm,
    pub wav: Vec<u8>,
    pub blob_id: String,
}

pub fn concatenate_sentence(members: &[SentenceMember<'_>]) -> Result<SentenceRender, AudioError> {
    if members.is_empty() {
        return Err(AudioError::EmptyInput("sentence needs at least one member"));
    }
    let mut offsets_ms = Vec::with_capacity(members.len());
    let mut offset_samples = Vec::with_capacity(members.len());
    let mut member_samples = Vec::with_capacity(members.len());
    let mut ms = 0u64;
    let mut at = 0u64;
    let mut samples = Vec::with_capacity(members.iter().map(|m| m.pcm.len()).sum());
    for m in members {
        let duration = m.pcm.duration_ms();
        if m.pcm.is_empty() || duration == 0 {
            return Err(AudioError::ZeroDuration(m.id.clone()));
        }
        offsets_ms.push(ms);
        offset_samples.push(at);
        member_samples.push(m.pcm.len() as u64);
        ms += duration;
        at += m.pcm.len() as u64;
        samples.extend_from_slice(&m.pcm.samples);
    }
    let pcm = Pcm::new(samples);
    let wav = wav::encode(&pcm);
    Ok(SentenceRender {
        members: members.iter().map(|m| m.id.clone()).collect(),
        offsets_ms,
        offset_samples,
        member_samples,
        total_duration_ms: ms,
        blob_id: crate::content_address(&wav),
        pcm,
        wav,
    })
}

/// Recovers member `k` from a rendered sentence file.
pub fn slice_member(sentence_wav: &[u8], offset_samples: u64, len_samples: u64) -> Result<Pcm, AudioError> {
    let payload = wav::canonical_payload(sentence_wav)?;
    let start = offset_samples as usize * 2;
    let end = start + len_samples as usize * 2;
    if end > payload.len() {
        return Err(AudioError::Malformed("slice past end of sentence".into()));
    }
    Ok(Pcm::from_le_bytes(&payload[start..end]))
}

/// Replays a delivered sentence in a different member order without
/// re-rendering, using only the file and its offset table.
pub fn reorder(sentence_wav: &[u8], offset_samples: &[u64], member_samples: &[u64], order: &[usize]) -> Result<Pcm, AudioError> {
    let mut out = Vec::new();
    for &k in order {
        let (Some(off), Some(len)) = (offset_samples.get(k), member_samples.get(k)) else {
            return Err(AudioError::Malformed(format!("no sentence member {k}")));
        };
        out.extend(slice_member(sentence_wav, *off, *len)?.samples);
    }
    Ok(Pcm::new(out))
}
