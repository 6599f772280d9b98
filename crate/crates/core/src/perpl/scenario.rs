//! The sounds, spoken phrases and instruction blocks of the published
//! PerPL examples, as an in-memory catalog.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::*;
use crate::audio::ToneStub;
use crate::model::{BlobOrigin, BlobRef, ContentKind, ContentObject, Media};

/// Object ids used by the example catalog.
pub mod ids {
    pub const SHLOOEEP: &str = "snd-shlooeep";
    pub const PLEEOOSH: &str = "snd-pleeoosh";
    pub const SHWISH: &str = "snd-shwish";
    pub const SHWISHWISH: &str = "snd-shwishwish";
    pub const BRAAMFDING: &str = "snd-braamfding";
    pub const WEWAWOWU: &str = "snd-wewawowu";
    pub const SINE_1000: &str = "snd-sine-1000hz";
    pub const CLUNK: &str = "snd-clunk";
    pub const BLEEEEEEP: &str = "snd-bleeeeeeep";
    pub const BEEP: &str = "snd-beep";
    pub const BLEEP_BLOOP: &str = "snd-bleep-bloop";
    pub const SHAA_CHUNK: &str = "snd-shaa-chunk";
    pub const CHUNK: &str = "snd-chunk";

    pub const WHEN: &str = "tts-when";
    pub const WHEN_EACH: &str = "tts-when-each";
    pub const PERFORM_FOLLOWING: &str = "tts-perform-following";
    pub const WHILE_EACH: &str = "tts-while-each";
    pub const STAND: &str = "tts-stand";
    pub const SIT: &str = "tts-sit";
    pub const SPIN_ONCE: &str = "tts-spin-once";
    pub const SPIN_TWICE: &str = "tts-spin-twice";
    pub const SQUAT: &str = "tts-squat";
    pub const TOUCH_TOES: &str = "tts-touch-toes";
    pub const STAND_SIT_SWITCH: &str = "tts-stand-sit-switch";
    pub const IMITATE: &str = "tts-imitate";
    pub const STOP_IMITATING: &str = "tts-stop-imitating";
    pub const IF_ELSE_EXPLAINED: &str = "tts-if-else";
}

/// `(id, name, duration ms)` for the uploaded sounds.
const SOUNDS: &[(&str, &str, u64)] = &[
    (ids::SHLOOEEP, "SHLOOEEP", 700),
    (ids::PLEEOOSH, "PLEEOOSH", 700),
    (ids::SHWISH, "SHWISH", 400),
    (ids::SHWISHWISH, "SHWISHWISH", 800),
    (ids::BRAAMFDING, "BRAAMFDING", 900),
    (ids::WEWAWOWU, "WEWAWOWU", 1000),
    (ids::SINE_1000, "1000Hz sine tone", 1000),
    (ids::CLUNK, "CLUNK", 300),
    (ids::BLEEEEEEP, "Bleeeep", 1200),
    (ids::BEEP, "BEEP", 250),
    (ids::BLEEP_BLOOP, "BLEEP-BLOOP", 500),
    (ids::SHAA_CHUNK, "shaa-CHUNK", 600),
    (ids::CHUNK, "CHUNK", 150),
];

/// `(id, spoken text, actions asked for)`.
const PHRASES: &[(&str, &str, &[&str])] = &[
    (ids::WHEN, "When you hear this sound", &[]),
    (ids::WHEN_EACH, "When you hear each sound", &[]),
    (ids::PERFORM_FOLLOWING, "perform the action that follows", &[]),
    (ids::WHILE_EACH, "While each sound plays, perform its action", &[]),
    (ids::STAND, "stand", &["stand"]),
    (ids::SIT, "sit", &["sit"]),
    (ids::SPIN_ONCE, "spin once", &["spin-once"]),
    (ids::SPIN_TWICE, "spin twice", &["spin-twice"]),
    (ids::SQUAT, "squat while raising your right arm", &["squat-raise-arm"]),
    (ids::TOUCH_TOES, "touch your toes", &["touch-toes"]),
    (ids::STAND_SIT_SWITCH, "if standing sit else stand", &["stand-sit-switch"]),
    (ids::IMITATE, "vocally imitate what you hear next", &["begin-imitate"]),
    (ids::STOP_IMITATING, "stop imitating", &["end-imitate"]),
    (
        ids::IF_ELSE_EXPLAINED,
        "if you hear the sound for an action overlaid with this sound",
        &[],
    ),
];

/// The six trained sounds and the phrase each stands for.
pub const SIX_ACTIONS: [(&str, &str); 6] = [
    (ids::SHLOOEEP, ids::STAND),
    (ids::PLEEOOSH, ids::SIT),
    (ids::SHWISH, ids::SPIN_ONCE),
    (ids::SHWISHWISH, ids::SPIN_TWICE),
    (ids::BRAAMFDING, ids::SQUAT),
    (ids::WEWAWOWU, ids::TOUCH_TOES),
];

fn audio(id: &str, kind: ContentKind, name: &str, duration_ms: u64, origin: BlobOrigin) -> Document {
    Document::Content(ContentObject {
        id: ObjectId::from(id),
        kind,
        name: name.into(),
        media: Media::Blob(BlobRef {
            blob_id: format!("blob-{id}"),
            mime: "audio/wav".into(),
            origin,
            sample_count: Some(duration_ms * 441 / 10),
        }),
        duration_ms: Some(duration_ms),
        lock: None,
    })
}

pub fn catalog() -> BTreeMap<ObjectId, Document> {
    let sounds = SOUNDS
        .iter()
        .map(|(id, name, ms)| audio(id, ContentKind::AudioUpload, name, *ms, BlobOrigin::Upload));
    let phrases = PHRASES.iter().map(|(id, text, _)| {
        let ms = text.chars().count() as u64 * ToneStub::TONE_MS;
        let origin = BlobOrigin::Tts {
            language: "en".into(),
            text: (*text).into(),
        };
        audio(id, ContentKind::AudioTts, text, ms, origin)
    });
    sounds.chain(phrases).map(|d| (d.id().clone(), d)).collect()
}

pub fn lexicon() -> Lexicon {
    PHRASES
        .iter()
        .map(|(id, _, actions)| (ObjectId::from(*id), actions.iter().map(|a| a.to_string()).collect()))
        .collect()
}

fn oid(id: &str) -> ObjectId {
    ObjectId::from(id)
}

fn say(id: &str) -> PerplInstruction {
    PerplInstruction::new(vec![Step::play(id)])
}

/// `When + Bleeeep + Sit/Stand-Switch`.
pub fn bleeeep_training() -> PerplInstruction {
    build_training(&catalog(), &oid(ids::WHEN), &oid(ids::BLEEEEEEP), &say(ids::STAND_SIT_SWITCH))
        .expect("example catalog is complete")
}

pub fn quotation_training() -> PerplInstruction {
    let cat = catalog();
    let open = build_training(&cat, &oid(ids::WHEN), &oid(ids::BEEP), &say(ids::IMITATE));
    let close = build_training(&cat, &oid(ids::WHEN), &oid(ids::BLEEP_BLOOP), &say(ids::STOP_IMITATING));
    open.expect("example catalog is complete") + close.expect("example catalog is complete")
}

pub fn six_actions_training() -> PerplInstruction {
    let intro = PerplInstruction::new(vec![Step::play(ids::WHEN_EACH), Step::play(ids::PERFORM_FOLLOWING)]);
    let pairs: Vec<_> = SIX_ACTIONS.iter().map(|(snd, word)| (oid(snd), say(word))).collect();
    build_training_sequence(&catalog(), &intro, &pairs).expect("example catalog is complete")
}

/// The practice block: a spoken lead-in, then each sound and its pause.
pub fn six_actions_practice() -> PerplInstruction {
    let block: [(&str, u64); 12] = [
        (ids::SHLOOEEP, 1000),
        (ids::PLEEOOSH, 1000),
        (ids::SHWISH, 1000),
        (ids::SHWISHWISH, 1000),
        (ids::BRAAMFDING, 600),
        (ids::WEWAWOWU, 600),
        (ids::BRAAMFDING, 600),
        (ids::SHWISHWISH, 3000),
        (ids::PLEEOOSH, 2000),
        (ids::SHLOOEEP, 5000),
        (ids::SHWISH, 500),
        (ids::WEWAWOWU, 0),
    ];
    let mut steps = vec![Step::play(ids::WHILE_EACH), Step::pause(3000)];
    for (snd, ms) in block {
        steps.push(Step::play(snd));
        if ms > 0 {
            steps.push(Step::pause(ms));
        }
    }
    PerplInstruction::new(steps).with_meaning(Meaning::Practice)
}

pub fn if_else_training() -> PerplInstruction {
    build_if_else_training(&catalog(), &say(ids::IF_ELSE_EXPLAINED), &oid(ids::SINE_1000), &oid(ids::CLUNK))
        .expect("example catalog is complete")
}

/// `if (condition) then; else otherwise;` with the trained markers.
pub fn conditional(condition: &str, then: &str, otherwise: &str) -> PerplInstruction {
    encode_conditional(
        &catalog(),
        &oid(condition),
        &oid(then),
        &oid(otherwise),
        &oid(ids::SINE_1000),
        &oid(ids::CLUNK),
    )
    .expect("example catalog is complete")
}

/// The five If-Else practice blocks, in order.
pub fn if_else_practice() -> Vec<PerplInstruction> {
    let layer = |snd: &str| Step::Layer {
        audio: vec![oid(ids::SINE_1000), oid(snd)],
    };
    // if (squatting) touch toes; if (spinning once) squat; else spin twice;
    let fourth = PerplInstruction::new(vec![
        layer(ids::BRAAMFDING),
        Step::play(ids::WEWAWOWU),
        layer(ids::SHWISH),
        Step::play(ids::BRAAMFDING),
        Step::play(ids::CLUNK),
        Step::play(ids::SHWISHWISH),
    ]);
    vec![
        conditional(ids::SHLOOEEP, ids::PLEEOOSH, ids::SHLOOEEP),
        conditional(ids::PLEEOOSH, ids::SHLOOEEP, ids::PLEEOOSH),
        conditional(ids::SHLOOEEP, ids::SHWISH, ids::BRAAMFDING),
        fourth,
        conditional(ids::BRAAMFDING, ids::SHLOOEEP, ids::PLEEOOSH),
    ]
}

pub fn two_part_trigger_training() -> PerplInstruction {
    let body = PerplInstruction::new(vec![Step::play(ids::CHUNK)]);
    build_training(&catalog(), &oid(ids::WHEN), &oid(ids::SHAA_CHUNK), &body).expect("example catalog is complete")
}

/// The printed practice block: seven timed triggers, then three more
/// back to back.
pub fn two_part_trigger_practice() -> PerplInstruction {
    build_two_part_trigger_practice(&oid(ids::SHAA_CHUNK), &[1000, 8000, 600, 400, 200, 100, 50, 0, 0])
        .expect("pauses are non-negative")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Six-actions training followed by its practice block.
    SixActions,
    /// Six-actions and If-Else training, then the If-Else practice blocks.
    IfElse,
    /// Bleeeep training, then Bleeeep sent twice.
    StandSitSwitch,
}

impl Scenario {
    pub fn stream(self) -> Vec<PerplInstruction> {
        match self {
            Self::SixActions => vec![six_actions_training(), six_actions_practice()],
            Self::IfElse => {
                let mut s = vec![six_actions_training(), if_else_training()];
                s.extend(if_else_practice());
                s
            }
            Self::StandSitSwitch => vec![bleeeep_training(), say(ids::BLEEEEEEP), say(ids::BLEEEEEEP)],
        }
    }
}

/// A simulation run over the example catalog. `stream` replaces the
/// scenario's instructions when given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<Vec<PerplInstruction>>,
    pub performers: Vec<PerformerSpec>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimConfigError {
    #[error("config names neither a scenario nor a stream")]
    NoStream,
    #[error("at least one performer is required")]
    NoPerformers,
    #[error(transparent)]
    Perpl(#[from] PerplError),
}

impl SimConfig {
    pub fn run(&self) -> Result<Vec<Timeline>, SimConfigError> {
        if self.performers.is_empty() {
            return Err(SimConfigError::NoPerformers);
        }
        let stream = match (&self.stream, self.scenario) {
            (Some(s), _) => s.clone(),
            (None, Some(sc)) => sc.stream(),
            (None, None) => return Err(SimConfigError::NoStream),
        };
        Ok(simulate(&stream, &self.performers, &lexicon(), &catalog())?)
    }
}
