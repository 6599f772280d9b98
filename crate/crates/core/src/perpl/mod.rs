//! PerPL instruction idioms and a virtual-performer simulator.
//!
//! An instruction is an ordered list of steps plus optional annotations
//! saying what the steps mean. Instructions concatenate with `+`.

mod bubble;
pub mod scenario;
mod sim;

pub use bubble::{
    performatize_bubble_sort, BubbleError, Comparison, Iteration, PerformatizationTrace, SwapPolicy, Verdict,
    DEFAULT_MAX_ITERATIONS,
};
pub use sim::{
    simulate, simulate_one, Event, EventKind, Lexicon, PerformerSpec, PerformerState, Policy, Posture, Timeline, SIT,
    STAND, STAND_SIT_SWITCH,
};

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::model::{Document, ObjectId};
use crate::venue::Catalog;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Step {
    Play { audio: ObjectId },
    Show { image: ObjectId },
    Pause { ms: u64 },
    /// Sounds heard at the same time. Never empty.
    Layer { audio: Vec<ObjectId> },
}

impl Step {
    pub fn play(id: impl Into<ObjectId>) -> Self {
        Self::Play { audio: id.into() }
    }

    pub fn pause(ms: u64) -> Self {
        Self::Pause { ms }
    }
}

/// What a trained sound stands for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "sign", rename_all = "snake_case")]
pub enum Sign {
    /// Perform these steps when the trigger is heard.
    Body { steps: Vec<Step> },
    /// Layered over an action sound, asks whether that action is in progress.
    If,
    /// Introduces the branch taken when the preceding `if` failed.
    Else,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub trigger: ObjectId,
    #[serde(flatten)]
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "meaning", rename_all = "snake_case")]
pub enum Meaning {
    /// Establishes trigger bindings; performers learn rather than act.
    Training { bindings: Vec<Binding> },
    /// `if (condition) then_action; else else_action;`
    Conditional {
        if_tone: ObjectId,
        condition: ObjectId,
        then_action: ObjectId,
        else_sound: ObjectId,
        else_action: ObjectId,
    },
    /// Timed practice of already trained triggers.
    Practice,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerplInstruction {
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub meaning: Vec<Meaning>,
}

impl PerplInstruction {
    pub fn new(steps: Vec<Step>) -> Self {
        Self { steps, meaning: Vec::new() }
    }

    pub fn with_meaning(mut self, meaning: Meaning) -> Self {
        self.meaning.push(meaning);
        self
    }

    pub fn is_training(&self) -> bool {
        self.meaning.iter().any(|m| matches!(m, Meaning::Training { .. }))
    }

    pub fn bindings(&self) -> impl Iterator<Item = &Binding> {
        self.meaning.iter().flat_map(|m| match m {
            Meaning::Training { bindings } => bindings.as_slice(),
            _ => &[],
        })
    }

    /// The played audio in order, ready to save as an Audio Sentence.
    /// `None` if any step is not a plain play.
    pub fn sentence_plan(&self) -> Option<Vec<ObjectId>> {
        self.steps
            .iter()
            .map(|s| match s {
                Step::Play { audio } => Some(audio.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn check(&self) -> Result<(), PerplError> {
        for step in &self.steps {
            if let Step::Layer { audio } = step {
                if audio.is_empty() {
                    return Err(PerplError::EmptyLayer);
                }
            }
        }
        Ok(())
    }
}

impl Add for PerplInstruction {
    type Output = PerplInstruction;

    fn add(mut self, rhs: PerplInstruction) -> Self::Output {
        self.steps.extend(rhs.steps);
        self.meaning.extend(rhs.meaning);
        self
    }
}

impl Add<Step> for PerplInstruction {
    type Output = PerplInstruction;

    fn add(mut self, rhs: Step) -> Self::Output {
        self.steps.push(rhs);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PerplError {
    #[error("{0} not found")]
    NotFound(ObjectId),
    #[error("{0} is not audio")]
    NotAudio(ObjectId),
    #[error("training body is empty")]
    EmptyBody,
    #[error("layer has no audio")]
    EmptyLayer,
    #[error("pause {0} ms is negative")]
    NegativePause(i64),
}

/// Duration of an audio object, if `id` names one.
pub fn audio_duration(catalog: &dyn Catalog, id: &ObjectId) -> Result<u64, PerplError> {
    match catalog.document(id) {
        None => Err(PerplError::NotFound(id.clone())),
        Some(Document::Content(c)) if c.kind.is_audio() => Ok(c.duration_ms.unwrap_or(0)),
        Some(Document::Collection(c)) if c.members.renders_audio() => {
            Ok(c.rendered.as_ref().map_or(0, |r| r.duration_ms))
        }
        Some(_) => Err(PerplError::NotAudio(id.clone())),
    }
}

fn require_audio(catalog: &dyn Catalog, ids: &[&ObjectId]) -> Result<(), PerplError> {
    ids.iter().try_for_each(|id| audio_duration(catalog, id).map(drop))
}

/// `prompt + trigger + body`, teaching that `trigger` means `body`.
/// `prompt` is usually a spoken "When you hear this sound".
pub fn build_training(
    catalog: &dyn Catalog,
    prompt: &ObjectId,
    trigger: &ObjectId,
    body: &PerplInstruction,
) -> Result<PerplInstruction, PerplError> {
    if body.steps.is_empty() {
        return Err(PerplError::EmptyBody);
    }
    require_audio(catalog, &[prompt, trigger])?;
    body.check()?;
    let mut steps = vec![Step::play(prompt.clone()), Step::play(trigger.clone())];
    steps.extend(body.steps.iter().cloned());
    Ok(PerplInstruction::new(steps).with_meaning(Meaning::Training {
        bindings: vec![Binding {
            trigger: trigger.clone(),
            sign: Sign::Body {
                steps: body.steps.clone(),
            },
        }],
    }))
}

/// `intro`, then each trigger followed by its body, teaching every pair.
pub fn build_training_sequence(
    catalog: &dyn Catalog,
    intro: &PerplInstruction,
    pairs: &[(ObjectId, PerplInstruction)],
) -> Result<PerplInstruction, PerplError> {
    intro.check()?;
    let mut out = PerplInstruction::new(intro.steps.clone());
    let mut bindings = Vec::with_capacity(pairs.len());
    for (trigger, body) in pairs {
        if body.steps.is_empty() {
            return Err(PerplError::EmptyBody);
        }
        require_audio(catalog, &[trigger])?;
        body.check()?;
        out.steps.push(Step::play(trigger.clone()));
        out.steps.extend(body.steps.iter().cloned());
        bindings.push(Binding {
            trigger: trigger.clone(),
            sign: Sign::Body {
                steps: body.steps.clone(),
            },
        });
    }
    Ok(out.with_meaning(Meaning::Training { bindings }))
}

/// Teaches `if_tone` and `else_sound` as the conditional markers, after
/// an explanation that is played first.
pub fn build_if_else_training(
    catalog: &dyn Catalog,
    explanation: &PerplInstruction,
    if_tone: &ObjectId,
    else_sound: &ObjectId,
) -> Result<PerplInstruction, PerplError> {
    require_audio(catalog, &[if_tone, else_sound])?;
    explanation.check()?;
    let steps = explanation
        .steps
        .iter()
        .cloned()
        .chain([Step::play(if_tone.clone()), Step::play(else_sound.clone())])
        .collect();
    Ok(PerplInstruction::new(steps).with_meaning(Meaning::Training {
        bindings: vec![
            Binding {
                trigger: if_tone.clone(),
                sign: Sign::If,
            },
            Binding {
                trigger: else_sound.clone(),
                sign: Sign::Else,
            },
        ],
    }))
}

/// The trigger, then each pause followed by the trigger again. A zero
/// pause plays the next trigger back to back.
pub fn build_two_part_trigger_practice(trigger: &ObjectId, pauses: &[i64]) -> Result<PerplInstruction, PerplError> {
    let mut steps = vec![Step::play(trigger.clone())];
    for &p in pauses {
        let ms = u64::try_from(p).map_err(|_| PerplError::NegativePause(p))?;
        if ms > 0 {
            steps.push(Step::pause(ms));
        }
        steps.push(Step::play(trigger.clone()));
    }
    Ok(PerplInstruction::new(steps).with_meaning(Meaning::Practice))
}

/// `LAYER[if_tone, condition] + then_action + else_sound + else_action`.
pub fn encode_conditional(
    catalog: &dyn Catalog,
    condition: &ObjectId,
    then_action: &ObjectId,
    else_action: &ObjectId,
    if_tone: &ObjectId,
    else_sound: &ObjectId,
) -> Result<PerplInstruction, PerplError> {
    require_audio(catalog, &[condition, then_action, else_action, if_tone, else_sound])?;
    let steps = vec![
        Step::Layer {
            audio: vec![if_tone.clone(), condition.clone()],
        },
        Step::play(then_action.clone()),
        Step::play(else_sound.clone()),
        Step::play(else_action.clone()),
    ];
    Ok(PerplInstruction::new(steps).with_meaning(Meaning::Conditional {
        if_tone: if_tone.clone(),
        condition: condition.clone(),
        then_action: then_action.clone(),
        else_sound: else_sound.clone(),
        else_action: else_action.clone(),
    }))
}
