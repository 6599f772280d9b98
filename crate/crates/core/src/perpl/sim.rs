use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{audio_duration, PerplError, PerplInstruction, Sign, Step};
use crate::model::ObjectId;
use crate::venue::Catalog;

const MAX_BODY_DEPTH: usize = 4;

pub const STAND: &str = "stand";
pub const SIT: &str = "sit";
/// `if (standing) sit; else stand;` understood as spoken language.
pub const STAND_SIT_SWITCH: &str = "stand-sit-switch";

/// Sounds and images every performer already understands, mapped to the
/// actions they ask for. Spoken instructions live here; an explanation
/// that asks for nothing maps to an empty list.
pub type Lexicon = BTreeMap<ObjectId, Vec<String>>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Posture {
    #[default]
    Standing,
    Sitting,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Policy {
    Obedient,
    /// Declines each action with probability `p`.
    Willful { p: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformerSpec {
    pub name: String,
    #[serde(flatten)]
    pub policy: Policy,
    #[serde(default)]
    pub posture: Posture,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
enum Pending {
    #[default]
    None,
    /// Condition evaluated; the next sound is the `then` branch.
    Then(bool),
    /// `then` branch heard; an `else` marker may follow.
    AfterThen(bool),
    /// `else` marker heard; the next sound is the `else` branch.
    Else(bool),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformerState {
    pub posture: Posture,
    /// Most recent action performed.
    pub current: Option<String>,
    pub bindings: BTreeMap<ObjectId, Sign>,
    #[serde(skip)]
    pending: Pending,
}

impl PerformerState {
    pub fn new(posture: Posture) -> Self {
        Self {
            posture,
            current: None,
            bindings: BTreeMap::new(),
            pending: Pending::None,
        }
    }

    /// Whether the performer is currently doing `action`.
    pub fn holds(&self, action: &str) -> bool {
        match action {
            STAND => self.posture == Posture::Standing,
            SIT => self.posture == Posture::Sitting,
            _ => self.current.as_deref() == Some(action),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Perform { action: String },
    /// A willful performer chose not to act.
    Decline { action: String },
    Learn { trigger: ObjectId },
    /// Heard something it could not interpret. Performers do not crash.
    Confused { heard: ObjectId, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub at_ms: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub performer: String,
    pub events: Vec<Event>,
    pub final_state: PerformerState,
}

impl Timeline {
    pub fn actions(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Perform { action } => Some(action.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn confusions(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Confused { .. }))
            .count()
    }
}

struct Interpreter<'a> {
    lexicon: &'a Lexicon,
    state: PerformerState,
    policy: Policy,
    rng: ChaCha8Rng,
    events: Vec<Event>,
    now: u64,
}

impl Interpreter<'_> {
    fn emit(&mut self, kind: EventKind) {
        self.events.push(Event { at_ms: self.now, kind });
    }

    fn confused(&mut self, heard: &ObjectId, reason: &str) {
        self.emit(EventKind::Confused {
            heard: heard.clone(),
            reason: reason.into(),
        });
    }

    /// The actions a sound asks for, following trained bodies.
    fn actions_of(&self, id: &ObjectId, depth: usize) -> Result<Vec<String>, &'static str> {
        if let Some(word) = self.lexicon.get(id) {
            return Ok(word.clone());
        }
        match self.state.bindings.get(id) {
            Some(Sign::Body { steps }) if depth < MAX_BODY_DEPTH => {
                let mut out = Vec::new();
                for step in steps {
                    match step {
                        Step::Play { audio } | Step::Show { image: audio } => out.extend(self.actions_of(audio, depth + 1)?),
                        Step::Layer { audio } => {
                            for a in audio {
                                out.extend(self.actions_of(a, depth + 1)?);
                            }
                        }
                        Step::Pause { .. } => {}
                    }
                }
                Ok(out)
            }
            Some(Sign::Body { .. }) => Err("trigger bodies nest too deeply"),
            Some(Sign::If | Sign::Else) => Err("conditional marker out of context"),
            None => Err("unbound trigger"),
        }
    }

    fn perform(&mut self, action: &str) {
        if let Policy::Willful { p, .. } = self.policy {
            if self.rng.gen_bool(p.clamp(0.0, 1.0)) {
                self.emit(EventKind::Decline { action: action.into() });
                return;
            }
        }
        let done = match action {
            STAND_SIT_SWITCH => match self.state.posture {
                Posture::Standing => SIT,
                Posture::Sitting => STAND,
            },
            other => other,
        };
        match done {
            STAND => self.state.posture = Posture::Standing,
            SIT => self.state.posture = Posture::Sitting,
            _ => {}
        }
        self.state.current = Some(done.to_string());
        self.emit(EventKind::Perform { action: done.into() });
    }

    fn act_on(&mut self, id: &ObjectId) {
        match self.actions_of(id, 0) {
            Ok(actions) => actions.iter().for_each(|a| self.perform(a)),
            Err(reason) => self.confused(id, reason),
        }
    }

    fn is_sign(&self, id: &ObjectId, sign: &Sign) -> bool {
        self.state.bindings.get(id) == Some(sign)
    }

    fn hear(&mut self, id: &ObjectId) {
        match self.state.pending {
            Pending::Then(cond) => {
                if cond {
                    self.act_on(id);
                }
                self.state.pending = Pending::AfterThen(cond);
                return;
            }
            Pending::AfterThen(cond) if self.is_sign(id, &Sign::Else) => {
                self.state.pending = Pending::Else(cond);
                return;
            }
            Pending::Else(cond) => {
                if !cond {
                    self.act_on(id);
                }
                self.state.pending = Pending::None;
                return;
            }
            Pending::AfterThen(_) | Pending::None => self.state.pending = Pending::None,
        }
        self.act_on(id);
    }

    fn hear_layer(&mut self, audio: &[ObjectId]) {
        let Some(tone) = audio.iter().find(|a| self.is_sign(a, &Sign::If)) else {
            audio.iter().for_each(|a| self.hear(a));
            return;
        };
        let tone = tone.clone();
        if matches!(self.state.pending, Pending::Then(_) | Pending::Else(_)) {
            self.state.pending = Pending::None;
            self.confused(&tone, "nested conditional unsupported");
            return;
        }
        let others: Vec<&ObjectId> = audio.iter().filter(|a| **a != tone).collect();
        let [condition] = others.as_slice() else {
            self.state.pending = Pending::None;
            self.confused(&tone, "conditional needs exactly one action sound");
            return;
        };
        match self.actions_of(condition, 0).as_deref() {
            Ok([action]) => {
                let cond = self.state.holds(action);
                self.state.pending = Pending::Then(cond);
            }
            Ok(_) => {
                self.state.pending = Pending::None;
                self.confused(condition, "condition must name one action");
            }
            Err(reason) => {
                self.state.pending = Pending::None;
                self.confused(condition, reason);
            }
        }
    }

    fn run(&mut self, instr: &PerplInstruction, catalog: &dyn Catalog) -> Result<(), PerplError> {
        instr.check()?;
        if instr.is_training() {
            for b in instr.bindings() {
                self.state.bindings.insert(b.trigger.clone(), b.sign.clone());
                self.emit(EventKind::Learn {
                    trigger: b.trigger.clone(),
                });
            }
            for step in &instr.steps {
                self.now += step_duration(step, catalog)?;
            }
            return Ok(());
        }
        for step in &instr.steps {
            let len = step_duration(step, catalog)?;
            match step {
                Step::Play { audio } => self.hear(audio),
                Step::Show { image } => self.hear(image),
                Step::Layer { audio } => self.hear_layer(audio),
                Step::Pause { .. } => {}
            }
            self.now += len;
        }
        Ok(())
    }
}

fn step_duration(step: &Step, catalog: &dyn Catalog) -> Result<u64, PerplError> {
    match step {
        Step::Play { audio } => audio_duration(catalog, audio),
        Step::Show { image } => match catalog.document(image) {
            Some(_) => Ok(0),
            None => Err(PerplError::NotFound(image.clone())),
        },
        Step::Pause { ms } => Ok(*ms),
        Step::Layer { audio } => audio
            .iter()
            .map(|a| audio_duration(catalog, a))
            .try_fold(0, |m, d| d.map(|d| m.max(d))),
    }
}

/// Runs one performer through its own instruction stream.
pub fn simulate_one(
    spec: &PerformerSpec,
    stream: &[PerplInstruction],
    lexicon: &Lexicon,
    catalog: &dyn Catalog,
) -> Result<Timeline, PerplError> {
    let seed = match spec.policy {
        Policy::Obedient => 0,
        Policy::Willful { seed, .. } => seed,
    };
    let mut it = Interpreter {
        lexicon,
        state: PerformerState::new(spec.posture),
        policy: spec.policy,
        rng: ChaCha8Rng::seed_from_u64(seed),
        events: Vec::new(),
        now: 0,
    };
    for instr in stream {
        it.run(instr, catalog)?;
    }
    Ok(Timeline {
        performer: spec.name.clone(),
        events: it.events,
        final_state: it.state,
    })
}

/// Sends the same stream to every performer.
pub fn simulate(
    stream: &[PerplInstruction],
    performers: &[PerformerSpec],
    lexicon: &Lexicon,
    catalog: &dyn Catalog,
) -> Result<Vec<Timeline>, PerplError> {
    performers
        .iter()
        .map(|p| simulate_one(p, stream, lexicon, catalog))
        .collect()
}
