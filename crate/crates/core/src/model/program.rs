use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CapabilitySet, LockRecord, ObjectId, PasscodeDigest};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Role {
    pub id: ObjectId,
    pub name: String,
    pub capabilities: CapabilitySet,
    #[serde(default)]
    pub audio_required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JoinRequirement {
    Nickname,
    LocalIp,
    Passcode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VenueRole {
    pub role: Role,
    /// Maximum number of performers allowed in this role.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Venue {
    pub id: ObjectId,
    pub name: String,
    pub roles: Vec<VenueRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passcode: Option<PasscodeDigest>,
    #[serde(default)]
    pub join_requirements: BTreeSet<JoinRequirement>,
    /// Overrides the server's default cue delay for performances of this venue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_budget_ms: Option<u64>,
    /// Display timezone for activity timestamps, `UTC` or `+HH:MM`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timezone: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}

impl Venue {
    pub fn role(&self, name: &str) -> Option<&VenueRole> {
        self.roles.iter().find(|r| r.role.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidgetKind {
    Button,
    Pulldown,
    TextInput,
    DisplayArea,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceElement {
    pub widget: WidgetKind,
    pub target: ObjectId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceObject {
    pub id: ObjectId,
    pub name: String,
    pub elements: Vec<InterfaceElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiRoleAssignment {
    pub id: ObjectId,
    pub name: String,
    pub venue_id: ObjectId,
    /// Role name to the content or collection that role receives.
    pub bindings: BTreeMap<String, ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FractionTarget {
    #[default]
    All,
    Roles(BTreeSet<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FractionMode {
    Persistent,
    Dynamic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalAssignment {
    pub id: ObjectId,
    pub name: String,
    #[serde(default)]
    pub target: FractionTarget,
    pub mode: FractionMode,
    /// One content or collection id per fraction.
    pub fractions: Vec<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}

/// Who receives one step of a distribution algorithm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepTarget {
    All,
    Roles(BTreeSet<String>),
    Performers(BTreeSet<String>),
    MultiRole(ObjectId),
    Fractional(ObjectId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionStep {
    pub content: ObjectId,
    pub target: StepTarget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedEntry {
    /// A timer or metronome algorithm id.
    pub trigger: ObjectId,
    pub action: DistributionStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OscDirection {
    In,
    Out,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Timer {
        duration_ms: u64,
    },
    Metronome {
        interval_ms: u64,
        synchronized: bool,
    },
    OscBinding {
        direction: OscDirection,
        address: String,
        target: ObjectId,
    },
    TimedOrganization {
        entries: Vec<TimedEntry>,
    },
    DistributionOrganization {
        steps: Vec<DistributionStep>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmObject {
    pub id: ObjectId,
    pub name: String,
    #[serde(flatten)]
    pub kind: AlgorithmKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}

impl AlgorithmObject {
    pub fn referenced_ids(&self) -> Vec<&ObjectId> {
        match &self.kind {
            AlgorithmKind::Timer { .. } | AlgorithmKind::Metronome { .. } => Vec::new(),
            AlgorithmKind::OscBinding { target, .. } => vec![target],
            AlgorithmKind::TimedOrganization { entries } => entries
                .iter()
                .flat_map(|e| {
                    let mut ids = vec![&e.trigger];
                    ids.extend(step_ids(&e.action));
                    ids
                })
                .collect(),
            AlgorithmKind::DistributionOrganization { steps } => {
                steps.iter().flat_map(step_ids).collect()
            }
        }
    }
}

fn step_ids(step: &DistributionStep) -> Vec<&ObjectId> {
    let mut ids = vec![&step.content];
    match &step.target {
        StepTarget::MultiRole(id) | StepTarget::Fractional(id) => ids.push(id),
        _ => {}
    }
    ids
}
