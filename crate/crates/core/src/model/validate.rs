use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::*;

/// One broken invariant, named by the field it concerns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every violation found in a value.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl Violations {
    pub fn mentions(&self, needle: &str) -> bool {
        self.0.iter().any(|v| v.message.contains(needle))
    }
}

pub trait Validate {
    fn collect_violations(&self, out: &mut Vec<Violation>);

    /// Structural validation. Reports all violations, not just the first.
    fn validate(&self) -> Result<(), Violations> {
        let mut out = Vec::new();
        self.collect_violations(&mut out);
        if out.is_empty() {
            Ok(())
        } else {
            Err(Violations(out))
        }
    }
}

fn check_name(name: &str, out: &mut Vec<Violation>) {
    if name.trim().is_empty() {
        out.push(Violation::new("name", "name must be non-empty"));
    }
}

fn check_id(id: &ObjectId, out: &mut Vec<Violation>) {
    if !id.is_well_formed() {
        out.push(Violation::new("id", "id must be a non-empty token"));
    }
}

impl Validate for TelepromptSpec {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        if self.text.is_empty() {
            out.push(Violation::new("teleprompt.text", "text must be non-empty"));
        }
        if self.font.trim().is_empty() {
            out.push(Violation::new("teleprompt.font", "font must be non-empty"));
        }
        if !(self.size.is_finite() && self.size > 0.0) {
            out.push(Violation::new("teleprompt.size", "size must be positive"));
        }
    }
}

impl Validate for ContentObject {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
        match (&self.media, self.kind) {
            (Media::Teleprompt(spec), ContentKind::Teleprompt) => spec.collect_violations(out),
            (Media::Teleprompt(_), _) => {
                out.push(Violation::new("media", "only teleprompts carry a teleprompt spec"))
            }
            (Media::Blob(_), ContentKind::Teleprompt) => {
                out.push(Violation::new("media", "teleprompt has no media blob"))
            }
            (Media::Blob(blob), _) => {
                if blob.blob_id.is_empty() {
                    out.push(Violation::new("media.blob_id", "blob id must be non-empty"));
                }
                if let BlobOrigin::Tts { text, .. } = &blob.origin {
                    if text.chars().count() > crate::MAX_TTS_CHARS {
                        out.push(Violation::new("media.origin", "tts text exceeds 100 characters"));
                    }
                }
            }
        }
        if self.kind.is_audio() {
            match self.duration_ms {
                Some(d) if d > 0 => {}
                _ => out.push(Violation::new("duration_ms", "audio duration must be > 0")),
            }
        } else if self.duration_ms.is_some() {
            out.push(Violation::new("duration_ms", "only audio carries a duration"));
        }
    }
}

impl Validate for Collection {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
        match &self.members {
            CollectionMembers::Folder { .. } => {}
            CollectionMembers::AudioImagePair { audio, image } => {
                if audio == image {
                    out.push(Violation::new("members", "pair needs one audio and one image"));
                }
            }
            CollectionMembers::AudioSentence {
                members,
                offsets_ms,
            } => {
                if members.is_empty() {
                    out.push(Violation::new("members", "sentence needs at least one member"));
                }
                if offsets_ms.len() != members.len() {
                    out.push(Violation::new(
                        "offsets_ms",
                        "offset list length must equal member count",
                    ));
                }
                if offsets_ms.first().is_some_and(|o| *o != 0) {
                    out.push(Violation::new("offsets_ms", "offsets must start at 0"));
                }
                if offsets_ms.windows(2).any(|w| w[1] < w[0]) {
                    out.push(Violation::new("offsets_ms", "offsets must be nondecreasing"));
                }
            }
            CollectionMembers::AudioLayer { entries } => {
                if entries.is_empty() {
                    out.push(Violation::new("entries", "layer needs at least one entry"));
                }
                for (i, e) in entries.iter().enumerate() {
                    if !(0.0..=1.0).contains(&e.volume) {
                        out.push(Violation::new(
                            format!("entries[{i}].volume"),
                            "volume in [0,1]",
                        ));
                    }
                }
            }
            CollectionMembers::ImagePhrase { images } => {
                if images.is_empty() {
                    out.push(Violation::new("images", "phrase needs at least one image"));
                }
            }
        }
        if self.members.renders_audio() {
            if let Some(r) = &self.rendered {
                if r.duration_ms == 0 {
                    out.push(Violation::new("rendered.duration_ms", "rendered audio is empty"));
                }
            }
        } else if self.rendered.is_some() {
            out.push(Violation::new("rendered", "only sentences and layers render audio"));
        }
    }
}

impl Validate for Role {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
    }
}

impl Validate for Venue {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
        if self.roles.is_empty() {
            out.push(Violation::new("roles", "at least one role"));
        }
        let mut seen = BTreeSet::new();
        let mut duplicates = BTreeSet::new();
        for (i, vr) in self.roles.iter().enumerate() {
            let mut inner = Vec::new();
            vr.role.collect_violations(&mut inner);
            out.extend(
                inner
                    .into_iter()
                    .map(|v| Violation::new(format!("roles[{i}].{}", v.field), v.message)),
            );
            if vr.capacity == Some(0) {
                out.push(Violation::new(
                    format!("roles[{i}].capacity"),
                    "capacity must be at least 1",
                ));
            }
            if !seen.insert(vr.role.name.as_str()) {
                duplicates.insert(vr.role.name.as_str());
            }
        }
        if !duplicates.is_empty() {
            let names: Vec<&str> = duplicates.into_iter().collect();
            out.push(Violation::new(
                "roles",
                format!("duplicate role names: {}", names.join(", ")),
            ));
        }
        if self.join_requirements.contains(&JoinRequirement::Passcode) && self.passcode.is_none() {
            out.push(Violation::new("passcode", "passcode required but not set"));
        }
        if let Some(tz) = &self.timezone {
            if crate::venue::parse_timezone(tz).is_none() {
                out.push(Violation::new("timezone", "timezone must be UTC or +HH:MM"));
            }
        }
        if self.delay_budget_ms == Some(0) {
            out.push(Violation::new("delay_budget_ms", "delay budget must be > 0"));
        }
    }
}

impl Validate for InterfaceObject {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
    }
}

impl Validate for MultiRoleAssignment {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
        if self.bindings.is_empty() {
            out.push(Violation::new("bindings", "at least one role binding"));
        }
    }
}

impl Validate for FractionalAssignment {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
        if self.fractions.len() < 2 {
            out.push(Violation::new("fractions", "at least 2 fractions"));
        }
        if let FractionTarget::Roles(roles) = &self.target {
            if roles.is_empty() {
                out.push(Violation::new("target", "role target must name at least one role"));
            }
        }
    }
}

impl Validate for AlgorithmObject {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        check_id(&self.id, out);
        check_name(&self.name, out);
        match &self.kind {
            AlgorithmKind::Timer { duration_ms } if *duration_ms == 0 => {
                out.push(Violation::new("duration_ms", "timer duration must be > 0"));
            }
            AlgorithmKind::Metronome { interval_ms, .. } if *interval_ms == 0 => {
                out.push(Violation::new("interval_ms", "metronome interval must be > 0"));
            }
            AlgorithmKind::OscBinding { address, .. } if !address.starts_with('/') => {
                out.push(Violation::new("address", "address pattern must begin with '/'"));
            }
            AlgorithmKind::TimedOrganization { entries } if entries.is_empty() => {
                out.push(Violation::new("entries", "at least one timed entry"));
            }
            AlgorithmKind::DistributionOrganization { steps } if steps.is_empty() => {
                out.push(Violation::new("steps", "at least one distribution step"));
            }
            _ => {}
        }
    }
}

impl Validate for Document {
    fn collect_violations(&self, out: &mut Vec<Violation>) {
        match self {
            Document::Content(x) => x.collect_violations(out),
            Document::Collection(x) => x.collect_violations(out),
            Document::Role(x) => x.collect_violations(out),
            Document::Venue(x) => x.collect_violations(out),
            Document::Interface(x) => x.collect_violations(out),
            Document::MultiRoleAssignment(x) => x.collect_violations(out),
            Document::FractionalAssignment(x) => x.collect_violations(out),
            Document::Algorithm(x) => x.collect_violations(out),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn role(name: &str, caps: CapabilitySet) -> Role {
        Role {
            id: ObjectId::generate(),
            name: name.into(),
            capabilities: caps,
            audio_required: false,
            lock: None,
        }
    }

    fn venue(roles: Vec<VenueRole>) -> Venue {
        Venue {
            id: ObjectId::generate(),
            name: "v".into(),
            roles,
            passcode: None,
            join_requirements: BTreeSet::new(),
            delay_budget_ms: None,
            timezone: None,
            lock: None,
        }
    }

    #[test]
    fn venue_without_roles_is_reported() {
        let err = venue(vec![]).validate().unwrap_err();
        assert!(err.mentions("at least one role"));
    }

    #[test]
    fn layer_volume_out_of_range_is_reported() {
        let c = Collection {
            id: ObjectId::generate(),
            name: "layer".into(),
            members: CollectionMembers::AudioLayer {
                entries: vec![LayerEntry {
                    audio: ObjectId::generate(),
                    start_ms: 0,
                    volume: 1.5,
                }],
            },
            rendered: None,
            lock: None,
        };
        let err = c.validate().unwrap_err();
        assert!(err.mentions("volume in [0,1]"));
    }

    #[test]
    fn well_formed_role_is_ok() {
        let r = role(
            "Lead",
            CapabilitySet::from([Capability::SendAudio, Capability::ReceiveAudio]),
        );
        assert!(r.validate().is_ok());
    }

    #[test]
    fn all_violations_are_reported_together() {
        let mut v = venue(vec![
            VenueRole {
                role: role("A", CapabilitySet::empty()),
                capacity: Some(0),
            },
            VenueRole {
                role: role("A", CapabilitySet::empty()),
                capacity: None,
            },
        ]);
        v.name = String::new();
        let err = v.validate().unwrap_err();
        assert!(err.mentions("name must be non-empty"));
        assert!(err.mentions("capacity must be at least 1"));
        assert!(err.mentions("duplicate role names: A"));
        assert_eq!(err.0.len(), 3);
    }

    #[test]
    fn sentence_offsets_must_match_members() {
        let ids = vec![ObjectId::generate(), ObjectId::generate()];
        let c = Collection {
            id: ObjectId::generate(),
            name: "s".into(),
            members: CollectionMembers::AudioSentence {
                members: ids,
                offsets_ms: vec![5],
            },
            rendered: None,
            lock: None,
        };
        let err = c.validate().unwrap_err();
        assert!(err.mentions("offset list length"));
        assert!(err.mentions("start at 0"));
    }

    #[test]
    fn algorithm_invariants() {
        let bad = [
            AlgorithmKind::Timer { duration_ms: 0 },
            AlgorithmKind::Metronome {
                interval_ms: 0,
                synchronized: true,
            },
            AlgorithmKind::OscBinding {
                direction: OscDirection::In,
                address: "cue".into(),
                target: ObjectId::generate(),
            },
        ];
        for kind in bad {
            let a = AlgorithmObject {
                id: ObjectId::generate(),
                name: "a".into(),
                kind,
                lock: None,
            };
            assert!(a.validate().is_err());
        }
    }

    #[test]
    fn fractional_needs_two_fractions() {
        let f = FractionalAssignment {
            id: ObjectId::generate(),
            name: "f".into(),
            target: FractionTarget::All,
            mode: FractionMode::Dynamic,
            fractions: vec![ObjectId::generate()],
            lock: None,
        };
        assert!(f.validate().unwrap_err().mentions("at least 2 fractions"));
    }

    #[test]
    fn audio_needs_positive_duration() {
        let c = ContentObject {
            id: ObjectId::generate(),
            kind: ContentKind::AudioUpload,
            name: "x".into(),
            media: Media::Blob(BlobRef {
                blob_id: "b".into(),
                mime: "audio/wav".into(),
                origin: BlobOrigin::Upload,
                sample_count: Some(0),
            }),
            duration_ms: Some(0),
            lock: None,
        };
        assert!(c.validate().unwrap_err().mentions("audio duration must be > 0"));
    }
}
