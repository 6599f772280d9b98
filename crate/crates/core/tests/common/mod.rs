#![allow(dead_code)]

pub mod oracle;
mod precedence;

#[allow(unused_imports)]
pub use precedence::*;

use std::collections::{BTreeMap, BTreeSet};

use telebrain_core::model::*;
use telebrain_core::venue::{JoinRequest, Performance, PerformanceOptions};

pub const VENUE: &str = "venue-ffa";
pub const IMAGE: &str = "img-fsharp4";
pub const AUDIO: &str = "aud-pocket";
pub const PAIR: &str = "pair-pocket-fsharp";
pub const TELEPROMPT: &str = "tp-look-up";
pub const FOLDER: &str = "folder-all";
pub const MULTI: &str = "multi-by-role";
pub const FRAC_PERSIST: &str = "frac-persistent";
pub const FRAC_DYNAMIC: &str = "frac-dynamic";
pub const DISTRIBUTION: &str = "alg-distribution";
pub const TIMER: &str = "alg-timer-3s";
pub const METRONOME: &str = "alg-metro-250";
pub const TIMED: &str = "alg-timed";
pub const OSC_IN: &str = "alg-osc-in";
pub const OSC_OUT: &str = "alg-osc-out";

pub fn id(s: &str) -> ObjectId {
    ObjectId::from(s)
}

pub fn flags(list: &[Capability]) -> CapabilitySet {
    list.iter().copied().collect()
}

pub fn role(name: &str, caps: CapabilitySet, capacity: Option<u32>) -> VenueRole {
    VenueRole {
        role: Role {
            id: id(&format!("role-{}", name.to_lowercase())),
            name: name.into(),
            capabilities: caps,
            audio_required: false,
            lock: None,
        },
        capacity,
    }
}

/// Prompter has every flag; Receiver matches the performer interface of
/// the published screenshot; the rest are single-sense receivers.
pub fn venue() -> Venue {
    use Capability::*;
    Venue {
        id: id(VENUE),
        name: "Free-For-All-Model".into(),
        roles: vec![
            role("Prompter", CapabilitySet::full(), None),
            role(
                "Receiver",
                flags(&[
                    SendImage,
                    SendAudio,
                    ReceiveText,
                    ReceiveImage,
                    ReceiveAudio,
                    ShowTitle,
                    PerformerList,
                    GlobalActivityLog,
                ]),
                None,
            ),
            role("AudioOnly", flags(&[ReceiveAudio]), None),
            role("ImageOnly", flags(&[ReceiveImage]), None),
            role("Duo", flags(&[ReceiveText, ChangeRole]), Some(2)),
        ],
        passcode: None,
        join_requirements: BTreeSet::new(),
        delay_budget_ms: None,
        timezone: None,
        lock: None,
    }
}

pub fn blob_content(oid: &str, kind: ContentKind, name: &str, mime: &str, duration_ms: Option<u64>) -> Document {
    Document::Content(ContentObject {
        id: id(oid),
        kind,
        name: name.into(),
        media: Media::Blob(BlobRef {
            blob_id: format!("blob-{oid}"),
            mime: mime.into(),
            origin: BlobOrigin::Upload,
            sample_count: duration_ms.map(|ms| ms * 441 / 10),
        }),
        duration_ms,
        lock: None,
    })
}

fn collection(oid: &str, name: &str, members: CollectionMembers) -> Document {
    Document::Collection(Collection {
        id: id(oid),
        name: name.into(),
        members,
        rendered: None,
        lock: None,
    })
}

fn algorithm(oid: &str, kind: AlgorithmKind) -> Document {
    Document::Algorithm(AlgorithmObject {
        id: id(oid),
        name: oid.into(),
        kind,
        lock: None,
    })
}

pub fn catalog() -> BTreeMap<ObjectId, Document> {
    let docs = vec![
        Document::Venue(venue()),
        blob_content(IMAGE, ContentKind::ImageUpload, "Fsharp4", "image/png", None),
        blob_content(
            AUDIO,
            ContentKind::AudioUpload,
            "Put your phone in your pocket",
            "audio/wav",
            Some(2350),
        ),
        Document::Content(ContentObject {
            id: id(TELEPROMPT),
            kind: ContentKind::Teleprompt,
            name: "Look up".into(),
            media: Media::Teleprompt(TelepromptSpec {
                text: "Look up".into(),
                font: "Helvetica".into(),
                size: 48.0,
                text_color: Rgb(255, 255, 255),
                background_color: Rgb(0, 0, 0),
            }),
            duration_ms: None,
            lock: None,
        }),
        collection(
            PAIR,
            "Pocket and F#",
            CollectionMembers::AudioImagePair {
                audio: id(AUDIO),
                image: id(IMAGE),
            },
        ),
        collection(
            FOLDER,
            "Everything",
            CollectionMembers::Folder {
                members: BTreeSet::from([id(IMAGE), id(TELEPROMPT)]),
            },
        ),
        Document::MultiRoleAssignment(MultiRoleAssignment {
            id: id(MULTI),
            name: "by role".into(),
            venue_id: id(VENUE),
            bindings: BTreeMap::from([
                ("Receiver".to_string(), id(IMAGE)),
                ("AudioOnly".to_string(), id(AUDIO)),
            ]),
            lock: None,
        }),
        Document::FractionalAssignment(FractionalAssignment {
            id: id(FRAC_PERSIST),
            name: "halves".into(),
            target: FractionTarget::All,
            mode: FractionMode::Persistent,
            fractions: vec![id(IMAGE), id(TELEPROMPT)],
            lock: None,
        }),
        Document::FractionalAssignment(FractionalAssignment {
            id: id(FRAC_DYNAMIC),
            name: "shuffled halves".into(),
            target: FractionTarget::All,
            mode: FractionMode::Dynamic,
            fractions: vec![id(IMAGE), id(TELEPROMPT)],
            lock: None,
        }),
        algorithm(
            DISTRIBUTION,
            AlgorithmKind::DistributionOrganization {
                steps: vec![
                    DistributionStep {
                        content: id(IMAGE),
                        target: StepTarget::Roles(BTreeSet::from(["Receiver".to_string()])),
                    },
                    DistributionStep {
                        content: id(AUDIO),
                        target: StepTarget::All,
                    },
                ],
            },
        ),
        algorithm(TIMER, AlgorithmKind::Timer { duration_ms: 3000 }),
        algorithm(
            METRONOME,
            AlgorithmKind::Metronome {
                interval_ms: 250,
                synchronized: true,
            },
        ),
        algorithm(
            TIMED,
            AlgorithmKind::TimedOrganization {
                entries: vec![TimedEntry {
                    trigger: id(TIMER),
                    action: DistributionStep {
                        content: id(IMAGE),
                        target: StepTarget::All,
                    },
                }],
            },
        ),
        algorithm(
            OSC_IN,
            AlgorithmKind::OscBinding {
                direction: OscDirection::In,
                address: "/cue/1".into(),
                target: id(IMAGE),
            },
        ),
        algorithm(
            OSC_OUT,
            AlgorithmKind::OscBinding {
                direction: OscDirection::Out,
                address: "/telebrain/image".into(),
                target: id(IMAGE),
            },
        ),
    ];
    docs.into_iter().map(|d| (d.id().clone(), d)).collect()
}

pub fn join(nickname: &str, role: &str) -> JoinRequest {
    JoinRequest {
        nickname: nickname.into(),
        role: role.into(),
        passcode: None,
        local_ip: None,
    }
}

/// Live performance with the given `(nickname, role)` roster, connections
/// numbered from 1 in order.
pub fn performance(roster: &[(&str, &str)], seed: u64) -> Performance {
    let opts = PerformanceOptions {
        seed,
        ..PerformanceOptions::default()
    };
    let (first, rest) = roster.split_first().expect("at least one performer");
    let mut p = Performance::start(venue(), "Free-For-All", &join(first.0, first.1), 1, opts).unwrap();
    for (i, (nick, role)) in rest.iter().enumerate() {
        p.join(&join(nick, role), i as u64 + 2).unwrap();
    }
    p
}
