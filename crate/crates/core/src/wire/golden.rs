//! Reference frames, one per message type, regenerated by
//! `telebrain protocol golden --out <dir>`.

use std::collections::BTreeSet;
use std::path::Path;

use serde_json::json;

use super::*;
use crate::model::{Capability, CapabilitySet, ObjectId};
use crate::venue::{Designation, Part, PartKind, Payload, SendRequest};

fn receiver_flags() -> CapabilitySet {
    CapabilitySet::from([
        Capability::SendImage,
        Capability::SendAudio,
        Capability::ReceiveText,
        Capability::ReceiveImage,
        Capability::ReceiveAudio,
        Capability::ShowTitle,
        Capability::PerformerList,
        Capability::GlobalActivityLog,
    ])
}

fn roster() -> Vec<RosterEntry> {
    [("Nick", "Receiver"), ("Rachel", "Receiver"), ("Bruno", "Prompter")]
        .into_iter()
        .map(|(n, r)| RosterEntry {
            nickname: n.into(),
            role: r.into(),
            present: true,
            test_mode: false,
        })
        .collect()
}

/// `(file stem, frame)` pairs in a fixed order.
pub fn golden_corpus() -> Vec<(&'static str, Frame)> {
    let fsharp = Part {
        content_id: Some(ObjectId::from("img-fsharp4")),
        blob_id: Some("5f1c2a".into()),
        mime: Some("image/png".into()),
        ..Part::bare(PartKind::Image, "Fsharp4")
    };
    let pocket = Part {
        content_id: Some(ObjectId::from("aud-pocket")),
        blob_id: Some("9e0d11".into()),
        mime: Some("audio/wav".into()),
        duration_ms: Some(2350),
        offsets_ms: vec![0, 1200],
        ..Part::bare(PartKind::Audio, "Put your phone in your pocket")
    };
    let messages: Vec<(&'static str, Message)> = vec![
        (
            "join",
            Message::Join(Join {
                performance: "Free-For-All".into(),
                venue: None,
                nickname: "Nick".into(),
                role: "Receiver".into(),
                passcode: Some("abc".into()),
                local_ip: Some("192.168.1.20".into()),
            }),
        ),
        (
            "join_ack",
            Message::JoinAck(JoinAck {
                performance: "Free-For-All".into(),
                nickname: "Nick".into(),
                role: "Receiver".into(),
                capabilities: capability_map(&receiver_flags()),
                roles: vec!["Receiver".into(), "Prompter".into()],
                roster: roster(),
                clock: ClockPong {
                    t0: 1_000,
                    t1: 64_000_010,
                    t2: 64_000_011,
                },
                delay_budget_ms: 200,
                timezone: "UTC".into(),
            }),
        ),
        ("leave", Message::Leave(Leave {})),
        ("roster_update", Message::RosterUpdate(RosterUpdate { roster: roster() })),
        (
            "cue",
            Message::Cue(Cue {
                cue_id: 7,
                sender: "Nick".into(),
                execute_at: 63_960_200,
                delay_budget_ms: 200,
                parts: vec![CuePart::from(fsharp)],
                test: false,
            }),
        ),
        (
            "cue_audio",
            Message::Cue(Cue {
                cue_id: 8,
                sender: "Bruno".into(),
                execute_at: 63_961_000,
                delay_budget_ms: 200,
                parts: vec![CuePart::from(pocket)],
                test: false,
            }),
        ),
        (
            "cue_ack",
            Message::CueAck(CueAck {
                cue_id: 7,
                late: false,
                error: None,
                clock_offset_ms: Some(30),
            }),
        ),
        ("clock_ping", Message::ClockPing(ClockPing { t0: 1_000 })),
        (
            "clock_pong",
            Message::ClockPong(ClockPong {
                t0: 1_000,
                t1: 64_000_010,
                t2: 64_000_011,
            }),
        ),
        (
            "activity_update",
            Message::ActivityUpdate(ActivityUpdate {
                scope: LogScope::Global,
                entries: vec![
                    ActivityLine {
                        timestamp: 63_960_000,
                        line: "Nick: show image: Fsharp4".into(),
                        time: "17:46".into(),
                    },
                    ActivityLine {
                        timestamp: 63_960_800,
                        line: "Bruno: play audio: Put your phone in your pocket".into(),
                        time: "17:46".into(),
                    },
                ],
            }),
        ),
        (
            "send_request",
            Message::SendRequest(SendRequest {
                designation: Designation::all(),
                payload: Some(Payload::Content {
                    id: ObjectId::from("img-fsharp4"),
                }),
            }),
        ),
        (
            "send_request_roles",
            Message::SendRequest(SendRequest {
                designation: Designation {
                    roles: BTreeSet::from(["Receiver".to_string()]),
                    performers: BTreeSet::from(["Rachel".to_string()]),
                    ..Designation::default()
                },
                payload: Some(Payload::Text {
                    text: "Look up".into(),
                }),
            }),
        ),
        (
            "error",
            Message::Error(ErrorFrame {
                code: "passcode".into(),
                message: "wrong or missing passcode".into(),
                in_reply_to: Some(1),
                details: None,
            }),
        ),
        (
            "functionality_change",
            Message::FunctionalityChange(FunctionalityChange {
                role: Some("Prompter".into()),
                capabilities: None,
                interface: None,
            }),
        ),
        ("test_toggle", Message::TestToggle(TestToggle { on: true })),
    ];
    let mut out: Vec<(&'static str, Frame)> = messages
        .into_iter()
        .enumerate()
        .map(|(i, (name, m))| (name, Frame::from_message(i as u64 + 1, &m)))
        .collect();
    let mut extended = Frame::from_message(99, &Message::ClockPing(ClockPing { t0: 5 }));
    extended.extra.insert("client".into(), json!({"ua": "golden", "build": 3}));
    out.push(("clock_ping_extended", extended));
    out
}

/// Writes `<stem>.json` for each golden frame and returns the paths.
pub fn write_golden(dir: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    golden_corpus()
        .into_iter()
        .map(|(name, frame)| {
            let path = dir.join(format!("{name}.json"));
            std::fs::write(&path, serialize(&frame) + "\n")?;
            Ok(path)
        })
        .collect()
}
