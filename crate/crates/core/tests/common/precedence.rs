use std::collections::BTreeSet;

use telebrain_core::model::*;
use telebrain_core::venue::*;

use super::*;

/// Nick and Rachel receive text/image/audio, Bruno prompts with every flag,
/// Ann hears only audio, Ivy sees only images, Dee reads only text.
pub const ROSTER: &[(&str, &str)] = &[
    ("Bruno", "Prompter"),
    ("Nick", "Receiver"),
    ("Rachel", "Receiver"),
    ("Ann", "AudioOnly"),
    ("Ivy", "ImageOnly"),
    ("Dee", "Duo"),
];

pub fn set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn targets(d: &[Delivery]) -> BTreeSet<String> {
    d.iter().map(|d| d.nickname.clone()).collect()
}

pub fn send(designation: Designation, content: &str) -> SendRequest {
    SendRequest {
        designation,
        payload: Some(Payload::Content { id: id(content) }),
    }
}

pub const MECHANISMS: [Mechanism; 6] = [
    Mechanism::Algorithm,
    Mechanism::Fractional,
    Mechanism::MultiRole,
    Mechanism::Performers,
    Mechanism::Roles,
    Mechanism::All,
];

pub fn with(mut d: Designation, m: Mechanism) -> Designation {
    match m {
        Mechanism::Algorithm => d.algorithm = Some(id(DISTRIBUTION)),
        Mechanism::Fractional => d.fractional = Some(id(FRAC_PERSIST)),
        Mechanism::MultiRole => d.multi_role = Some(id(MULTI)),
        Mechanism::Performers => d.performers = set(&["Ann", "Ivy", "Nick"]),
        Mechanism::Roles => d.roles = set(&["Receiver", "AudioOnly"]),
        Mechanism::All => d.all = true,
    }
    d
}

/// Receivers that hold the flag for one part kind.
pub fn able(kind: Capability) -> BTreeSet<String> {
    let v = venue();
    ROSTER
        .iter()
        .filter(|(_, role)| v.role(role).unwrap().role.capabilities.has(kind))
        .map(|(n, _)| n.to_string())
        .collect()
}

/// Who each mechanism reaches on its own, worked out from the fixture.
pub fn expected(m: Mechanism, p: &Performance) -> BTreeSet<String> {
    let image = able(Capability::ReceiveImage);
    let text = able(Capability::ReceiveText);
    let audio = able(Capability::ReceiveAudio);
    match m {
        // First step of the distribution: the image to the Receiver role.
        Mechanism::Algorithm => set(&["Nick", "Rachel"]),
        Mechanism::Fractional => {
            let part = p.fraction_memory(&id(FRAC_PERSIST)).expect("resolved once");
            let a: BTreeSet<_> = part[0].iter().filter(|n| image.contains(*n)).cloned().collect();
            let b: BTreeSet<_> = part[1].iter().filter(|n| text.contains(*n)).cloned().collect();
            a.union(&b).cloned().collect()
        }
        // Receiver role is bound to the image, AudioOnly to the audio.
        Mechanism::MultiRole => {
            let by_image: BTreeSet<_> = set(&["Nick", "Rachel"]).intersection(&image).cloned().collect();
            by_image.union(&set(&["Ann"]).intersection(&audio).cloned().collect()).cloned().collect()
        }
        Mechanism::Performers => ["Ann", "Ivy", "Nick"].iter().map(|s| s.to_string()).filter(|n| image.contains(n)).collect(),
        Mechanism::Roles => set(&["Nick", "Rachel", "Ann"]).intersection(&image).cloned().collect(),
        Mechanism::All => image,
    }
}
