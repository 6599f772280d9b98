use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Catalog;
use crate::model::*;
use crate::osc::OscMessage;

/// What a receiver does with a delivered part; decides the receive flag
/// it needs and the verb it is logged under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartKind {
    Audio,
    LiveTts,
    Image,
    Text,
    Teleprompt,
    Osc,
}

impl PartKind {
    pub fn receive_capability(self) -> Capability {
        match self {
            Self::Audio => Capability::ReceiveAudio,
            Self::LiveTts => Capability::ReceiveTtsLive,
            Self::Image => Capability::ReceiveImage,
            Self::Text | Self::Teleprompt => Capability::ReceiveText,
            Self::Osc => Capability::ReceiveOsc,
        }
    }

    pub fn verb(self) -> &'static str {
        match self {
            Self::Audio => "play audio",
            Self::LiveTts => "play tts",
            Self::Image => "show image",
            Self::Text | Self::Teleprompt => "show text",
            Self::Osc => "send osc",
        }
    }
}

/// One deliverable piece of a cue. Audio and images travel by blob id and
/// are fetched by the receiver; text, teleprompts and OSC are inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub kind: PartKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_id: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blob_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mime: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    /// Member start times for rendered sentences.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offsets_ms: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teleprompt: Option<TelepromptSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub osc: Option<OscMessage>,
}

impl Part {
    pub fn bare(kind: PartKind, name: impl Into<String>) -> Self {
        Self {
            kind,
            name: name.into(),
            content_id: None,
            blob_id: None,
            mime: None,
            duration_ms: None,
            offsets_ms: Vec::new(),
            text: None,
            teleprompt: None,
            osc: None,
        }
    }

    pub fn text(text: &str) -> Self {
        Self {
            text: Some(text.to_string()),
            ..Self::bare(PartKind::Text, text)
        }
    }

    pub fn osc(message: OscMessage) -> Self {
        Self {
            osc: Some(message.clone()),
            ..Self::bare(PartKind::Osc, message.address)
        }
    }
}

/// What a sender asks to distribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Content { id: ObjectId },
    Text { text: String },
    Tts { text: String, language: String },
    Osc { message: OscMessage },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContentError {
    #[error("unknown content {0}")]
    NotFound(ObjectId),
    #[error("{0} cannot be distributed")]
    NotDispatchable(ObjectId),
    #[error("{0} has not been rendered")]
    NotRendered(ObjectId),
    #[error("text must not be empty")]
    EmptyText,
    #[error("live tts failed: {0}")]
    Tts(String),
}

/// Parts and the send flag a payload requires.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub send_capability: Capability,
    pub parts: Vec<Part>,
}

pub fn resolve_payload(catalog: &dyn Catalog, payload: &Payload) -> Result<Resolved, ContentError> {
    match payload {
        Payload::Content { id } => {
            let doc = catalog.document(id).ok_or_else(|| ContentError::NotFound(id.clone()))?;
            Ok(Resolved {
                send_capability: send_capability_for(&doc).ok_or_else(|| ContentError::NotDispatchable(id.clone()))?,
                parts: content_parts(catalog, id)?,
            })
        }
        Payload::Text { text } => {
            if text.trim().is_empty() {
                return Err(ContentError::EmptyText);
            }
            Ok(Resolved {
                send_capability: Capability::SendText,
                parts: vec![Part::text(text)],
            })
        }
        Payload::Tts { text, language } => Ok(Resolved {
            send_capability: Capability::SendTtsLive,
            parts: vec![catalog.live_tts(text, language).map_err(ContentError::Tts)?],
        }),
        Payload::Osc { message } => Ok(Resolved {
            send_capability: Capability::SendOsc,
            parts: vec![Part::osc(message.clone())],
        }),
    }
}

/// The send flag for distributing a stored object; `None` when it cannot
/// be sent directly.
pub fn send_capability_for(doc: &Document) -> Option<Capability> {
    match doc {
        Document::Content(c) if c.kind.is_audio() => Some(Capability::SendAudio),
        Document::Content(c) if c.kind.is_image() => Some(Capability::SendImage),
        Document::Content(_) => Some(Capability::SendText),
        Document::Collection(c) => Some(match c.members {
            CollectionMembers::AudioSentence { .. } | CollectionMembers::AudioLayer { .. } => Capability::SendAudio,
            CollectionMembers::ImagePhrase { .. } => Capability::SendImage,
            CollectionMembers::AudioImagePair { .. } | CollectionMembers::Folder { .. } => {
                Capability::SendAssociation
            }
        }),
        _ => None,
    }
}

const MAX_FOLDER_DEPTH: usize = 8;

/// Expands a content object or collection into deliverable parts.
pub fn content_parts(catalog: &dyn Catalog, id: &ObjectId) -> Result<Vec<Part>, ContentError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    expand(catalog, id, 0, &mut seen, &mut out)?;
    Ok(out)
}

fn expand(
    catalog: &dyn Catalog,
    id: &ObjectId,
    depth: usize,
    seen: &mut BTreeSet<ObjectId>,
    out: &mut Vec<Part>,
) -> Result<(), ContentError> {
    let doc = catalog.document(id).ok_or_else(|| ContentError::NotFound(id.clone()))?;
    match doc {
        Document::Content(c) => out.push(content_part(&c)),
        Document::Collection(c) => match &c.members {
            CollectionMembers::AudioImagePair { audio, image } => {
                expand(catalog, audio, depth + 1, seen, out)?;
                expand(catalog, image, depth + 1, seen, out)?;
            }
            CollectionMembers::ImagePhrase { images } => {
                for i in images {
                    expand(catalog, i, depth + 1, seen, out)?;
                }
            }
            CollectionMembers::AudioSentence { offsets_ms, .. } => {
                let r = c.rendered.as_ref().ok_or_else(|| ContentError::NotRendered(id.clone()))?;
                out.push(Part {
                    content_id: Some(c.id.clone()),
                    blob_id: Some(r.blob.blob_id.clone()),
                    mime: Some(r.blob.mime.clone()),
                    duration_ms: Some(r.duration_ms),
                    offsets_ms: offsets_ms.clone(),
                    ..Part::bare(PartKind::Audio, &c.name)
                });
            }
            CollectionMembers::AudioLayer { .. } => {
                let r = c.rendered.as_ref().ok_or_else(|| ContentError::NotRendered(id.clone()))?;
                out.push(Part {
                    content_id: Some(c.id.clone()),
                    blob_id: Some(r.blob.blob_id.clone()),
                    mime: Some(r.blob.mime.clone()),
                    duration_ms: Some(r.duration_ms),
                    ..Part::bare(PartKind::Audio, &c.name)
                });
            }
            CollectionMembers::Folder { members } => {
                if depth >= MAX_FOLDER_DEPTH || !seen.insert(c.id.clone()) {
                    return Ok(());
                }
                for m in members {
                    expand(catalog, m, depth + 1, seen, out)?;
                }
            }
        },
        _ => return Err(ContentError::NotDispatchable(id.clone())),
    }
    Ok(())
}

fn content_part(c: &ContentObject) -> Part {
    match &c.media {
        Media::Teleprompt(spec) => Part {
            content_id: Some(c.id.clone()),
            text: Some(spec.text.clone()),
            teleprompt: Some(spec.clone()),
            ..Part::bare(PartKind::Teleprompt, &c.name)
        },
        Media::Blob(b) => Part {
            content_id: Some(c.id.clone()),
            blob_id: Some(b.blob_id.clone()),
            mime: Some(b.mime.clone()),
            duration_ms: c.duration_ms,
            ..Part::bare(
                if c.kind.is_audio() { PartKind::Audio } else { PartKind::Image },
                &c.name,
            )
        },
    }
}

/// Receive flags of which a receiver needs at least one to get anything
/// from `id`.
pub fn receive_needs(catalog: &dyn Catalog, id: &ObjectId) -> BTreeSet<Capability> {
    content_parts(catalog, id)
        .map(|parts| parts.iter().map(|p| p.kind.receive_capability()).collect())
        .unwrap_or_default()
}
