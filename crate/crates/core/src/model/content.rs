use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{LockRecord, ObjectId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContentKind {
    AudioWeb,
    AudioUpload,
    AudioTts,
    ImageWeb,
    ImageUpload,
    Teleprompt,
}

impl ContentKind {
    pub fn is_audio(self) -> bool {
        matches!(self, Self::AudioWeb | Self::AudioUpload | Self::AudioTts)
    }

    pub fn is_image(self) -> bool {
        matches!(self, Self::ImageWeb | Self::ImageUpload)
    }
}

/// Where a stored blob came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum BlobOrigin {
    WebCopy { url: String },
    Upload,
    Tts { language: String, text: String },
    Rendered { collection: RenderedFrom },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RenderedFrom {
    Sentence,
    Layer,
}

/// Reference to a media blob held in the store's blob directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlobRef {
    pub blob_id: String,
    pub mime: String,
    pub origin: BlobOrigin,
    /// Number of PCM frames, for audio blobs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelepromptSpec {
    pub text: String,
    pub font: String,
    /// Point size.
    pub size: f32,
    pub text_color: Rgb,
    pub background_color: Rgb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "media", rename_all = "kebab-case")]
pub enum Media {
    Blob(BlobRef),
    Teleprompt(TelepromptSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContentObject {
    pub id: ObjectId,
    pub kind: ContentKind,
    pub name: String,
    pub media: Media,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}

impl ContentObject {
    pub fn blob(&self) -> Option<&BlobRef> {
        match &self.media {
            Media::Blob(b) => Some(b),
            Media::Teleprompt(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerEntry {
    pub audio: ObjectId,
    pub start_ms: u64,
    /// Linear amplitude factor in [0, 1].
    pub volume: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CollectionMembers {
    Folder {
        members: BTreeSet<ObjectId>,
    },
    AudioImagePair {
        audio: ObjectId,
        image: ObjectId,
    },
    AudioSentence {
        members: Vec<ObjectId>,
        /// Start of each member in the rendered file. Filled in by the store.
        #[serde(default)]
        offsets_ms: Vec<u64>,
    },
    AudioLayer {
        entries: Vec<LayerEntry>,
    },
    ImagePhrase {
        images: Vec<ObjectId>,
    },
}

impl CollectionMembers {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Folder { .. } => "folder",
            Self::AudioImagePair { .. } => "audio-image-pair",
            Self::AudioSentence { .. } => "audio-sentence",
            Self::AudioLayer { .. } => "audio-layer",
            Self::ImagePhrase { .. } => "image-phrase",
        }
    }

    /// Every object id this collection points at, in declaration order.
    pub fn referenced_ids(&self) -> Vec<&ObjectId> {
        match self {
            Self::Folder { members } => members.iter().collect(),
            Self::AudioImagePair { audio, image } => vec![audio, image],
            Self::AudioSentence { members, .. } => members.iter().collect(),
            Self::AudioLayer { entries } => entries.iter().map(|e| &e.audio).collect(),
            Self::ImagePhrase { images } => images.iter().collect(),
        }
    }

    /// Sentences and layers render to a new audio file and then act as audio.
    pub fn renders_audio(&self) -> bool {
        matches!(self, Self::AudioSentence { .. } | Self::AudioLayer { .. })
    }
}

/// Rendered audio for a sentence or layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedAudio {
    pub blob: BlobRef,
    pub duration_ms: u64,
    /// Sample-exact start of each sentence member; empty for layers.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub offset_samples: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Collection {
    pub id: ObjectId,
    pub name: String,
    #[serde(flatten)]
    pub members: CollectionMembers,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rendered: Option<RenderedAudio>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lock: Option<LockRecord>,
}
