//! Turning fetched, uploaded and synthesized media into stored content.

use super::{ContentStore, StoreError};
use crate::audio::{self, AudioError};
use crate::model::*;

/// Caller-supplied facts about a web audio URL.
#[derive(Clone, Debug, Default)]
pub struct WebAudioOptions {
    /// Display name; defaults to the last path segment of the URL.
    pub name: Option<String>,
    /// Asserted by the caller; copyrighted material is refused.
    pub copyrighted: bool,
}

const WAV_MIME: &str = "audio/wav";

impl ContentStore {
    /// Copies audio from `url`, measures it and stores it as `audio-web`.
    /// Saving the same URL twice yields two objects.
    pub fn save_web_audio(&self, url: &str, opts: WebAudioOptions) -> Result<ContentObject, StoreError> {
        if opts.copyrighted {
            return Err(StoreError::Copyrighted);
        }
        let fetched = self.fetcher.fetch(url)?;
        let name = opts.name.unwrap_or_else(|| url_basename(url));
        self.store_audio(
            &fetched.bytes,
            fetched.content_type.as_deref(),
            ContentKind::AudioWeb,
            name,
            BlobOrigin::WebCopy { url: url.to_string() },
        )
    }

    /// Renders `text` through the configured adapter and stores it as `audio-tts`.
    pub fn save_tts(&self, text: &str, language: &str) -> Result<ContentObject, StoreError> {
        let render = audio::render_tts(text, language, self.tts.as_ref())?;
        let blob_id = self.write_blob(&render.wav)?;
        self.insert_content(ContentObject {
            id: ObjectId::from("pending"),
            kind: ContentKind::AudioTts,
            name: text.to_string(),
            media: Media::Blob(BlobRef {
                blob_id,
                mime: WAV_MIME.into(),
                origin: BlobOrigin::Tts {
                    language: language.to_string(),
                    text: text.to_string(),
                },
                sample_count: Some(render.pcm.len() as u64),
            }),
            duration_ms: Some(render.duration_ms),
            lock: None,
        })
    }

    /// Copies an image whose URL path ends in `.jpg` or `.png`.
    pub fn save_web_image(&self, url: &str, name: Option<String>) -> Result<ContentObject, StoreError> {
        if !has_image_extension(url) {
            return Err(StoreError::BadImageUrl(url.to_string()));
        }
        let fetched = self.fetcher.fetch(url)?;
        let mime = image_mime(&fetched.bytes).ok_or(StoreError::NotImage)?;
        self.store_image(
            &fetched.bytes,
            mime,
            ContentKind::ImageWeb,
            name.unwrap_or_else(|| url_basename(url)),
            BlobOrigin::WebCopy { url: url.to_string() },
        )
    }

    /// Stores uploaded media as `audio-upload` or `image-upload`.
    pub fn save_upload(
        &self,
        bytes: &[u8],
        mime: Option<&str>,
        kind: ContentKind,
        name: &str,
    ) -> Result<ContentObject, StoreError> {
        match kind {
            ContentKind::AudioUpload => {
                self.store_audio(bytes, mime, kind, name.to_string(), BlobOrigin::Upload)
            }
            ContentKind::ImageUpload => {
                let mime = image_mime(bytes).ok_or(StoreError::NotImage)?;
                self.store_image(bytes, mime, kind, name.to_string(), BlobOrigin::Upload)
            }
            _ => Err(StoreError::Invalid(Violations(vec![Violation::new(
                "kind",
                "uploads are audio-upload or image-upload",
            )]))),
        }
    }

    pub fn save_teleprompt(&self, name: &str, spec: TelepromptSpec) -> Result<ContentObject, StoreError> {
        self.insert_content(ContentObject {
            id: ObjectId::from("pending"),
            kind: ContentKind::Teleprompt,
            name: name.to_string(),
            media: Media::Teleprompt(spec),
            duration_ms: None,
            lock: None,
        })
    }

    /// Stores a collection; sentences and layers are rendered from their
    /// members' current audio.
    pub fn save_collection(&self, name: &str, members: CollectionMembers) -> Result<Collection, StoreError> {
        let doc = self.insert(Document::Collection(Collection {
            id: ObjectId::from("pending"),
            name: name.to_string(),
            members,
            rendered: None,
            lock: None,
        }))?;
        match doc {
            Document::Collection(c) => Ok(c),
            _ => unreachable!("insert preserves the document type"),
        }
    }

    fn store_audio(
        &self,
        bytes: &[u8],
        mime: Option<&str>,
        kind: ContentKind,
        name: String,
        origin: BlobOrigin,
    ) -> Result<ContentObject, StoreError> {
        let pcm = audio::decode::decode_audio(bytes, mime).map_err(|e| match e {
            AudioError::NotAudio => StoreError::NotAudio,
            other => StoreError::Audio(other),
        })?;
        let wav = audio::wav::encode(&pcm);
        let blob_id = self.write_blob(&wav)?;
        self.insert_content(ContentObject {
            id: ObjectId::from("pending"),
            kind,
            name,
            media: Media::Blob(BlobRef {
                blob_id,
                mime: WAV_MIME.into(),
                origin,
                sample_count: Some(pcm.len() as u64),
            }),
            duration_ms: Some(pcm.duration_ms()),
            lock: None,
        })
    }

    fn store_image(
        &self,
        bytes: &[u8],
        mime: &str,
        kind: ContentKind,
        name: String,
        origin: BlobOrigin,
    ) -> Result<ContentObject, StoreError> {
        let blob_id = self.write_blob(bytes)?;
        self.insert_content(ContentObject {
            id: ObjectId::from("pending"),
            kind,
            name,
            media: Media::Blob(BlobRef {
                blob_id,
                mime: mime.into(),
                origin,
                sample_count: None,
            }),
            duration_ms: None,
            lock: None,
        })
    }

    fn insert_content(&self, content: ContentObject) -> Result<ContentObject, StoreError> {
        match self.insert(Document::Content(content))? {
            Document::Content(c) => Ok(c),
            _ => unreachable!("insert preserves the document type"),
        }
    }
}

fn url_path(url: &str) -> &str {
    let without_query = url.split(['?', '#']).next().unwrap_or(url);
    match without_query.find("://") {
        Some(i) => {
            let rest = &without_query[i + 3..];
            rest.find('/').map_or("", |j| &rest[j..])
        }
        None => without_query,
    }
}

fn url_basename(url: &str) -> String {
    let path = url_path(url).trim_end_matches('/');
    let base = path.rsplit('/').next().unwrap_or("");
    if base.is_empty() {
        url.to_string()
    } else {
        base.to_string()
    }
}

/// `.jpg` or `.png` at the end of the URL path, ignoring case.
pub fn has_image_extension(url: &str) -> bool {
    let path = url_path(url).to_ascii_lowercase();
    path.ends_with(".jpg") || path.ends_with(".png")
}

/// Media type from magic bytes; `None` for anything but JPEG or PNG.
pub fn image_mime(bytes: &[u8]) -> Option<&'static str> {
    if bytes.starts_with(&[0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A]) {
        Some("image/png")
    } else if bytes.starts_with(&[0xFF, 0xD8, 0xFF]) {
        Some("image/jpeg")
    } else {
        None
    }
}
