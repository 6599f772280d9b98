//! Document and blob persistence.
//!
//! Layout under the store root:
//!
//! ```text
//! objects/<id>.json   one document per stored object
//! blobs/<blob-id>     media bytes, addressed by their SHA-256
//! ```
//!
//! Writes are serialized through a single writer lock. Readers take a cheap
//! snapshot (`Arc` clone) of the in-memory index and never wait on disk I/O.

mod fetch;
mod apply;
mod ingest;

pub use fetch::{FetchError, Fetched, Fetcher, HttpFetcher, StaticFetcher};
pub use apply::{Applied, Outcome, VenueFile};
pub use ingest::WebAudioOptions;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use crate::audio::{self, AudioError, Pcm, TtsAdapter, TtsError};
use crate::model::*;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("unknown id {0}")]
    NotFound(ObjectId),
    #[error("{0} is locked")]
    Locked(ObjectId),
    #[error("{0} is already locked")]
    AlreadyLocked(ObjectId),
    #[error("{0} is not locked")]
    NotLocked(ObjectId),
    #[error("wrong passcode for {0}")]
    WrongPasscode(ObjectId),
    #[error("{id} is referenced by {}", join_ids(.by))]
    Referenced { id: ObjectId, by: Vec<ObjectId> },
    #[error("references to missing objects: {}", join_ids(.0))]
    MissingReferences(Vec<ObjectId>),
    #[error("{id} is not {expected}")]
    WrongKind { id: ObjectId, expected: &'static str },
    #[error("invalid object: {0}")]
    Invalid(#[from] Violations),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error("copyrighted material is not allowed")]
    Copyrighted,
    #[error("media is not audio")]
    NotAudio,
    #[error("media is not an image")]
    NotImage,
    #[error("image URL must link directly to a .jpg or .png file, not an html page: {0}")]
    BadImageUrl(String),
    #[error(transparent)]
    Tts(#[from] TtsError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("blob {0} is missing")]
    MissingBlob(String),
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt document {path}: {source}")]
    Corrupt {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn join_ids(ids: &[ObjectId]) -> String {
    ids.iter().map(ObjectId::as_str).collect::<Vec<_>>().join(", ")
}

/// Restricts [`ContentStore::list`].
#[derive(Clone, Debug, Default)]
pub struct ListFilter {
    /// A content kind (`audio-tts`), collection kind (`audio-sentence`) or
    /// document type (`venue`).
    pub kind: Option<String>,
    /// Only members of this folder.
    pub folder: Option<ObjectId>,
}

type Index = BTreeMap<ObjectId, Document>;

pub struct ContentStore {
    root: PathBuf,
    index: RwLock<Arc<Index>>,
    writer: Mutex<()>,
    fetcher: Box<dyn Fetcher>,
    tts: Arc<dyn TtsAdapter>,
}

impl ContentStore {
    /// Opens (or creates) a store rooted at `root`, loading every document.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join("objects"))?;
        fs::create_dir_all(root.join("blobs"))?;
        let mut index = Index::new();
        let mut entries: Vec<_> = fs::read_dir(root.join("objects"))?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let bytes = fs::read(&path)?;
            let stored: StoredDocument = serde_json::from_slice(&bytes)
                .map_err(|source| StoreError::Corrupt { path: path.clone(), source })?;
            index.insert(stored.document.id().clone(), stored.document);
        }
        Ok(Self {
            root,
            index: RwLock::new(Arc::new(index)),
            writer: Mutex::new(()),
            fetcher: Box::new(HttpFetcher::default()),
            tts: Arc::new(audio::ToneStub),
        })
    }

    pub fn with_fetcher(mut self, fetcher: impl Fetcher + 'static) -> Self {
        self.fetcher = Box::new(fetcher);
        self
    }

    pub fn with_tts(mut self, adapter: Arc<dyn TtsAdapter>) -> Self {
        self.tts = adapter;
        self
    }

    pub fn tts(&self) -> &Arc<dyn TtsAdapter> {
        &self.tts
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// A consistent read-only view of every stored document.
    pub fn snapshot(&self) -> Arc<BTreeMap<ObjectId, Document>> {
        self.index.read().expect("index lock poisoned").clone()
    }

    pub fn get(&self, id: &ObjectId) -> Result<Document, StoreError> {
        self.snapshot()
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(id.clone()))
    }

    pub fn get_content(&self, id: &ObjectId) -> Result<ContentObject, StoreError> {
        match self.get(id)? {
            Document::Content(c) => Ok(c),
            _ => Err(StoreError::WrongKind {
                id: id.clone(),
                expected: "a content object",
            }),
        }
    }

    pub fn venue(&self, id: &ObjectId) -> Result<Venue, StoreError> {
        match self.get(id)? {
            Document::Venue(v) => Ok(v),
            _ => Err(StoreError::WrongKind {
                id: id.clone(),
                expected: "a venue",
            }),
        }
    }

    pub fn find_by_name(&self, type_name: &str, name: &str) -> Option<Document> {
        self.snapshot()
            .values()
            .find(|d| d.type_name() == type_name && d.name() == name)
            .cloned()
    }

    pub fn list(&self, filter: &ListFilter) -> Vec<ObjectId> {
        let snap = self.snapshot();
        let folder_members = filter.folder.as_ref().map(|f| match snap.get(f) {
            Some(Document::Collection(Collection {
                members: CollectionMembers::Folder { members },
                ..
            })) => members.clone(),
            _ => Default::default(),
        });
        snap.values()
            .filter(|d| {
                filter.kind.as_deref().is_none_or(|k| kind_matches(d, k))
                    && folder_members.as_ref().is_none_or(|m| m.contains(d.id()))
            })
            .map(|d| d.id().clone())
            .collect()
    }

    /// Stores a new document under a fresh id and returns the stored form.
    /// Sentences and layers are rendered before they are saved.
    pub fn insert(&self, mut doc: Document) -> Result<Document, StoreError> {
        let _w = self.writer.lock().expect("writer lock poisoned");
        set_id(&mut doc, ObjectId::generate());
        *doc.lock_mut() = None;
        self.prepare(&mut doc)?;
        self.commit(doc)
    }

    /// Replaces an existing, unlocked document. The lock state is kept.
    pub fn update(&self, mut doc: Document) -> Result<Document, StoreError> {
        let _w = self.writer.lock().expect("writer lock poisoned");
        let current = self.get(doc.id())?;
        if current.lock().is_some() {
            return Err(StoreError::Locked(doc.id().clone()));
        }
        if current.type_name() != doc.type_name() {
            return Err(StoreError::WrongKind {
                id: doc.id().clone(),
                expected: current.type_name(),
            });
        }
        *doc.lock_mut() = None;
        self.prepare(&mut doc)?;
        self.commit(doc)
    }

    /// Re-renders a sentence or layer from the current member audio.
    pub fn resave(&self, id: &ObjectId) -> Result<Document, StoreError> {
        let doc = self.get(id)?;
        self.update(doc)
    }

    pub fn delete(&self, id: &ObjectId) -> Result<(), StoreError> {
        let _w = self.writer.lock().expect("writer lock poisoned");
        let snap = self.snapshot();
        let doc = snap.get(id).ok_or_else(|| StoreError::NotFound(id.clone()))?;
        if doc.lock().is_some() {
            return Err(StoreError::Locked(id.clone()));
        }
        let by: Vec<ObjectId> = snap
            .values()
            .filter(|d| d.id() != id && d.referenced_ids().contains(&id))
            .map(|d| d.id().clone())
            .collect();
        if !by.is_empty() {
            return Err(StoreError::Referenced { id: id.clone(), by });
        }
        match fs::remove_file(self.object_path(id)) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        let mut next = (*snap).clone();
        next.remove(id);
        *self.index.write().expect("index lock poisoned") = Arc::new(next);
        Ok(())
    }

    pub fn lock(&self, id: &ObjectId, passcode: &str) -> Result<LockRecord, StoreError> {
        let _w = self.writer.lock().expect("writer lock poisoned");
        let mut doc = self.get(id)?;
        if doc.lock().is_some() {
            return Err(StoreError::AlreadyLocked(id.clone()));
        }
        let record = LockRecord::new(passcode);
        *doc.lock_mut() = Some(record.clone());
        self.commit(doc)?;
        Ok(record)
    }

    pub fn unlock(&self, id: &ObjectId, passcode: &str) -> Result<(), StoreError> {
        let _w = self.writer.lock().expect("writer lock poisoned");
        let mut doc = self.get(id)?;
        match doc.lock() {
            None => return Err(StoreError::NotLocked(id.clone())),
            Some(lock) if !lock.opens_with(passcode) => {
                return Err(StoreError::WrongPasscode(id.clone()))
            }
            Some(_) => {}
        }
        *doc.lock_mut() = None;
        self.commit(doc)?;
        Ok(())
    }

    pub fn blob(&self, blob_id: &str) -> Result<Vec<u8>, StoreError> {
        if !blob_id.chars().all(|c| c.is_ascii_hexdigit()) || blob_id.is_empty() {
            return Err(StoreError::MissingBlob(blob_id.to_string()));
        }
        fs::read(self.root.join("blobs").join(blob_id)).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::MissingBlob(blob_id.to_string()),
            _ => e.into(),
        })
    }

    /// The audio an object plays: an audio content object or a rendered
    /// sentence/layer.
    pub fn audio_pcm(&self, id: &ObjectId) -> Result<Pcm, StoreError> {
        let blob = match self.get(id)? {
            Document::Content(c) if c.kind.is_audio() => c.blob().cloned(),
            Document::Collection(c) if c.members.renders_audio() => {
                c.rendered.map(|r| r.blob)
            }
            _ => None,
        }
        .ok_or(StoreError::WrongKind {
            id: id.clone(),
            expected: "audio",
        })?;
        let bytes = self.blob(&blob.blob_id)?;
        let raw = audio::wav::decode(&bytes)?;
        Ok(audio::decode::normalize(raw))
    }

    pub(crate) fn write_blob(&self, bytes: &[u8]) -> Result<String, StoreError> {
        let id = crate::content_address(bytes);
        let path = self.root.join("blobs").join(&id);
        if !path.exists() {
            write_atomic(&path, bytes)?;
        }
        Ok(id)
    }

    fn object_path(&self, id: &ObjectId) -> PathBuf {
        self.root.join("objects").join(format!("{id}.json"))
    }

    /// Validates, checks references and renders audio collections.
    fn prepare(&self, doc: &mut Document) -> Result<(), StoreError> {
        self.check_references(doc)?;
        if let Document::Collection(c) = doc {
            self.render_collection(c)?;
        }
        doc.validate()?;
        Ok(())
    }

    fn commit(&self, doc: Document) -> Result<Document, StoreError> {
        let stored = StoredDocument {
            format_version: FORMAT_VERSION,
            document: doc,
        };
        let mut bytes = serde_json::to_vec_pretty(&stored).expect("documents always serialize");
        bytes.push(b'\n');
        let path = self.object_path(stored.document.id());
        let unchanged = fs::read(&path).is_ok_and(|existing| existing == bytes);
        if !unchanged {
            write_atomic(&path, &bytes)?;
        }
        let mut next = (*self.snapshot()).clone();
        next.insert(stored.document.id().clone(), stored.document.clone());
        *self.index.write().expect("index lock poisoned") = Arc::new(next);
        Ok(stored.document)
    }

    fn check_references(&self, doc: &Document) -> Result<(), StoreError> {
        let snap = self.snapshot();
        let missing: Vec<ObjectId> = doc
            .referenced_ids()
            .into_iter()
            .filter(|id| !snap.contains_key(*id) && *id != doc.id())
            .cloned()
            .collect();
        if !missing.is_empty() {
            return Err(StoreError::MissingReferences(missing));
        }
        let expect = |id: &ObjectId, ok: bool, expected: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(StoreError::WrongKind {
                    id: id.clone(),
                    expected,
                })
            }
        };
        match doc {
            Document::Collection(c) => match &c.members {
                CollectionMembers::AudioImagePair { audio, image } => {
                    expect(audio, is_audio(&snap[audio]), "audio")?;
                    expect(image, is_image(&snap[image]), "an image")?;
                }
                CollectionMembers::AudioSentence { members, .. } => {
                    for m in members {
                        expect(m, is_audio(&snap[m]), "audio")?;
                    }
                }
                CollectionMembers::AudioLayer { entries } => {
                    for e in entries {
                        expect(&e.audio, is_audio(&snap[&e.audio]), "audio")?;
                    }
                }
                CollectionMembers::ImagePhrase { images } => {
                    for i in images {
                        expect(i, is_image(&snap[i]), "an image")?;
                    }
                }
                CollectionMembers::Folder { members } => {
                    if members.contains(&c.id) {
                        return Err(StoreError::Invalid(Violations(vec![Violation::new(
                            "members",
                            "folder cannot contain itself",
                        )])));
                    }
                }
            },
            Document::MultiRoleAssignment(m) => {
                let Some(Document::Venue(venue)) = snap.get(&m.venue_id) else {
                    return Err(StoreError::WrongKind {
                        id: m.venue_id.clone(),
                        expected: "a venue",
                    });
                };
                let mut violations = Vec::new();
                for (role_name, content) in &m.bindings {
                    let Some(vr) = venue.role(role_name) else {
                        violations.push(Violation::new(
                            format!("bindings.{role_name}"),
                            "role does not exist in the venue",
                        ));
                        continue;
                    };
                    let needs = crate::venue::receive_needs(&*snap, content);
                    if !needs.iter().any(|cap| vr.role.capabilities.has(*cap)) {
                        violations.push(Violation::new(
                            format!("bindings.{role_name}"),
                            "role cannot receive the assigned content",
                        ));
                    }
                }
                if !violations.is_empty() {
                    return Err(StoreError::Invalid(Violations(violations)));
                }
            }
            Document::Algorithm(a) => {
                if let AlgorithmKind::TimedOrganization { entries } = &a.kind {
                    for e in entries {
                        let ok = matches!(
                            snap.get(&e.trigger),
                            Some(Document::Algorithm(AlgorithmObject {
                                kind: AlgorithmKind::Timer { .. } | AlgorithmKind::Metronome { .. },
                                ..
                            }))
                        );
                        expect(&e.trigger, ok, "a timer or metronome")?;
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn render_collection(&self, c: &mut Collection) -> Result<(), StoreError> {
        match &mut c.members {
            CollectionMembers::AudioSentence {
                members,
                offsets_ms,
            } => {
                let pcms = members
                    .iter()
                    .map(|id| self.audio_pcm(id))
                    .collect::<Result<Vec<_>, _>>()?;
                let inputs: Vec<_> = members
                    .iter()
                    .zip(&pcms)
                    .map(|(id, pcm)| audio::SentenceMember { id: id.clone(), pcm })
                    .collect();
                let render = audio::concatenate_sentence(&inputs)?;
                let blob_id = self.write_blob(&render.wav)?;
                *offsets_ms = render.offsets_ms.clone();
                c.rendered = Some(RenderedAudio {
                    blob: BlobRef {
                        blob_id,
                        mime: "audio/wav".into(),
                        origin: BlobOrigin::Rendered {
                            collection: RenderedFrom::Sentence,
                        },
                        sample_count: Some(render.pcm.len() as u64),
                    },
                    duration_ms: render.total_duration_ms,
                    offset_samples: render.offset_samples,
                });
            }
            CollectionMembers::AudioLayer { entries } => {
                let pcms = entries
                    .iter()
                    .map(|e| self.audio_pcm(&e.audio))
                    .collect::<Result<Vec<_>, _>>()?;
                let inputs: Vec<_> = entries
                    .iter()
                    .zip(&pcms)
                    .map(|(e, pcm)| audio::MixInput {
                        start_ms: e.start_ms,
                        volume: e.volume,
                        pcm,
                    })
                    .collect();
                let pcm = audio::mix_layers(&inputs)?;
                let wav = audio::wav::encode(&pcm);
                let blob_id = self.write_blob(&wav)?;
                c.rendered = Some(RenderedAudio {
                    blob: BlobRef {
                        blob_id,
                        mime: "audio/wav".into(),
                        origin: BlobOrigin::Rendered {
                            collection: RenderedFrom::Layer,
                        },
                        sample_count: Some(pcm.len() as u64),
                    },
                    duration_ms: pcm.duration_ms(),
                    offset_samples: Vec::new(),
                });
            }
            _ => c.rendered = None,
        }
        Ok(())
    }
}

impl crate::venue::Catalog for ContentStore {
    fn document(&self, id: &ObjectId) -> Option<Document> {
        self.snapshot().get(id).cloned()
    }

    fn live_tts(&self, text: &str, language: &str) -> Result<crate::venue::Part, String> {
        crate::venue::tts_part(text, language, self.tts.as_ref(), |wav| {
            self.write_blob(wav).map_err(|e| e.to_string())
        })
    }
}

fn set_id(doc: &mut Document, id: ObjectId) {
    match doc {
        Document::Content(x) => x.id = id,
        Document::Collection(x) => x.id = id,
        Document::Role(x) => x.id = id,
        Document::Venue(x) => x.id = id,
        Document::Interface(x) => x.id = id,
        Document::MultiRoleAssignment(x) => x.id = id,
        Document::FractionalAssignment(x) => x.id = id,
        Document::Algorithm(x) => x.id = id,
    }
}

fn is_audio(doc: &Document) -> bool {
    match doc {
        Document::Content(c) => c.kind.is_audio(),
        Document::Collection(c) => c.members.renders_audio(),
        _ => false,
    }
}

fn is_image(doc: &Document) -> bool {
    matches!(doc, Document::Content(c) if c.kind.is_image())
}

fn kind_matches(doc: &Document, kind: &str) -> bool {
    if doc.type_name() == kind {
        return true;
    }
    match doc {
        Document::Content(c) => serde_json::to_value(c.kind).is_ok_and(|v| v == kind),
        Document::Collection(c) => c.members.kind_name() == kind,
        _ => false,
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}
