//! Declarative upsert of documents whose ids the author chose.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{ContentStore, StoreError};
use crate::model::{Document, ObjectId, PasscodeDigest, Validate, Violation, Violations};

/// A venue file: store documents plus plaintext venue passcodes, which are
/// hashed on apply and never written back.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VenueFile {
    pub documents: Vec<Document>,
    /// Venue id to passcode.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub passcodes: BTreeMap<ObjectId, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Created,
    Updated,
    Unchanged,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Applied {
    pub id: ObjectId,
    #[serde(rename = "type")]
    pub type_name: String,
    pub outcome: Outcome,
}

impl ContentStore {
    /// Creates or replaces each document under its own id.
    ///
    /// Documents are applied once their references exist, so file order
    /// does not matter. Applying the same file twice writes nothing the
    /// second time. Every document is validated before any is written.
    pub fn apply(&self, file: &VenueFile) -> Result<Vec<Applied>, StoreError> {
        let mut docs = file.documents.clone();
        let mut violations = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, doc) in docs.iter().enumerate() {
            if !seen.insert(doc.id().clone()) {
                violations.push(Violation::new(format!("documents[{i}].id"), format!("duplicate id {}", doc.id())));
            }
            let mut inner = Vec::new();
            doc.collect_violations(&mut inner);
            for v in inner {
                violations.push(Violation::new(format!("documents[{i}].{}", v.field), v.message));
            }
        }
        for id in file.passcodes.keys() {
            if !docs.iter().any(|d| matches!(d, Document::Venue(v) if &v.id == id)) {
                violations.push(Violation::new(format!("passcodes.{id}"), "no venue with this id in the file"));
            }
        }
        if !violations.is_empty() {
            return Err(Violations(violations).into());
        }
        for doc in &mut docs {
            if let Document::Venue(v) = doc {
                if let Some(plain) = file.passcodes.get(&v.id) {
                    let kept = match self.get(&v.id) {
                        Ok(Document::Venue(old)) => old.passcode.filter(|d| d.verify(plain)),
                        _ => None,
                    };
                    v.passcode = Some(kept.unwrap_or_else(|| PasscodeDigest::new(plain)));
                }
            }
        }

        let mut applied = Vec::with_capacity(docs.len());
        let mut pending = docs;
        while !pending.is_empty() {
            let snap = self.snapshot();
            let ready = pending.iter().position(|d| {
                d.referenced_ids()
                    .into_iter()
                    .all(|r| r == d.id() || snap.contains_key(r))
            });
            // Nothing is ready: apply the first to surface its missing references.
            let doc = pending.remove(ready.unwrap_or(0));
            applied.push(self.upsert(doc)?);
        }
        Ok(applied)
    }

    fn upsert(&self, mut doc: Document) -> Result<Applied, StoreError> {
        let _w = self.writer.lock().expect("writer lock poisoned");
        let current = self.snapshot().get(doc.id()).cloned();
        *doc.lock_mut() = None;
        self.prepare(&mut doc)?;
        let applied = |outcome| Applied {
            id: doc.id().clone(),
            type_name: doc.type_name().to_string(),
            outcome,
        };
        let Some(mut current) = current else {
            let a = applied(Outcome::Created);
            self.commit(doc)?;
            return Ok(a);
        };
        if current.type_name() != doc.type_name() {
            return Err(StoreError::WrongKind {
                id: doc.id().clone(),
                expected: current.type_name(),
            });
        }
        let locked = current.lock_mut().take().is_some();
        if current == doc {
            return Ok(applied(Outcome::Unchanged));
        }
        if locked {
            return Err(StoreError::Locked(doc.id().clone()));
        }
        let a = applied(Outcome::Updated);
        self.commit(doc)?;
        Ok(a)
    }
}
