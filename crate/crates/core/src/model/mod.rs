//! Persistent value types shared by the store, the runtime and the wire
//! protocol. All of them serialize to JSON with stable field names.

mod capability;
mod content;
mod id;
mod passcode;
mod program;
mod validate;

pub use capability::{Capability, CapabilitySet, UnknownCapability};
pub use content::*;
pub use id::ObjectId;
pub use passcode::{LockRecord, PasscodeDigest};
pub use program::*;
pub use validate::{Validate, Violation, Violations};

use serde::{Deserialize, Serialize};

/// Version written into every stored document.
pub const FORMAT_VERSION: u32 = 1;

/// Anything the store can persist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Document {
    Content(ContentObject),
    Collection(Collection),
    Role(Role),
    Venue(Venue),
    Interface(InterfaceObject),
    MultiRoleAssignment(MultiRoleAssignment),
    FractionalAssignment(FractionalAssignment),
    Algorithm(AlgorithmObject),
}

macro_rules! each_document {
    ($doc:expr, $x:ident => $body:expr) => {
        match $doc {
            Document::Content($x) => $body,
            Document::Collection($x) => $body,
            Document::Role($x) => $body,
            Document::Venue($x) => $body,
            Document::Interface($x) => $body,
            Document::MultiRoleAssignment($x) => $body,
            Document::FractionalAssignment($x) => $body,
            Document::Algorithm($x) => $body,
        }
    };
}

impl Document {
    pub fn id(&self) -> &ObjectId {
        each_document!(self, x => &x.id)
    }

    pub fn name(&self) -> &str {
        each_document!(self, x => &x.name)
    }

    pub fn lock(&self) -> Option<&LockRecord> {
        each_document!(self, x => x.lock.as_ref())
    }

    pub fn lock_mut(&mut self) -> &mut Option<LockRecord> {
        each_document!(self, x => &mut x.lock)
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Document::Content(_) => "content",
            Document::Collection(_) => "collection",
            Document::Role(_) => "role",
            Document::Venue(_) => "venue",
            Document::Interface(_) => "interface",
            Document::MultiRoleAssignment(_) => "multi_role_assignment",
            Document::FractionalAssignment(_) => "fractional_assignment",
            Document::Algorithm(_) => "algorithm",
        }
    }

    /// Ids of other stored objects this document depends on.
    pub fn referenced_ids(&self) -> Vec<&ObjectId> {
        match self {
            Document::Collection(c) => c.members.referenced_ids(),
            Document::Interface(i) => i.elements.iter().map(|e| &e.target).collect(),
            Document::MultiRoleAssignment(m) => {
                let mut ids: Vec<&ObjectId> = vec![&m.venue_id];
                ids.extend(m.bindings.values());
                ids
            }
            Document::FractionalAssignment(f) => f.fractions.iter().collect(),
            Document::Algorithm(a) => a.referenced_ids(),
            Document::Content(_) | Document::Role(_) | Document::Venue(_) => Vec::new(),
        }
    }
}

/// On-disk wrapper carrying the format version.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub document: Document,
}
