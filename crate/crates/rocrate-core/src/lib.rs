//! RO-Crate toolkit: an in-memory flat entity graph, flattened compacted
//! JSON-LD reading and writing, conformance validation, packaging
//! (directory, BagIt, ZIP) and static HTML previews.
//!
//! The [`oracle`] module is an executable first-order rendition of the same
//! model — ground facts plus forward-chained production rules emitting
//! JSON-LD — used as an independent cross-check of the serializer and the
//! mentions closure.

pub mod context;
pub mod graph;
pub mod id;
pub mod jsonld;
pub mod oracle;
pub mod package;
pub mod preview;
pub mod validate;

mod dates;
mod entity;

pub use context::{ContextError, TermContext};
pub use entity::{Entity, Number, PropertyValue, Scalar};
pub use graph::{Classification, CrateGraph, GraphError};
pub use id::EntityId;
pub use jsonld::{ParseError, ParseReport, ParseWarning, SerializeError, UnknownTerm};
pub use oracle::{Equivalence, EquivalenceDiff, Fact, FactStore, OracleError, Term};
pub use package::{BagAlgorithm, BagManifest, PackageError, PayloadEntry, PayloadSource};
pub use preview::PreviewDocument;
pub use validate::{Finding, Profile, ProfileError, Severity, ValidationReport, Verdict};

/// Default conformance IRI emitted by newly created crates.
pub const SPEC_CONFORMANCE_IRI: &str = "https://w3id.org/ro/crate/1.1";

/// Context IRI of the bundled 1.1 term table.
pub const CONTEXT_IRI: &str = "https://w3id.org/ro/crate/1.1/context";

/// Canonical name of the metadata file.
pub const METADATA_FILE_NAME: &str = "ro-crate-metadata.json";

/// Legacy metadata file name, accepted on read with a warning.
pub const LEGACY_METADATA_FILE_NAME: &str = "ro-crate-metadata.jsonld";

/// Name of the generated HTML preview file.
pub const PREVIEW_FILE_NAME: &str = "ro-crate-preview.html";
