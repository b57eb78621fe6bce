//! The versioned term context: a flat bidirectional map between short terms
//! and absolute IRIs, bundled at build time for offline operation.

use indexmap::IndexMap;
use std::collections::HashMap;
use thiserror::Error;

use crate::CONTEXT_IRI;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("unsupported context version: {0}")]
    UnsupportedVersion(String),
    #[error("term already mapped to a different IRI: {term}")]
    TermConflict { term: String },
}

/// Bundled 1.1 term table. One term per IRI and one IRI per term, so
/// expansion and compaction are mutual inverses.
///
/// Covers the schema.org mapping of the formal model (note that `File`
/// expands to `MediaObject`, and `Property`/`Class` to their RDF Schema
/// IRIs) plus the terms this toolkit reads and writes. `ComputationalWorkflow`
/// comes from Bioschemas.
const BUILTIN_1_1: &[(&str, &str)] = &[
    // Classes
    ("ContactPoint", "http://schema.org/ContactPoint"),
    ("CreativeWork", "http://schema.org/CreativeWork"),
    ("Dataset", "http://schema.org/Dataset"),
    ("File", "http://schema.org/MediaObject"),
    ("ImageObject", "http://schema.org/ImageObject"),
    ("Organization", "http://schema.org/Organization"),
    ("Person", "http://schema.org/Person"),
    ("Place", "http://schema.org/Place"),
    ("ScholarlyArticle", "http://schema.org/ScholarlyArticle"),
    (
        "SoftwareApplication",
        "http://schema.org/SoftwareApplication",
    ),
    ("SoftwareSourceCode", "http://schema.org/SoftwareSourceCode"),
    (
        "ComputationalWorkflow",
        "https://bioschemas.org/ComputationalWorkflow",
    ),
    ("FormalParameter", "https://bioschemas.org/FormalParameter"),
    ("Class", "http://www.w3.org/2000/01/rdf-schema#Class"),
    ("Property", "http://www.w3.org/2000/01/rdf-schema#Property"),
    // Properties
    ("about", "http://schema.org/about"),
    ("affiliation", "http://schema.org/affiliation"),
    ("author", "http://schema.org/author"),
    ("citation", "http://schema.org/citation"),
    ("contactPoint", "http://schema.org/contactPoint"),
    ("contentLocation", "http://schema.org/contentLocation"),
    ("contentSize", "http://schema.org/contentSize"),
    ("contributor", "http://schema.org/contributor"),
    ("creator", "http://schema.org/creator"),
    ("dateCreated", "http://schema.org/dateCreated"),
    ("dateModified", "http://schema.org/dateModified"),
    ("datePublished", "http://schema.org/datePublished"),
    ("description", "http://schema.org/description"),
    ("encodingFormat", "http://schema.org/encodingFormat"),
    ("funder", "http://schema.org/funder"),
    ("hasPart", "http://schema.org/hasPart"),
    ("identifier", "http://schema.org/identifier"),
    ("isPartOf", "http://schema.org/isPartOf"),
    ("keywords", "http://schema.org/keywords"),
    ("license", "http://schema.org/license"),
    ("mainEntity", "http://schema.org/mainEntity"),
    ("mentions", "http://schema.org/mentions"),
    ("name", "http://schema.org/name"),
    (
        "programmingLanguage",
        "http://schema.org/programmingLanguage",
    ),
    ("publisher", "http://schema.org/publisher"),
    ("sameAs", "http://schema.org/sameAs"),
    ("subjectOf", "http://schema.org/subjectOf"),
    ("thumbnail", "http://schema.org/thumbnail"),
    ("url", "http://schema.org/url"),
    ("version", "http://schema.org/version"),
    ("conformsTo", "http://purl.org/dc/terms/conformsTo"),
    ("type", "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"),
];

/// Versioned bidirectional term map, optionally extended with inline pairs
/// from a profile or a parsed document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermContext {
    version_iri: String,
    term_to_iri: IndexMap<String, String>,
    iri_to_term: HashMap<String, String>,
    extensions: IndexMap<String, String>,
}

impl TermContext {
    /// The bundled table for a supported spec version (currently `"1.1"`).
    pub fn builtin(version: &str) -> Result<Self, ContextError> {
        if version != "1.1" {
            return Err(ContextError::UnsupportedVersion(version.to_string()));
        }
        let mut term_to_iri = IndexMap::with_capacity(BUILTIN_1_1.len());
        let mut iri_to_term = HashMap::with_capacity(BUILTIN_1_1.len());
        for (term, iri) in BUILTIN_1_1 {
            term_to_iri.insert((*term).to_string(), (*iri).to_string());
            iri_to_term.insert((*iri).to_string(), (*term).to_string());
        }
        Ok(TermContext {
            version_iri: CONTEXT_IRI.to_string(),
            term_to_iri,
            iri_to_term,
            extensions: IndexMap::new(),
        })
    }

    /// The context identifier emitted verbatim as `@context`.
    pub fn version_iri(&self) -> &str {
        &self.version_iri
    }

    /// Replaces the emitted context identifier, keeping the term table.
    /// Used when a parsed document spelled its context differently.
    pub fn with_version_iri(mut self, iri: impl Into<String>) -> Self {
        self.version_iri = iri.into();
        self
    }

    /// IRI for a term, or `None` when the term is unknown. Unknown terms are
    /// never an error; callers preserve them untouched.
    pub fn expand_term(&self, term: &str) -> Option<&str> {
        self.term_to_iri.get(term).map(String::as_str)
    }

    /// Short term for an IRI, when one is mapped.
    pub fn compact_iri(&self, iri: &str) -> Option<&str> {
        self.iri_to_term.get(iri).map(String::as_str)
    }

    /// Extension pairs added on top of the bundled table, in insertion order.
    /// These are emitted inline next to the context IRI.
    pub fn extensions(&self) -> impl Iterator<Item = (&str, &str)> {
        self.extensions
            .iter()
            .map(|(t, i)| (t.as_str(), i.as_str()))
    }

    /// A new context including `pairs`. Re-asserting an existing mapping is
    /// a no-op; redefining a term to a different IRI is a conflict.
    pub fn extend<I, T, U>(&self, pairs: I) -> Result<Self, ContextError>
    where
        I: IntoIterator<Item = (T, U)>,
        T: Into<String>,
        U: Into<String>,
    {
        let mut next = self.clone();
        for (term, iri) in pairs {
            let (term, iri) = (term.into(), iri.into());
            match next.term_to_iri.get(&term) {
                Some(existing) if *existing == iri => continue,
                Some(_) => return Err(ContextError::TermConflict { term }),
                None => {}
            }
            next.iri_to_term
                .entry(iri.clone())
                .or_insert_with(|| term.clone());
            next.term_to_iri.insert(term.clone(), iri.clone());
            next.extensions.insert(term, iri);
        }
        Ok(next)
    }
}
