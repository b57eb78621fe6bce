//! Reading and writing the RO-Crate Metadata File: flattened, compacted
//! JSON-LD with a single top-level `@graph` array.
//!
//! The writer emits a canonical byte form — descriptor first, root second,
//! remaining entities ordered by normalized id, keys ordered `@id`, `@type`,
//! then terms lexicographically, two-space indentation, trailing newline —
//! so equal graphs always produce byte-equal documents.

use indexmap::IndexMap;
use serde_json::Value;
use thiserror::Error;

use crate::context::TermContext;
use crate::entity::{Entity, Number, PropertyValue, Scalar};
use crate::graph::CrateGraph;
use crate::id::EntityId;
use crate::{CONTEXT_IRI, LEGACY_METADATA_FILE_NAME, METADATA_FILE_NAME};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("document is not JSON: {0}")]
    NotJson(String),
    #[error("no @graph array at the top level")]
    MissingGraph,
    #[error("no metadata file descriptor (entity with about and conformsTo)")]
    MissingDescriptor,
    #[error("descriptor's about target is not in the graph")]
    MissingRoot,
    #[error("duplicate id {id} redefines property {term}")]
    ConflictingDuplicateId { id: EntityId, term: String },
    #[error("embedded entity under {term} of {entity:?}; flatten the document first")]
    NestedEntity {
        entity: Option<EntityId>,
        term: String,
    },
    #[error("merge conflict on {id}: property {term} differs")]
    MergeConflict { id: EntityId, term: String },
    #[error("graph element {position} has no @id (blank nodes are rejected here)")]
    BlankNode { position: usize },
    #[error("invalid entity id {raw:?}")]
    InvalidId { raw: String },
    #[error("unsupported value under {term}: {detail}")]
    UnsupportedValue { term: String, detail: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SerializeError {
    #[error("dangling relative reference {target} under {term} of {entity}")]
    DanglingReference {
        entity: EntityId,
        term: String,
        target: EntityId,
    },
}

/// A non-fatal observation made while reading a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub code: &'static str,
    pub message: String,
    pub entity: Option<EntityId>,
}

/// An unknown term kept verbatim: not in the context, neither dropped nor
/// rewritten.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownTerm {
    pub entity: EntityId,
    pub term: String,
    pub is_class: bool,
}

/// Result of reading a metadata document.
#[derive(Debug, Clone)]
pub struct ParseReport {
    pub graph: CrateGraph,
    /// Term context recovered from the document: the bundled table plus any
    /// inline extensions, with the document's context IRI kept verbatim.
    pub context: TermContext,
    pub warnings: Vec<ParseWarning>,
    pub notices: Vec<UnknownTerm>,
}

/// Strictly parses a metadata document into a crate graph.
///
/// Strict means flat: a property value that embeds an entity (any object
/// beyond a bare id wrapper) is an error, as is a graph element without an
/// id. Duplicate ids merge only when their property sets are disjoint.
pub fn parse_metadata(bytes: &[u8]) -> Result<ParseReport, ParseError> {
    let doc: Value =
        serde_json::from_slice(bytes).map_err(|e| ParseError::NotJson(e.to_string()))?;
    let mut warnings = Vec::new();
    let context = read_context(&doc, &mut warnings);
    let graph_items = graph_array(&doc)?;

    let mut entities: IndexMap<EntityId, Entity> = IndexMap::new();
    let mut notices = Vec::new();
    for (position, item) in graph_items.iter().enumerate() {
        let object = item
            .as_object()
            .ok_or_else(|| ParseError::UnsupportedValue {
                term: "@graph".into(),
                detail: format!("element {position} is not an object"),
            })?;
        let entity = object_to_entity(object, position)?;
        record_unknown_terms(&entity, &context, &mut notices);
        merge_entity(
            &mut entities,
            entity,
            MergePolicy::DisjointOnly,
            &mut warnings,
        )?;
    }

    let (descriptor_id, root_id, spec_version) = locate_descriptor(&entities, &mut warnings)?;
    let graph = CrateGraph::from_parts(entities, root_id, descriptor_id, spec_version);
    Ok(ParseReport {
        graph,
        context,
        warnings,
        notices,
    })
}

/// Serializes a graph into the canonical metadata document.
pub fn serialize_metadata(graph: &CrateGraph, ctx: &TermContext) -> Result<String, SerializeError> {
    if let Some((entity, term, target)) = graph.dangling_relative_references().into_iter().next() {
        return Err(SerializeError::DanglingReference {
            entity,
            term,
            target,
        });
    }

    let mut out = String::new();
    out.push_str("{\n  \"@context\": ");
    write_context(&mut out, ctx);
    out.push_str(",\n  \"@graph\": [\n");

    let mut ordered: Vec<&Entity> = Vec::with_capacity(graph.len());
    ordered.push(graph.descriptor());
    if graph.root_id() != graph.descriptor_id() {
        ordered.push(graph.root());
    }
    let mut rest: Vec<&Entity> = graph
        .entities()
        .filter(|e| e.id != *graph.root_id() && e.id != *graph.descriptor_id())
        .collect();
    rest.sort_by(|a, b| a.id.normalized().cmp(b.id.normalized()));
    ordered.extend(rest);

    for (i, entity) in ordered.iter().enumerate() {
        if i > 0 {
            out.push_str(",\n");
        }
        write_entity(&mut out, entity, 2);
    }
    out.push_str("\n  ]\n}\n");
    Ok(out)
}

/// Lenient pass: hoists embedded entities into the top-level graph array,
/// synthesizes `#b0`, `#b1`, … ids for anonymous ones in document order,
/// merges identical-id duplicates, and returns the canonical serialization.
pub fn flatten_lenient(bytes: &[u8]) -> Result<String, ParseError> {
    let doc: Value =
        serde_json::from_slice(bytes).map_err(|e| ParseError::NotJson(e.to_string()))?;
    let mut warnings = Vec::new();
    let context = read_context(&doc, &mut warnings);
    let graph_items = graph_array(&doc)?;

    // Collect used ids so synthesized ones never collide.
    let mut used: Vec<String> = Vec::new();
    collect_ids(graph_items, &mut used);
    let mut namer = BlankNamer { used, next: 0 };

    let mut flat: Vec<serde_json::Map<String, Value>> = Vec::new();
    for item in graph_items {
        let object = item
            .as_object()
            .cloned()
            .ok_or_else(|| ParseError::UnsupportedValue {
                term: "@graph".into(),
                detail: "graph element is not an object".into(),
            })?;
        hoist_entity(object, &mut namer, &mut flat)?;
    }

    let mut entities: IndexMap<EntityId, Entity> = IndexMap::new();
    let mut notices = Vec::new();
    for (position, object) in flat.iter().enumerate() {
        let entity = object_to_entity(object, position)?;
        record_unknown_terms(&entity, &context, &mut notices);
        merge_entity(
            &mut entities,
            entity,
            MergePolicy::UnionOfProperties,
            &mut warnings,
        )?;
    }

    let (descriptor_id, root_id, spec_version) = locate_descriptor(&entities, &mut warnings)?;
    let graph = CrateGraph::from_parts(entities, root_id, descriptor_id, spec_version);
    // Flattening cannot introduce dangling relative references: every hoisted
    // entity joins the graph and pre-existing references are untouched.
    Ok(serialize_metadata(&graph, &context).expect("flattened graph serializes"))
}

// ---------------------------------------------------------------------------
// Reading

fn graph_array(doc: &Value) -> Result<&Vec<Value>, ParseError> {
    doc.as_object()
        .and_then(|o| o.get("@graph"))
        .and_then(Value::as_array)
        .ok_or(ParseError::MissingGraph)
}

/// Recovers the term context: the bundled 1.1 table, extended with any
/// inline pairs, reporting the document's own context IRI verbatim.
fn read_context(doc: &Value, warnings: &mut Vec<ParseWarning>) -> TermContext {
    let builtin = TermContext::builtin("1.1").expect("bundled context");
    let value = doc.as_object().and_then(|o| o.get("@context"));
    let mut iri: Option<String> = None;
    let mut pairs: Vec<(String, String)> = Vec::new();
    match value {
        None => warnings.push(ParseWarning {
            code: "context.missing",
            message: "document has no @context; assuming the bundled 1.1 context".into(),
            entity: None,
        }),
        Some(Value::String(s)) => iri = Some(s.clone()),
        Some(Value::Array(parts)) => {
            for part in parts {
                match part {
                    Value::String(s) if iri.is_none() => iri = Some(s.clone()),
                    Value::Object(map) => {
                        for (term, v) in map {
                            if let Some(target) = v.as_str() {
                                pairs.push((term.clone(), target.to_string()));
                            }
                        }
                    }
                    _ => warnings.push(ParseWarning {
                        code: "context.unrecognized",
                        message: "unrecognized @context element ignored".into(),
                        entity: None,
                    }),
                }
            }
        }
        Some(Value::Object(map)) => {
            warnings.push(ParseWarning {
                code: "context.inline",
                message: "inline @context object; treating entries as term extensions".into(),
                entity: None,
            });
            for (term, v) in map {
                if let Some(target) = v.as_str() {
                    pairs.push((term.clone(), target.to_string()));
                }
            }
        }
        Some(_) => warnings.push(ParseWarning {
            code: "context.unrecognized",
            message: "unrecognized @context value ignored".into(),
            entity: None,
        }),
    }

    let mut ctx = builtin;
    for (term, target) in pairs {
        match ctx.extend([(term.clone(), target)]) {
            Ok(extended) => ctx = extended,
            Err(_) => warnings.push(ParseWarning {
                code: "context.term-conflict",
                message: format!("inline @context redefines {term}; keeping the bundled mapping"),
                entity: None,
            }),
        }
    }
    if let Some(iri) = iri {
        if iri != CONTEXT_IRI {
            warnings.push(ParseWarning {
                code: "context.unknown",
                message: format!(
                    "unrecognized context {iri}; resolving terms with the bundled table"
                ),
                entity: None,
            });
        }
        ctx = ctx.with_version_iri(iri);
    }
    ctx
}

fn object_to_entity(
    object: &serde_json::Map<String, Value>,
    position: usize,
) -> Result<Entity, ParseError> {
    let id = match object.get("@id") {
        None => return Err(ParseError::BlankNode { position }),
        Some(Value::String(raw)) => {
            EntityId::new(raw.clone()).ok_or_else(|| ParseError::InvalidId { raw: raw.clone() })?
        }
        Some(other) => {
            return Err(ParseError::InvalidId {
                raw: other.to_string(),
            })
        }
    };

    let classes = match object.get("@type") {
        None => Vec::new(),
        Some(Value::String(c)) => vec![c.clone()],
        Some(Value::Array(items)) => {
            let mut classes = Vec::with_capacity(items.len());
            for item in items {
                match item.as_str() {
                    Some(c) => classes.push(c.to_string()),
                    None => {
                        return Err(ParseError::UnsupportedValue {
                            term: "@type".into(),
                            detail: "class names must be strings".into(),
                        })
                    }
                }
            }
            classes
        }
        Some(_) => {
            return Err(ParseError::UnsupportedValue {
                term: "@type".into(),
                detail: "class names must be strings".into(),
            })
        }
    };

    let mut entity = Entity {
        id: id.clone(),
        classes,
        properties: IndexMap::new(),
    };
    for (key, value) in object {
        if key == "@id" || key == "@type" {
            continue;
        }
        if key.starts_with('@') {
            return Err(ParseError::UnsupportedValue {
                term: key.clone(),
                detail: "JSON-LD keyword not supported in entities".into(),
            });
        }
        let value = json_to_property(Some(&id), key, value)?;
        entity.properties.insert(key.clone(), value);
    }
    Ok(entity)
}

fn json_to_property(
    entity: Option<&EntityId>,
    term: &str,
    value: &Value,
) -> Result<PropertyValue, ParseError> {
    match value {
        Value::Array(items) => {
            let mut scalars = Vec::with_capacity(items.len());
            for item in items {
                scalars.push(json_to_scalar(entity, term, item)?);
            }
            Ok(PropertyValue::list(scalars))
        }
        _ => Ok(PropertyValue::Scalar(json_to_scalar(entity, term, value)?)),
    }
}

fn json_to_scalar(
    entity: Option<&EntityId>,
    term: &str,
    value: &Value,
) -> Result<Scalar, ParseError> {
    match value {
        Value::String(s) => Ok(Scalar::Text(s.clone())),
        Value::Number(n) => Ok(Scalar::Number(match n.as_i64() {
            Some(i) => Number::Integer(i),
            None => Number::Decimal(n.as_f64().expect("finite JSON number")),
        })),
        Value::Object(map) => {
            if let Some(raw) = reference_target(map) {
                let id = EntityId::new(raw.to_string())
                    .ok_or_else(|| ParseError::InvalidId { raw: raw.into() })?;
                Ok(Scalar::Reference(id))
            } else {
                Err(ParseError::NestedEntity {
                    entity: entity.cloned(),
                    term: term.to_string(),
                })
            }
        }
        Value::Array(_) => Err(ParseError::UnsupportedValue {
            term: term.to_string(),
            detail: "nested lists are not representable".into(),
        }),
        Value::Bool(_) | Value::Null => Err(ParseError::UnsupportedValue {
            term: term.to_string(),
            detail: "only text, numbers and references are representable".into(),
        }),
    }
}

/// The id of a bare reference wrapper (`{"@id": "..."}` and nothing else).
fn reference_target(map: &serde_json::Map<String, Value>) -> Option<&str> {
    if map.len() == 1 {
        map.get("@id").and_then(Value::as_str)
    } else {
        None
    }
}

enum MergePolicy {
    /// Strict parse: duplicate ids may only contribute disjoint properties.
    DisjointOnly,
    /// Lenient flatten: union of properties, equal values collapse.
    UnionOfProperties,
}

fn merge_entity(
    entities: &mut IndexMap<EntityId, Entity>,
    incoming: Entity,
    policy: MergePolicy,
    warnings: &mut Vec<ParseWarning>,
) -> Result<(), ParseError> {
    let Some(existing) = entities.get_mut(&incoming.id) else {
        entities.insert(incoming.id.clone(), incoming);
        return Ok(());
    };
    warnings.push(ParseWarning {
        code: "entity.duplicate-merged",
        message: format!("graph lists {} more than once; merged", incoming.id),
        entity: Some(incoming.id.clone()),
    });
    for class in incoming.classes {
        if !existing.classes.contains(&class) {
            existing.classes.push(class);
        }
    }
    for (term, value) in incoming.properties {
        match existing.properties.get(&term) {
            None => {
                existing.properties.insert(term, value);
            }
            Some(current) if *current == value => {}
            Some(_) => {
                return Err(match policy {
                    MergePolicy::DisjointOnly => ParseError::ConflictingDuplicateId {
                        id: incoming.id,
                        term,
                    },
                    MergePolicy::UnionOfProperties => ParseError::MergeConflict {
                        id: incoming.id,
                        term,
                    },
                });
            }
        }
    }
    Ok(())
}

fn record_unknown_terms(entity: &Entity, ctx: &TermContext, notices: &mut Vec<UnknownTerm>) {
    for class in &entity.classes {
        if ctx.expand_term(class).is_none() {
            notices.push(UnknownTerm {
                entity: entity.id.clone(),
                term: class.clone(),
                is_class: true,
            });
        }
    }
    for term in entity.properties.keys() {
        if ctx.expand_term(term).is_none() {
            notices.push(UnknownTerm {
                entity: entity.id.clone(),
                term: term.clone(),
                is_class: false,
            });
        }
    }
}

/// Finds the metadata file descriptor by shape — an entity carrying both an
/// `about` reference and a `conformsTo` reference — and resolves the root
/// and conformance version from it.
fn locate_descriptor(
    entities: &IndexMap<EntityId, Entity>,
    warnings: &mut Vec<ParseWarning>,
) -> Result<(EntityId, EntityId, String), ParseError> {
    let is_candidate = |e: &Entity| {
        let about_ref = e
            .get("about")
            .map(|v| v.references().next().is_some())
            .unwrap_or(false);
        let conforms_ref = e
            .get("conformsTo")
            .map(|v| v.references().next().is_some())
            .unwrap_or(false);
        about_ref && conforms_ref
    };
    let candidates: Vec<&Entity> = entities.values().filter(|e| is_candidate(e)).collect();
    let canonical = EntityId::new(METADATA_FILE_NAME).expect("canonical name");
    let legacy = EntityId::new(LEGACY_METADATA_FILE_NAME).expect("legacy name");

    let descriptor: &Entity = if let Some(e) = candidates.iter().find(|e| e.id == canonical) {
        e
    } else if let Some(e) = candidates.iter().find(|e| e.id == legacy) {
        warnings.push(ParseWarning {
            code: "descriptor.legacy-name",
            message: format!("legacy metadata descriptor id {LEGACY_METADATA_FILE_NAME}"),
            entity: Some(e.id.clone()),
        });
        e
    } else {
        match candidates.as_slice() {
            [] => return Err(ParseError::MissingDescriptor),
            [only] => {
                warnings.push(ParseWarning {
                    code: "descriptor.unconventional-id",
                    message: format!("metadata descriptor has unconventional id {}", only.id),
                    entity: Some(only.id.clone()),
                });
                only
            }
            [first, ..] => {
                warnings.push(ParseWarning {
                    code: "descriptor.ambiguous",
                    message: format!(
                        "several descriptor-shaped entities; using the first, {}",
                        first.id
                    ),
                    entity: Some(first.id.clone()),
                });
                first
            }
        }
    };

    let root_id = descriptor
        .get("about")
        .and_then(|v| v.references().next())
        .expect("candidate has about reference")
        .clone();
    if !entities.contains_key(&root_id) {
        return Err(ParseError::MissingRoot);
    }
    let spec_version = descriptor
        .get("conformsTo")
        .and_then(|v| v.references().next())
        .expect("candidate has conformsTo reference")
        .as_str()
        .to_string();
    Ok((descriptor.id.clone(), root_id, spec_version))
}

// ---------------------------------------------------------------------------
// Lenient flattening

struct BlankNamer {
    used: Vec<String>,
    next: usize,
}

impl BlankNamer {
    fn fresh(&mut self) -> String {
        loop {
            let candidate = format!("#b{}", self.next);
            self.next += 1;
            if !self.used.contains(&candidate) {
                self.used.push(candidate.clone());
                return candidate;
            }
        }
    }
}

fn collect_ids(items: &[Value], used: &mut Vec<String>) {
    for item in items {
        if let Value::Object(map) = item {
            if let Some(id) = map.get("@id").and_then(Value::as_str) {
                used.push(id.to_string());
            }
            for (key, value) in map {
                if key == "@id" {
                    continue;
                }
                match value {
                    Value::Object(_) => collect_ids(std::slice::from_ref(value), used),
                    Value::Array(inner) => collect_ids(inner, used),
                    _ => {}
                }
            }
        }
    }
}

/// Depth-first hoist: embedded entities become top-level objects, replaced
/// in place by an id wrapper. Document order decides synthesized ids.
fn hoist_entity(
    mut object: serde_json::Map<String, Value>,
    namer: &mut BlankNamer,
    flat: &mut Vec<serde_json::Map<String, Value>>,
) -> Result<String, ParseError> {
    let id = match object.get("@id").and_then(Value::as_str) {
        Some(id) => id.to_string(),
        None => {
            let fresh = namer.fresh();
            object.insert("@id".into(), Value::String(fresh.clone()));
            fresh
        }
    };
    // Reserve this entity's slot before descending so top-level document
    // order is preserved, then fill it once children are hoisted.
    let slot = flat.len();
    flat.push(serde_json::Map::new());

    let keys: Vec<String> = object.keys().cloned().collect();
    for key in keys {
        if key == "@id" || key == "@type" {
            continue;
        }
        let value = object.remove(&key).expect("key present");
        let replaced = hoist_value(value, namer, flat)?;
        object.insert(key, replaced);
    }
    flat[slot] = object;
    Ok(id)
}

fn hoist_value(
    value: Value,
    namer: &mut BlankNamer,
    flat: &mut Vec<serde_json::Map<String, Value>>,
) -> Result<Value, ParseError> {
    match value {
        Value::Object(map) => {
            if reference_target(&map).is_some() {
                return Ok(Value::Object(map));
            }
            let id = hoist_entity(map, namer, flat)?;
            let mut wrapper = serde_json::Map::new();
            wrapper.insert("@id".into(), Value::String(id));
            Ok(Value::Object(wrapper))
        }
        Value::Array(items) => {
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                out.push(hoist_value(item, namer, flat)?);
            }
            Ok(Value::Array(out))
        }
        other => Ok(other),
    }
}

/// Canonical JSON for a single entity, as it would appear in the graph
/// array.
pub fn serialize_entity(entity: &Entity) -> String {
    let mut out = String::new();
    write_entity(&mut out, entity, 0);
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Canonical writing

const INDENT: &str = "  ";

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn write_context(out: &mut String, ctx: &TermContext) {
    let extensions: Vec<(&str, &str)> = ctx.extensions().collect();
    if extensions.is_empty() {
        out.push_str(&json_string(ctx.version_iri()));
        return;
    }
    out.push_str("[\n");
    out.push_str(&INDENT.repeat(2));
    out.push_str(&json_string(ctx.version_iri()));
    out.push_str(",\n");
    out.push_str(&INDENT.repeat(2));
    out.push_str("{\n");
    for (i, (term, iri)) in extensions.iter().enumerate() {
        if i > 0 {
            out.push_str(",\n");
        }
        out.push_str(&INDENT.repeat(3));
        out.push_str(&json_string(term));
        out.push_str(": ");
        out.push_str(&json_string(iri));
    }
    out.push('\n');
    out.push_str(&INDENT.repeat(2));
    out.push_str("}\n");
    out.push_str(INDENT);
    out.push(']');
}

pub(crate) fn write_entity(out: &mut String, entity: &Entity, level: usize) {
    let pad = INDENT.repeat(level);
    let inner = INDENT.repeat(level + 1);
    out.push_str(&pad);
    out.push_str("{\n");
    out.push_str(&inner);
    out.push_str("\"@id\": ");
    out.push_str(&json_string(entity.id.as_str()));

    match entity.classes.as_slice() {
        [] => {}
        [single] => {
            out.push_str(",\n");
            out.push_str(&inner);
            out.push_str("\"@type\": ");
            out.push_str(&json_string(single));
        }
        classes => {
            out.push_str(",\n");
            out.push_str(&inner);
            out.push_str("\"@type\": [");
            for (i, class) in classes.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&json_string(class));
            }
            out.push(']');
        }
    }

    let mut terms: Vec<&String> = entity.properties.keys().collect();
    terms.sort_unstable();
    for term in terms {
        out.push_str(",\n");
        out.push_str(&inner);
        out.push_str(&json_string(term));
        out.push_str(": ");
        write_value(out, &entity.properties[term.as_str()], level + 1);
    }
    out.push('\n');
    out.push_str(&pad);
    out.push('}');
}

fn write_value(out: &mut String, value: &PropertyValue, level: usize) {
    match value {
        PropertyValue::Scalar(s) => write_scalar(out, s, level),
        PropertyValue::List(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                out.push_str(&INDENT.repeat(level + 1));
                write_scalar(out, item, level + 1);
            }
            out.push('\n');
            out.push_str(&INDENT.repeat(level));
            out.push(']');
        }
    }
}

fn write_scalar(out: &mut String, scalar: &Scalar, level: usize) {
    match scalar {
        Scalar::Text(s) => out.push_str(&json_string(s)),
        Scalar::Number(n) => out.push_str(&n.lexical()),
        Scalar::Reference(id) => {
            out.push_str("{\n");
            out.push_str(&INDENT.repeat(level + 1));
            out.push_str("\"@id\": ");
            out.push_str(&json_string(id.as_str()));
            out.push('\n');
            out.push_str(&INDENT.repeat(level));
            out.push('}');
        }
    }
}
