//! Executable first-order model of a crate: ground facts, a fixed set of
//! forward-chained production rules, and a JSON-LD emitter over the
//! saturated store.
//!
//! This is a deliberately independent pipeline — facts and rules instead of
//! entities and serializer — used to cross-check the serializer and the
//! mentions closure. Divergences on unreachable entities are reported, not
//! repaired: the single-direction mentions rule cannot see them, and the
//! point of this module is to mirror that behaviour exactly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexSet;
use thiserror::Error;

use crate::context::TermContext;
use crate::entity::{Entity, Number, PropertyValue, Scalar};
use crate::graph::CrateGraph;
use crate::id::EntityId;
use crate::jsonld;
use crate::{METADATA_FILE_NAME, SPEC_CONFORMANCE_IRI};

/// IRI that `conformsTo` expands to.
pub const CONFORMS_TO_IRI: &str = "http://purl.org/dc/terms/conformsTo";
/// IRI that `about` expands to.
pub const ABOUT_IRI: &str = "http://schema.org/about";
/// IRI that `license` expands to.
pub const LICENSE_IRI: &str = "http://schema.org/license";
const DATASET_IRI: &str = "http://schema.org/Dataset";
const MEDIA_OBJECT_IRI: &str = "http://schema.org/MediaObject";
const CREATIVE_WORK_IRI: &str = "http://schema.org/CreativeWork";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("term {term:?} has no IRI in the context")]
    UnmappedTerm { term: String },
}

/// One ground term: an IRI, a literal string, or a literal number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(EntityId),
    Str(String),
    Num(Number),
}

impl Term {
    pub fn iri(s: &str) -> Term {
        Term::Iri(EntityId::new(s).expect("valid IRI term"))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(id) => write!(f, "<{id}>"),
            Term::Str(s) => write!(f, "{}", serde_json::to_string(s).expect("string")),
            Term::Num(n) => write!(f, "{n}"),
        }
    }
}

/// One ground predicate instance of the crate language.
///
/// `Type` and `ConformsTo` stay named facts instead of expanding into
/// `Relation`: expanding them would drag class IRIs and the conformance IRI
/// into the mentions fixpoint, which the worked example explicitly keeps at
/// the entity set only.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Fact {
    RoCrate(Term),
    Root(Term),
    Dataset(Term),
    File(Term),
    CreativeWork(Term),
    ContextualEntity(Term),
    DataEntity(Term),
    Entity(Term),
    Class(Term),
    Property(Term),
    MetadataFileDescriptor(Term),
    Mentions(Term, Term),
    Type(Term, Term),
    ConformsTo(Term, Term),
    Relation(Term, Term, Term),
    Attribute(Term, Term, Term),
    String(Term),
    Decimal(Term),
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::RoCrate(a) => write!(f, "ROCrate({a})"),
            Fact::Root(a) => write!(f, "Root({a})"),
            Fact::Dataset(a) => write!(f, "Dataset({a})"),
            Fact::File(a) => write!(f, "File({a})"),
            Fact::CreativeWork(a) => write!(f, "CreativeWork({a})"),
            Fact::ContextualEntity(a) => write!(f, "ContextualEntity({a})"),
            Fact::DataEntity(a) => write!(f, "DataEntity({a})"),
            Fact::Entity(a) => write!(f, "Entity({a})"),
            Fact::Class(a) => write!(f, "Class({a})"),
            Fact::Property(a) => write!(f, "Property({a})"),
            Fact::MetadataFileDescriptor(a) => write!(f, "MetadataFileDescriptor({a})"),
            Fact::Mentions(a, b) => write!(f, "Mentions({a}, {b})"),
            Fact::Type(a, b) => write!(f, "type({a}, {b})"),
            Fact::ConformsTo(a, b) => write!(f, "conformsTo({a}, {b})"),
            Fact::Relation(a, b, c) => write!(f, "Relation({a}, {b}, {c})"),
            Fact::Attribute(a, b, c) => write!(f, "Attribute({a}, {b}, {c})"),
            Fact::String(a) => write!(f, "String({a})"),
            Fact::Decimal(a) => write!(f, "Decimal({a})"),
        }
    }
}

/// A set of ground facts. Inserting an existing fact is a no-op; iteration
/// order is insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FactStore {
    facts: IndexSet<Fact>,
}

impl FactStore {
    pub fn new() -> Self {
        FactStore::default()
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn is_subset(&self, other: &FactStore) -> bool {
        self.facts.iter().all(|f| other.facts.contains(f))
    }

    /// Everything mentioned by any crate in the store.
    pub fn mentions_set(&self) -> BTreeSet<EntityId> {
        self.facts
            .iter()
            .filter_map(|f| match f {
                Fact::Mentions(_, Term::Iri(o)) => Some(o.clone()),
                _ => None,
            })
            .collect()
    }

    /// Debug dump: one fact per line, sorted, for golden-file comparisons.
    pub fn dump_sorted(&self) -> String {
        let mut lines: Vec<String> = self.facts.iter().map(Fact::to_string).collect();
        lines.sort_unstable();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

impl FromIterator<Fact> for FactStore {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        FactStore {
            facts: iter.into_iter().collect(),
        }
    }
}

/// Grounds a crate graph into facts: `ROCrate` for the root, class facts per
/// entity class, `Relation` facts for references and `Attribute` facts for
/// literals with property terms expanded through the context.
///
/// Unknown terms fall back to their spelling as pseudo-IRIs; use
/// [`crate_to_facts_strict`] to refuse them instead. The caller is expected
/// to hand in a graph that passes minimal validation.
pub fn crate_to_facts(graph: &CrateGraph, ctx: &TermContext) -> FactStore {
    translate(graph, ctx, false).expect("lenient translation is total")
}

/// As [`crate_to_facts`], erroring on terms the context cannot expand.
pub fn crate_to_facts_strict(
    graph: &CrateGraph,
    ctx: &TermContext,
) -> Result<FactStore, OracleError> {
    translate(graph, ctx, true)
}

fn translate(
    graph: &CrateGraph,
    ctx: &TermContext,
    strict: bool,
) -> Result<FactStore, OracleError> {
    let mut store = FactStore::new();
    let root = Term::Iri(graph.root_id().clone());
    store.insert(Fact::RoCrate(root.clone()));
    store.insert(Fact::MetadataFileDescriptor(Term::Iri(
        graph.descriptor_id().clone(),
    )));

    let expand = |term: &str| -> Result<Term, OracleError> {
        match ctx.expand_term(term) {
            Some(iri) => Ok(Term::iri(iri)),
            None if strict => Err(OracleError::UnmappedTerm {
                term: term.to_string(),
            }),
            None => Ok(Term::Iri(EntityId::new(term).unwrap_or_else(|| {
                EntityId::new(format!("#invalid-term-{}", term.len())).expect("fallback id")
            }))),
        }
    };

    for entity in graph.entities() {
        let subject = Term::Iri(entity.id.clone());
        for class in &entity.classes {
            match class.as_str() {
                "Dataset" => {
                    store.insert(Fact::Dataset(subject.clone()));
                }
                "File" => {
                    store.insert(Fact::File(subject.clone()));
                }
                "CreativeWork" => {
                    store.insert(Fact::CreativeWork(subject.clone()));
                }
                other => {
                    store.insert(Fact::Type(subject.clone(), expand(other)?));
                }
            }
        }
        for (term, value) in &entity.properties {
            if term == "conformsTo" {
                for scalar in value.scalars() {
                    match scalar {
                        Scalar::Reference(target) => {
                            store.insert(Fact::ConformsTo(
                                subject.clone(),
                                Term::Iri(target.clone()),
                            ));
                        }
                        Scalar::Text(s) => {
                            store.insert(Fact::Attribute(
                                subject.clone(),
                                Term::iri(CONFORMS_TO_IRI),
                                Term::Str(s.clone()),
                            ));
                        }
                        Scalar::Number(n) => {
                            store.insert(Fact::Attribute(
                                subject.clone(),
                                Term::iri(CONFORMS_TO_IRI),
                                Term::Num(*n),
                            ));
                        }
                    }
                }
                continue;
            }
            let property = expand(term)?;
            for scalar in value.scalars() {
                let fact = match scalar {
                    Scalar::Reference(target) => {
                        Fact::Relation(subject.clone(), property.clone(), Term::Iri(target.clone()))
                    }
                    Scalar::Text(s) => {
                        Fact::Attribute(subject.clone(), property.clone(), Term::Str(s.clone()))
                    }
                    Scalar::Number(n) => {
                        Fact::Attribute(subject.clone(), property.clone(), Term::Num(*n))
                    }
                };
                store.insert(fact);
            }
        }
    }
    Ok(store)
}

/// Least fixpoint of the production rules:
///
/// * `Mentions(r, s) ∧ Relation(s, p, o) ⇒ Mentions(r, o)`
/// * `ROCrate(r) ⇒ Root(r) ∧ Mentions(r, r)`; `Root(r) ⇒ Dataset(r)`
/// * class expansion to schema.org types (`File` becoming `MediaObject`),
///   `license` targets becoming `CreativeWork`, datatype facts for literals
/// * the descriptor axiom: the crate constant `<./>` carries a
///   `<ro-crate-metadata.json>` descriptor conforming to the 1.1 IRI, and
///   every descriptor is mentioned by its crate
///
/// Rules only ever add facts over the finite term universe, so the fixpoint
/// exists; saturation is idempotent and monotone.
pub fn saturate(store: &FactStore) -> FactStore {
    let mut out = store.clone();

    // Descriptor axiom over the crate constants.
    let crate_constant = Term::iri("./");
    let descriptor_constant = Term::iri(METADATA_FILE_NAME);
    out.insert(Fact::RoCrate(crate_constant.clone()));
    out.insert(Fact::MetadataFileDescriptor(descriptor_constant.clone()));
    out.insert(Fact::Relation(
        descriptor_constant.clone(),
        Term::iri(ABOUT_IRI),
        crate_constant.clone(),
    ));
    out.insert(Fact::ConformsTo(
        descriptor_constant,
        Term::iri(SPEC_CONFORMANCE_IRI),
    ));

    loop {
        let mut derived: Vec<Fact> = Vec::new();
        let license_iri = Term::iri(LICENSE_IRI);

        let roots: Vec<Term> = out
            .iter()
            .filter_map(|f| match f {
                Fact::RoCrate(r) => Some(r.clone()),
                _ => None,
            })
            .collect();
        let mentioned: IndexSet<(Term, Term)> = out
            .iter()
            .filter_map(|f| match f {
                Fact::Mentions(r, s) => Some((r.clone(), s.clone())),
                _ => None,
            })
            .collect();

        for fact in out.iter() {
            match fact {
                Fact::RoCrate(r) => {
                    derived.push(Fact::Root(r.clone()));
                    derived.push(Fact::Mentions(r.clone(), r.clone()));
                    for d in out.iter() {
                        if let Fact::MetadataFileDescriptor(m) = d {
                            derived.push(Fact::Mentions(r.clone(), m.clone()));
                        }
                    }
                }
                Fact::Root(r) => derived.push(Fact::Dataset(r.clone())),
                Fact::Dataset(e) => {
                    derived.push(Fact::Type(e.clone(), Term::iri(DATASET_IRI)));
                    derived.push(Fact::DataEntity(e.clone()));
                }
                Fact::File(e) => {
                    derived.push(Fact::Type(e.clone(), Term::iri(MEDIA_OBJECT_IRI)));
                    derived.push(Fact::DataEntity(e.clone()));
                }
                Fact::CreativeWork(e) => {
                    derived.push(Fact::Type(e.clone(), Term::iri(CREATIVE_WORK_IRI)));
                    derived.push(Fact::ContextualEntity(e.clone()));
                }
                Fact::MetadataFileDescriptor(m) => {
                    derived.push(Fact::CreativeWork(m.clone()));
                }
                Fact::DataEntity(e) | Fact::ContextualEntity(e) => {
                    derived.push(Fact::Entity(e.clone()));
                }
                Fact::Type(_, t) => derived.push(Fact::Class(t.clone())),
                Fact::Relation(s, p, o) => {
                    if *p == license_iri {
                        derived.push(Fact::CreativeWork(o.clone()));
                    }
                    for root in &roots {
                        if mentioned.contains(&(root.clone(), s.clone())) {
                            derived.push(Fact::Mentions(root.clone(), o.clone()));
                        }
                    }
                }
                Fact::Attribute(_, _, v) => match v {
                    Term::Str(_) => derived.push(Fact::String(v.clone())),
                    Term::Num(_) => derived.push(Fact::Decimal(v.clone())),
                    Term::Iri(_) => {}
                },
                _ => {}
            }
        }

        let before = out.len();
        for fact in derived {
            out.insert(fact);
        }
        if out.len() == before {
            return out;
        }
    }
}

/// Emits the saturated store as JSON-LD: one graph element per mentioned
/// entity, keys unshortened (no `@context`), in the same canonical order and
/// layout as the serializer.
pub fn facts_to_jsonld(store: &FactStore) -> String {
    let mentioned = store.mentions_set();
    let descriptors: BTreeSet<EntityId> = store
        .iter()
        .filter_map(|f| match f {
            Fact::MetadataFileDescriptor(Term::Iri(m)) => Some(m.clone()),
            _ => None,
        })
        .collect();
    let roots: BTreeSet<EntityId> = store
        .iter()
        .filter_map(|f| match f {
            Fact::RoCrate(Term::Iri(r)) => Some(r.clone()),
            _ => None,
        })
        .collect();

    let mut ordered: Vec<&EntityId> = Vec::new();
    ordered.extend(mentioned.iter().filter(|e| descriptors.contains(e)));
    ordered.extend(
        mentioned
            .iter()
            .filter(|e| roots.contains(e) && !descriptors.contains(e)),
    );
    ordered.extend(
        mentioned
            .iter()
            .filter(|e| !roots.contains(e) && !descriptors.contains(e)),
    );

    let mut out = String::from("{\n  \"@graph\": [\n");
    for (i, id) in ordered.iter().enumerate() {
        if i > 0 {
            out.push_str(",\n");
        }
        let entity = materialize(store, id);
        jsonld::write_entity(&mut out, &entity, 2);
    }
    out.push_str("\n  ]\n}\n");
    out
}

/// Rebuilds one entity from the facts about `id`, with IRI keys and
/// deterministic value order.
fn materialize(store: &FactStore, id: &EntityId) -> Entity {
    let view = subject_view(store, id);
    let mut entity = Entity {
        id: id.clone(),
        classes: view.types.into_iter().collect(),
        properties: indexmap::IndexMap::new(),
    };
    for (prop, values) in view.props {
        let scalars: Vec<Scalar> = values.into_values().collect();
        entity.properties.insert(prop, PropertyValue::list(scalars));
    }
    entity
}

/// Per-subject digest of a store: type IRIs and, per property IRI, values
/// keyed by a canonical token (which both orders them and counts as the
/// comparison form).
struct SubjectView {
    types: BTreeSet<String>,
    props: BTreeMap<String, BTreeMap<String, Scalar>>,
}

fn scalar_token(scalar: &Scalar) -> String {
    match scalar {
        Scalar::Reference(id) => format!("<{}>", id.normalized()),
        Scalar::Text(s) => serde_json::to_string(s).expect("string"),
        Scalar::Number(n) => n.lexical(),
    }
}

fn term_scalar(term: &Term) -> Scalar {
    match term {
        Term::Iri(id) => Scalar::Reference(id.clone()),
        Term::Str(s) => Scalar::Text(s.clone()),
        Term::Num(n) => Scalar::Number(*n),
    }
}

fn subject_view(store: &FactStore, id: &EntityId) -> SubjectView {
    let mut view = SubjectView {
        types: BTreeSet::new(),
        props: BTreeMap::new(),
    };
    let mut add = |prop: &EntityId, value: Scalar| {
        view.props
            .entry(prop.as_str().to_string())
            .or_default()
            .insert(scalar_token(&value), value);
    };
    for fact in store.iter() {
        match fact {
            Fact::Type(Term::Iri(s), Term::Iri(t)) if s == id => {
                view.types.insert(t.as_str().to_string());
            }
            Fact::Relation(Term::Iri(s), Term::Iri(p), o) if s == id => {
                add(p, term_scalar(o));
            }
            Fact::Attribute(Term::Iri(s), Term::Iri(p), v) if s == id => {
                add(p, term_scalar(v));
            }
            Fact::ConformsTo(Term::Iri(s), o) if s == id => {
                let prop = EntityId::new(CONFORMS_TO_IRI).expect("conformsTo IRI");
                add(&prop, term_scalar(o));
            }
            _ => {}
        }
    }
    view
}

/// Difference between the two pipelines on one graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EquivalenceDiff {
    /// Entities the serializer keeps but the mentions rule never reaches.
    pub orphans: Vec<EntityId>,
    /// Ids the rules mention that are no entity of the graph (dangling
    /// absolute references pulled in by the one-way rule).
    pub phantoms: Vec<EntityId>,
    /// Entities present in both pipelines whose types or property multisets
    /// differ, with a short description each.
    pub mismatches: Vec<(EntityId, String)>,
}

impl EquivalenceDiff {
    pub fn is_empty(&self) -> bool {
        self.orphans.is_empty() && self.phantoms.is_empty() && self.mismatches.is_empty()
    }
}

impl fmt::Display for EquivalenceDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for id in &self.orphans {
            writeln!(f, "orphan (serializer only): {id}")?;
        }
        for id in &self.phantoms {
            writeln!(f, "mentioned but not an entity: {id}")?;
        }
        for (id, detail) in &self.mismatches {
            writeln!(f, "mismatch on {id}: {detail}")?;
        }
        Ok(())
    }
}

/// Outcome of comparing the serializer against the rule pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Divergent(EquivalenceDiff),
}

impl Equivalence {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent)
    }
}

/// Cross-checks the serializer against the rule pipeline using the bundled
/// context.
pub fn check_equivalence(graph: &CrateGraph) -> Equivalence {
    let ctx = TermContext::builtin("1.1").expect("bundled context");
    check_equivalence_with(graph, &ctx)
}

/// Compares `facts_to_jsonld(saturate(crate_to_facts(g)))` against the
/// serializer's view of `g` with terms expanded through `ctx`: the entity
/// sets must coincide and every shared entity must carry the same types and
/// property multisets. Entities outside the mentions closure surface as
/// orphans in the diff.
pub fn check_equivalence_with(graph: &CrateGraph, ctx: &TermContext) -> Equivalence {
    let saturated = saturate(&crate_to_facts(graph, ctx));
    let mentioned = saturated.mentions_set();

    let mut diff = EquivalenceDiff::default();
    for id in graph.ids() {
        if !mentioned.contains(id) {
            diff.orphans.push(id.clone());
        }
    }
    for id in &mentioned {
        if graph.get(id).is_none() {
            diff.phantoms.push(id.clone());
        }
    }

    for entity in graph.entities() {
        if !mentioned.contains(&entity.id) {
            continue;
        }
        let oracle = subject_view(&saturated, &entity.id);
        let expanded = expand_entity(entity, ctx);

        if oracle.types != expanded.types {
            diff.mismatches.push((
                entity.id.clone(),
                format!(
                    "types differ: rules {:?} vs serializer {:?}",
                    oracle.types, expanded.types
                ),
            ));
        }
        let oracle_props = tokens_of(&oracle);
        let expanded_props = tokens_of(&expanded);
        if oracle_props != expanded_props {
            let detail = describe_prop_diff(&oracle_props, &expanded_props);
            diff.mismatches.push((entity.id.clone(), detail));
        }
    }

    if diff.is_empty() {
        Equivalence::Equivalent
    } else {
        Equivalence::Divergent(diff)
    }
}

type PropTokens = BTreeMap<String, BTreeMap<String, usize>>;

fn tokens_of(view: &SubjectView) -> PropTokens {
    let mut out = PropTokens::new();
    for (prop, values) in &view.props {
        let counts = out.entry(prop.clone()).or_default();
        for token in values.keys() {
            *counts.entry(token.clone()).or_default() += 1;
        }
    }
    out
}

fn describe_prop_diff(oracle: &PropTokens, serializer: &PropTokens) -> String {
    let mut parts = Vec::new();
    for (prop, values) in oracle {
        match serializer.get(prop) {
            None => parts.push(format!("rules-only property {prop}")),
            Some(other) if other != values => parts.push(format!("values differ under {prop}")),
            Some(_) => {}
        }
    }
    for prop in serializer.keys() {
        if !oracle.contains_key(prop) {
            parts.push(format!("serializer-only property {prop}"));
        }
    }
    parts.join("; ")
}

/// The serializer-side view of one entity: classes and property terms
/// expanded through the context, `conformsTo` routed to its Dublin Core IRI.
fn expand_entity(entity: &Entity, ctx: &TermContext) -> SubjectView {
    let mut view = SubjectView {
        types: BTreeSet::new(),
        props: BTreeMap::new(),
    };
    for class in &entity.classes {
        view.types
            .insert(ctx.expand_term(class).unwrap_or(class).to_string());
    }
    for (term, value) in &entity.properties {
        let prop = if term == "conformsTo" {
            CONFORMS_TO_IRI.to_string()
        } else {
            ctx.expand_term(term).unwrap_or(term).to_string()
        };
        let slot = view.props.entry(prop).or_default();
        for scalar in value.scalars() {
            slot.insert(scalar_token(scalar), scalar.clone());
        }
    }
    view
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::Entity;

    fn id(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    fn ctx() -> TermContext {
        TermContext::builtin("1.1").unwrap()
    }

    fn minimal() -> CrateGraph {
        CrateGraph::new("x", "y", "2017", id("https://spdx.org/licenses/CC-BY-4.0")).unwrap()
    }

    /// The worked example: root with two parts and two license entities.
    fn appendix_example() -> CrateGraph {
        let g = CrateGraph::new(
            "Data files associated with the manuscript:Effects of ...",
            "Palliative care planning for nursing home residents ...",
            "2017",
            id("https://spdx.org/licenses/CC-BY-4.0"),
        )
        .unwrap();
        let g = g
            .replace_entity(
                g.get(&id("https://spdx.org/licenses/CC-BY-4.0"))
                    .unwrap()
                    .clone()
                    .with(
                        "name",
                        PropertyValue::text("Creative Commons Attribution 4.0"),
                    ),
            )
            .unwrap();
        let g = g
            .add_data_entity(
                Entity::new(id("survey.csv"), ["File"])
                    .with("name", PropertyValue::text("Survey of care providers")),
            )
            .unwrap();
        let g = g
            .add_data_entity(
                Entity::new(id("interviews/"), ["Dataset"])
                    .with(
                        "name",
                        PropertyValue::text("Audio recordings of care provider interviews"),
                    )
                    .with(
                        "license",
                        PropertyValue::reference(id("https://spdx.org/licenses/CC-BY-NC-4.0")),
                    ),
            )
            .unwrap();
        g.add_entity(
            Entity::new(
                id("https://spdx.org/licenses/CC-BY-NC-4.0"),
                ["CreativeWork"],
            )
            .with(
                "name",
                PropertyValue::text("Creative Commons Attribution Non Commercial 4.0"),
            ),
        )
        .unwrap()
    }

    #[test]
    fn crate_to_facts_emits_haspart_relations() {
        let store = crate_to_facts(&appendix_example(), &ctx());
        assert!(store.contains(&Fact::Relation(
            Term::iri("./"),
            Term::iri("http://schema.org/hasPart"),
            Term::iri("survey.csv"),
        )));
        assert!(store.contains(&Fact::RoCrate(Term::iri("./"))));
    }

    #[test]
    fn absolute_base_ids_ground_verbatim() {
        // The worked example keys everything under http://example.com/ro/123/;
        // the same facts must come out when the graph uses absolute ids.
        let base = "http://example.com/ro/123/";
        let root_id = id(base);
        let descriptor_id = id(METADATA_FILE_NAME);
        let survey = id(&format!("{base}survey.csv"));
        let descriptor = Entity::new(descriptor_id.clone(), ["CreativeWork"])
            .with("about", PropertyValue::reference(root_id.clone()))
            .with(
                "conformsTo",
                PropertyValue::reference(id(SPEC_CONFORMANCE_IRI)),
            );
        let root = Entity::new(root_id.clone(), ["Dataset"])
            .with("hasPart", PropertyValue::reference(survey.clone()));
        let file = Entity::new(survey.clone(), ["File"]);
        let mut entities = indexmap::IndexMap::new();
        entities.insert(descriptor_id.clone(), descriptor);
        entities.insert(root_id.clone(), root);
        entities.insert(survey, file);
        let g = CrateGraph::from_parts(
            entities,
            root_id,
            descriptor_id,
            SPEC_CONFORMANCE_IRI.to_string(),
        );
        let store = crate_to_facts(&g, &ctx());
        assert!(store.contains(&Fact::Relation(
            Term::iri("http://example.com/ro/123/"),
            Term::iri("http://schema.org/hasPart"),
            Term::iri("http://example.com/ro/123/survey.csv"),
        )));
    }

    #[test]
    fn file_class_maps_to_media_object() {
        let g = minimal()
            .add_data_entity(Entity::new(id("f.csv"), ["File"]))
            .unwrap();
        let saturated = saturate(&crate_to_facts(&g, &ctx()));
        assert!(saturated.contains(&Fact::Type(
            Term::iri("f.csv"),
            Term::iri("http://schema.org/MediaObject"),
        )));
    }

    #[test]
    fn saturation_reaches_all_appendix_entities() {
        let saturated = saturate(&crate_to_facts(&appendix_example(), &ctx()));
        let mentioned = saturated.mentions_set();
        let expected: Vec<EntityId> = [
            "./",
            "survey.csv",
            "interviews/",
            "https://spdx.org/licenses/CC-BY-4.0",
            "https://spdx.org/licenses/CC-BY-NC-4.0",
            METADATA_FILE_NAME,
        ]
        .iter()
        .map(|s| id(s))
        .collect();
        assert_eq!(mentioned.len(), 6);
        for e in expected {
            assert!(mentioned.contains(&e), "missing {e}");
        }
    }

    #[test]
    fn empty_store_saturates_to_the_descriptor_axiom() {
        let saturated = saturate(&FactStore::new());
        assert!(saturated.contains(&Fact::RoCrate(Term::iri("./"))));
        assert!(saturated.contains(&Fact::Root(Term::iri("./"))));
        assert!(saturated.contains(&Fact::Dataset(Term::iri("./"))));
        assert!(saturated.contains(&Fact::MetadataFileDescriptor(Term::iri(METADATA_FILE_NAME))));
        assert!(saturated.contains(&Fact::ConformsTo(
            Term::iri(METADATA_FILE_NAME),
            Term::iri(SPEC_CONFORMANCE_IRI),
        )));
        assert_eq!(
            saturated.mentions_set(),
            [id("./"), id(METADATA_FILE_NAME)].into_iter().collect()
        );
    }

    #[test]
    fn mentions_chains_through_relations() {
        let mut store = FactStore::new();
        store.insert(Fact::Mentions(Term::iri("./"), Term::iri("#a")));
        store.insert(Fact::Relation(
            Term::iri("#a"),
            Term::iri("http://schema.org/about"),
            Term::iri("#b"),
        ));
        store.insert(Fact::Relation(
            Term::iri("#b"),
            Term::iri("http://schema.org/about"),
            Term::iri("#c"),
        ));
        let saturated = saturate(&store);
        assert!(saturated.contains(&Fact::Mentions(Term::iri("./"), Term::iri("#c"))));
    }

    #[test]
    fn saturate_is_idempotent_and_monotone() {
        let store = crate_to_facts(&appendix_example(), &ctx());
        let once = saturate(&store);
        let twice = saturate(&once);
        assert_eq!(once, twice);

        let smaller: FactStore = store.iter().take(store.len() / 2).cloned().collect();
        assert!(smaller.is_subset(&store));
        assert!(saturate(&smaller).is_subset(&once));
        assert!(store.is_subset(&once));
    }

    #[test]
    fn oracle_closure_matches_graph_closure() {
        let g = appendix_example();
        let saturated = saturate(&crate_to_facts(&g, &ctx()));
        assert_eq!(saturated.mentions_set(), g.mentions_closure());
    }

    #[test]
    fn jsonld_output_has_six_elements_for_the_example() {
        let saturated = saturate(&crate_to_facts(&appendix_example(), &ctx()));
        let doc = facts_to_jsonld(&saturated);
        let value: serde_json::Value = serde_json::from_str(&doc).unwrap();
        let graph = value["@graph"].as_array().unwrap();
        assert_eq!(graph.len(), 6);
        // No @context: IRIs are produced unshortened.
        assert!(value.get("@context").is_none());
        assert_eq!(graph[0]["@id"], METADATA_FILE_NAME);
        assert_eq!(graph[1]["@id"], "./");
        assert!(graph[1]["http://schema.org/name"].is_string());
    }

    #[test]
    fn bare_store_renders_descriptor_and_root() {
        let doc = facts_to_jsonld(&saturate(&FactStore::new()));
        let value: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(value["@graph"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn decimal_attributes_render_as_bare_numbers() {
        let mut store = FactStore::new();
        store.insert(Fact::Attribute(
            Term::iri("./"),
            Term::iri("http://schema.org/version"),
            Term::Num(Number::Decimal(13.37)),
        ));
        let saturated = saturate(&store);
        assert!(saturated.contains(&Fact::Decimal(Term::Num(Number::Decimal(13.37)))));
        let doc = facts_to_jsonld(&saturated);
        assert!(doc.contains("\"http://schema.org/version\": 13.37"));
    }

    #[test]
    fn equivalence_on_reachable_graphs() {
        assert!(check_equivalence(&minimal()).is_equivalent());
        assert!(check_equivalence(&appendix_example()).is_equivalent());
    }

    #[test]
    fn orphans_diverge_and_are_named() {
        let g = appendix_example()
            .add_entity(Entity::new(id("#orphan"), ["Person"]))
            .unwrap();
        match check_equivalence(&g) {
            Equivalence::Divergent(diff) => {
                assert_eq!(diff.orphans, vec![id("#orphan")]);
                assert!(diff.phantoms.is_empty());
                assert!(diff.mismatches.is_empty());
            }
            Equivalence::Equivalent => panic!("orphan must diverge"),
        }
    }

    #[test]
    fn strict_mapping_rejects_unknown_terms() {
        let g = minimal();
        let mut root = g.root().clone();
        root.set("frobnicate", PropertyValue::text("x"));
        let g = g.replace_entity(root).unwrap();
        assert_eq!(
            crate_to_facts_strict(&g, &ctx()).unwrap_err(),
            OracleError::UnmappedTerm {
                term: "frobnicate".into()
            }
        );
        // The lenient path keeps the spelling.
        let store = crate_to_facts(&g, &ctx());
        assert!(store.contains(&Fact::Attribute(
            Term::iri("./"),
            Term::iri("frobnicate"),
            Term::Str("x".into()),
        )));
    }

    #[test]
    fn dump_is_sorted_and_stable() {
        let store = crate_to_facts(&minimal(), &ctx());
        let dump = store.dump_sorted();
        let mut lines: Vec<&str> = dump.lines().collect();
        let sorted = {
            let mut c = lines.clone();
            c.sort_unstable();
            c
        };
        assert_eq!(lines, sorted);
        assert!(dump.ends_with('\n'));
        assert!(dump.contains("ROCrate(<./>)"));
        lines.retain(|l| l.starts_with("Attribute"));
        assert!(!lines.is_empty());
    }
}
