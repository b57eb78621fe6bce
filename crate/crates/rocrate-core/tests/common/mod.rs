//! Shared machinery for the integration suites: a randomized crate-graph
//! generator (plans shrink well because they are plain data), a JSON depth
//! checker and a small strict HTML well-formedness checker.

use proptest::prelude::*;
use serde_json::Value;

use rocrate_core::{CrateGraph, Entity, EntityId, PropertyValue, Scalar};

pub fn id(s: &str) -> EntityId {
    EntityId::new(s).expect("valid id")
}

// ---------------------------------------------------------------------------
// Randomized graphs

const DATES: &[&str] = &["2017", "2020-01-01", "2019-07-23T10:00:00Z", "1999-12"];
const CONTEXTUAL_CLASSES: &[&str] = &[
    "Person",
    "Place",
    "Organization",
    "CreativeWork",
    "ScholarlyArticle",
    "ContactPoint",
    "CustomType",
];
const EXTRA_DATA_CLASSES: &[&str] = &["ImageObject", "ComputationalWorkflow", "SoftwareSourceCode"];
const REF_TERMS: &[&str] = &[
    "author",
    "mentions",
    "publisher",
    "citation",
    "contentLocation",
    "subjectOf",
    "funder",
];
const LITERAL_TERMS: &[&str] = &[
    "keywords",
    "identifier",
    "version",
    "url",
    "contentSize",
    "encodingFormat",
    "customTerm",
];

#[derive(Debug, Clone)]
pub enum ScalarPlan {
    Text(String),
    Int(i64),
    Dec(i32),
    RefTo(usize),
}

#[derive(Debug, Clone)]
pub enum ValuePlan {
    Scalar(ScalarPlan),
    List(Vec<ScalarPlan>),
}

#[derive(Debug, Clone)]
pub struct PropPlan {
    pub term: usize,
    pub value: ValuePlan,
}

#[derive(Debug, Clone)]
pub enum KindPlan {
    /// File or Dataset under the root's hasPart, possibly extra-classed.
    Data {
        dataset: bool,
        extra_class: Option<usize>,
        absolute: bool,
    },
    /// Referenced from an already reachable donor entity.
    Contextual {
        class: usize,
        id_style: u8,
        donor: usize,
        ref_term: usize,
    },
}

#[derive(Debug, Clone)]
pub struct EntityPlan {
    pub kind: KindPlan,
    pub props: Vec<PropPlan>,
}

#[derive(Debug, Clone)]
pub struct GraphPlan {
    pub name: String,
    pub description: String,
    pub date: usize,
    pub entities: Vec<EntityPlan>,
    pub orphans: Vec<(usize, Vec<PropPlan>)>,
}

fn arb_scalar() -> impl Strategy<Value = ScalarPlan> {
    prop_oneof![
        "[a-z]{1,12}".prop_map(ScalarPlan::Text),
        (-9999i64..9999).prop_map(ScalarPlan::Int),
        (-99999i32..99999).prop_map(ScalarPlan::Dec),
        any::<usize>().prop_map(ScalarPlan::RefTo),
    ]
}

fn arb_value() -> impl Strategy<Value = ValuePlan> {
    prop_oneof![
        3 => arb_scalar().prop_map(ValuePlan::Scalar),
        1 => prop::collection::vec(arb_scalar(), 2..4).prop_map(ValuePlan::List),
    ]
}

fn arb_prop() -> impl Strategy<Value = PropPlan> {
    (any::<usize>(), arb_value()).prop_map(|(term, value)| PropPlan { term, value })
}

fn arb_entity() -> impl Strategy<Value = EntityPlan> {
    let kind = prop_oneof![
        (
            any::<bool>(),
            prop::option::of(any::<usize>()),
            any::<bool>()
        )
            .prop_map(|(dataset, extra_class, absolute)| KindPlan::Data {
                dataset,
                extra_class,
                absolute,
            }),
        (any::<usize>(), 0u8..3, any::<usize>(), any::<usize>()).prop_map(
            |(class, id_style, donor, ref_term)| KindPlan::Contextual {
                class,
                id_style,
                donor,
                ref_term,
            }
        ),
    ];
    (kind, prop::collection::vec(arb_prop(), 0..4))
        .prop_map(|(kind, props)| EntityPlan { kind, props })
}

prop_compose! {
    pub fn arb_graph_plan(max_entities: usize, max_orphans: usize)(
        name in "[a-z]{1,10}",
        description in "[a-z][a-z ]{0,19}",
        date in any::<usize>(),
        entities in prop::collection::vec(arb_entity(), 0..=max_entities),
        orphans in prop::collection::vec(
            (any::<usize>(), prop::collection::vec(arb_prop(), 0..3)),
            0..=max_orphans,
        ),
    ) -> GraphPlan {
        GraphPlan { name, description, date, entities, orphans }
    }
}

pub struct BuiltGraph {
    /// The graph without orphans: fully reachable by construction.
    pub reachable: CrateGraph,
    /// The same graph with the planned orphan entities added.
    pub with_orphans: CrateGraph,
    /// Ids of the injected orphans, in insertion order.
    pub orphan_ids: Vec<EntityId>,
}

/// Deterministically materializes a plan. Every reference targets an entity
/// that exists, every non-orphan entity is reachable from the root, and no
/// property list repeats a value.
pub fn build(plan: &GraphPlan) -> BuiltGraph {
    let date = DATES[plan.date % DATES.len()];
    let license = id("#license");
    let mut graph = CrateGraph::new(
        &format!("{} crate", plan.name),
        &plan.description,
        date,
        license.clone(),
    )
    .expect("plan inputs are valid");

    // Reference pool: targets existing entities only, so serialization never
    // dangles and the mentions rule sees real entities.
    let mut pool: Vec<EntityId> = vec![graph.root_id().clone(), license];

    for (k, ep) in plan.entities.iter().enumerate() {
        match &ep.kind {
            KindPlan::Data {
                dataset,
                extra_class,
                absolute,
            } => {
                let eid = match (dataset, absolute) {
                    (true, false) => id(&format!("part-{k}/")),
                    (true, true) => id(&format!("https://example.org/sets/{k}/")),
                    (false, false) => id(&format!("files/item-{k}.csv")),
                    (false, true) => id(&format!("https://example.org/files/{k}.csv")),
                };
                let base = if *dataset { "Dataset" } else { "File" };
                let mut classes = vec![base.to_string()];
                if let Some(c) = extra_class {
                    classes.push(EXTRA_DATA_CLASSES[c % EXTRA_DATA_CLASSES.len()].to_string());
                }
                let mut entity = Entity::new(eid.clone(), classes);
                apply_props(&mut entity, &ep.props, &pool);
                graph = graph.add_data_entity(entity).expect("fresh data entity");
                pool.push(eid);
            }
            KindPlan::Contextual {
                class,
                id_style,
                donor,
                ref_term,
            } => {
                let eid = match id_style % 3 {
                    0 => id(&format!("#ctx-{k}")),
                    1 => id(&format!("context/{k}.json")),
                    _ => id(&format!("https://example.org/ctx/{k}")),
                };
                let class = CONTEXTUAL_CLASSES[class % CONTEXTUAL_CLASSES.len()];
                let mut entity = Entity::new(eid.clone(), [class]);
                apply_props(&mut entity, &ep.props, &pool);
                graph = graph.add_entity(entity).expect("fresh entity");

                // Wire an incoming reference from an already reachable donor.
                let donor_id = pool[donor % pool.len()].clone();
                let term = REF_TERMS[ref_term % REF_TERMS.len()];
                let mut donor_entity = graph.get(&donor_id).expect("donor present").clone();
                match donor_entity.properties.get_mut(term) {
                    Some(value) if value.references().all(|r| *r != eid) => {
                        value.push(Scalar::Reference(eid.clone()));
                    }
                    Some(_) => {}
                    None => donor_entity.set(term, PropertyValue::reference(eid.clone())),
                }
                graph = graph.replace_entity(donor_entity).expect("donor present");
                pool.push(eid);
            }
        }
    }

    let reachable = graph.clone();
    let mut orphan_ids = Vec::new();
    for (n, (class, props)) in plan.orphans.iter().enumerate() {
        let eid = id(&format!("#orphan-{n}"));
        let class = CONTEXTUAL_CLASSES[class % CONTEXTUAL_CLASSES.len()];
        let mut entity = Entity::new(eid.clone(), [class]);
        apply_props(&mut entity, props, &pool);
        graph = graph.add_entity(entity).expect("fresh orphan");
        orphan_ids.push(eid);
    }

    BuiltGraph {
        reachable,
        with_orphans: graph,
        orphan_ids,
    }
}

fn apply_props(entity: &mut Entity, props: &[PropPlan], pool: &[EntityId]) {
    for prop in props {
        let (term, is_ref) = match &prop.value {
            ValuePlan::Scalar(ScalarPlan::RefTo(_)) => (REF_TERMS, true),
            ValuePlan::Scalar(_) => (LITERAL_TERMS, false),
            ValuePlan::List(items) => (
                if items.iter().any(|s| matches!(s, ScalarPlan::RefTo(_))) {
                    REF_TERMS
                } else {
                    LITERAL_TERMS
                },
                true,
            ),
        };
        let _ = is_ref;
        let term = term[prop.term % term.len()];
        let value = match &prop.value {
            ValuePlan::Scalar(s) => PropertyValue::Scalar(realize(s, pool)),
            ValuePlan::List(items) => {
                let mut seen = std::collections::BTreeSet::new();
                let scalars: Vec<Scalar> = items
                    .iter()
                    .map(|s| realize(s, pool))
                    .filter(|s| seen.insert(token(s)))
                    .collect();
                if scalars.is_empty() {
                    continue;
                }
                PropertyValue::list(scalars)
            }
        };
        entity.set(term, value);
    }
}

fn realize(plan: &ScalarPlan, pool: &[EntityId]) -> Scalar {
    match plan {
        ScalarPlan::Text(s) => Scalar::Text(s.clone()),
        ScalarPlan::Int(i) => Scalar::Number(rocrate_core::Number::Integer(*i)),
        ScalarPlan::Dec(c) => Scalar::Number(rocrate_core::Number::Decimal(f64::from(*c) / 100.0)),
        ScalarPlan::RefTo(i) => Scalar::Reference(pool[i % pool.len()].clone()),
    }
}

fn token(s: &Scalar) -> String {
    match s {
        Scalar::Text(t) => format!("t{t}"),
        Scalar::Number(n) => format!("n{n}"),
        Scalar::Reference(r) => format!("r{}", r.normalized()),
    }
}

// ---------------------------------------------------------------------------
// Structural depth

/// Depth of a JSON value where bare id wrappers count as leaves, matching
/// the shallow-tree reading of the flat form.
pub fn value_depth(value: &Value) -> usize {
    match value {
        Value::Object(map) => {
            if map.len() == 1 && map.get("@id").map(Value::is_string).unwrap_or(false) {
                return 0;
            }
            1 + map.values().map(value_depth).max().unwrap_or(0)
        }
        Value::Array(items) => 1 + items.iter().map(value_depth).max().unwrap_or(0),
        _ => 0,
    }
}

/// Asserts the two-key preamble and per-entity subtree depth of a metadata
/// document.
pub fn assert_document_shape(doc: &str) {
    let value: Value = serde_json::from_str(doc).expect("document parses as JSON");
    let top = value.as_object().expect("top level is an object");
    let mut keys: Vec<&String> = top.keys().collect();
    keys.sort();
    assert_eq!(
        keys,
        ["@context", "@graph"],
        "preamble must be exactly @context and @graph"
    );
    for entity in top["@graph"].as_array().expect("@graph is an array") {
        assert!(
            value_depth(entity) <= 2,
            "entity subtree exceeds depth 2: {entity}"
        );
    }
}

// ---------------------------------------------------------------------------
// Strict HTML checking

const VOID_ELEMENTS: &[&str] = &["meta", "br", "hr", "img", "link", "input"];

/// A deliberately strict well-formedness scan: doctype, balanced tags,
/// quoted attributes, no stray `<` or invalid entities in text.
pub fn assert_well_formed_html(html: &str) {
    let rest = html
        .strip_prefix("<!DOCTYPE html>")
        .expect("must start with the html5 doctype");
    let mut stack: Vec<String> = Vec::new();
    let mut chars = rest.char_indices().peekable();
    while let Some((pos, c)) = chars.next() {
        match c {
            '<' => {
                let end = rest[pos..].find('>').map(|e| pos + e).unwrap_or_else(|| {
                    panic!("unterminated tag at byte {pos}");
                });
                let tag = &rest[pos + 1..end];
                while chars.peek().map(|(p, _)| *p <= end).unwrap_or(false) {
                    chars.next();
                }
                if let Some(name) = tag.strip_prefix('/') {
                    let open = stack.pop().unwrap_or_else(|| {
                        panic!("closing </{name}> without an open element");
                    });
                    assert_eq!(open, name, "mismatched closing tag");
                } else if tag.starts_with('!') {
                    panic!("unexpected declaration inside body: <{tag}>");
                } else {
                    let name: String = tag
                        .chars()
                        .take_while(|c| c.is_ascii_alphanumeric())
                        .collect();
                    assert!(!name.is_empty(), "empty tag name at byte {pos}");
                    check_attributes(tag, pos);
                    if !VOID_ELEMENTS.contains(&name.as_str()) && !tag.ends_with('/') {
                        stack.push(name);
                    }
                }
            }
            '>' => panic!("stray > at byte {pos}"),
            '&' => {
                let tail = &rest[pos..];
                let valid = ["&amp;", "&lt;", "&gt;", "&quot;", "&#39;"]
                    .iter()
                    .any(|e| tail.starts_with(e));
                assert!(valid, "unescaped & at byte {pos}");
            }
            _ => {}
        }
    }
    assert!(stack.is_empty(), "unclosed elements: {stack:?}");
}

fn check_attributes(tag: &str, pos: usize) {
    // Everything after the name must be whitespace-separated name="value"
    // pairs with double quotes.
    let after_name: String = tag
        .chars()
        .skip_while(|c| c.is_ascii_alphanumeric())
        .collect();
    let mut s = after_name.trim();
    while !s.is_empty() {
        let eq = s
            .find('=')
            .unwrap_or_else(|| panic!("bare attribute in <{tag}> at byte {pos}"));
        let rest = &s[eq + 1..];
        assert!(rest.starts_with('"'), "unquoted attribute value in <{tag}>");
        let close = rest[1..]
            .find('"')
            .unwrap_or_else(|| panic!("unterminated attribute value in <{tag}>"));
        s = rest[close + 2..].trim_start();
    }
}

/// Collects `id="..."` anchors and `href="#..."` targets and checks that
/// every internal link resolves.
pub fn assert_internal_links_resolve(html: &str) {
    let ids = extract(html, "id=\"");
    let hrefs = extract(html, "href=\"#");
    for target in &hrefs {
        assert!(
            ids.contains(target),
            "internal link #{target} has no matching anchor"
        );
    }
}

pub fn extract(html: &str, prefix: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = html;
    while let Some(start) = rest.find(prefix) {
        let tail = &rest[start + prefix.len()..];
        let end = tail.find('"').expect("quoted attribute");
        out.push(tail[..end].to_string());
        rest = &tail[end..];
    }
    out
}
