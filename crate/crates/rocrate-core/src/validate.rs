//! Conformance checking: the minimal crate rules, reachability warnings and
//! declarative profile validation.
//!
//! Findings carry stable rule ids (`root.name.missing`, `entity.unreachable`,
//! …) so downstream tooling can filter on them.

use indexmap::IndexMap;
use serde_json::Value;
use thiserror::Error;

use crate::dates::is_iso8601;
use crate::entity::PropertyValue;
use crate::graph::{Classification, CrateGraph};
use crate::id::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

/// One rule violation or observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub rule: String,
    pub severity: Severity,
    pub entity: Option<EntityId>,
    pub message: String,
}

impl Finding {
    fn new(
        rule: &str,
        severity: Severity,
        entity: Option<&EntityId>,
        message: impl Into<String>,
    ) -> Self {
        Finding {
            rule: rule.to_string(),
            severity,
            entity: entity.cloned(),
            message: message.into(),
        }
    }
}

/// Validation outcome: `Fail` exactly when an error-severity finding exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub verdict: Verdict,
    pub findings: Vec<Finding>,
    pub profile: Option<String>,
}

impl ValidationReport {
    pub fn from_findings(findings: Vec<Finding>, profile: Option<String>) -> Self {
        let verdict = if findings.iter().any(|f| f.severity == Severity::Error) {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        ValidationReport {
            verdict,
            findings,
            profile,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Warning)
    }
}

/// Checks the minimal crate rules: descriptor shape, root dataset with the
/// four required properties (license resolving in-graph), at least one class
/// per entity, and File/Dataset exclusivity. Non-ISO dates and `#`-local
/// Person ids are warnings.
pub fn validate_minimal(graph: &CrateGraph) -> ValidationReport {
    let mut findings = Vec::new();
    check_descriptor(graph, &mut findings);
    check_root(graph, &mut findings);
    for entity in graph.entities() {
        if entity.classes.is_empty() {
            findings.push(Finding::new(
                "entity.type.missing",
                Severity::Error,
                Some(&entity.id),
                "entity has no class; at least one is required",
            ));
        }
        if entity.has_class("File") && entity.has_class("Dataset") {
            findings.push(Finding::new(
                "entity.type.exclusive",
                Severity::Error,
                Some(&entity.id),
                "entity is classed both File and Dataset",
            ));
        }
        if entity.has_class("Person") && entity.id.is_local_fragment() {
            findings.push(Finding::new(
                "person.id.local",
                Severity::Warning,
                Some(&entity.id),
                "Person has a crate-local id; an ORCID IRI would identify them globally",
            ));
        }
    }
    ValidationReport::from_findings(findings, None)
}

fn check_descriptor(graph: &CrateGraph, findings: &mut Vec<Finding>) {
    let Some(descriptor) = graph.get(graph.descriptor_id()) else {
        findings.push(Finding::new(
            "descriptor.missing",
            Severity::Error,
            Some(graph.descriptor_id()),
            "metadata file descriptor entity is missing",
        ));
        return;
    };
    match descriptor.get("about").and_then(|v| v.references().next()) {
        Some(target) if target == graph.root_id() => {}
        Some(_) => findings.push(Finding::new(
            "descriptor.about.target",
            Severity::Error,
            Some(&descriptor.id),
            "descriptor's about does not reference the root data entity",
        )),
        None => findings.push(Finding::new(
            "descriptor.about.missing",
            Severity::Error,
            Some(&descriptor.id),
            "descriptor has no about reference",
        )),
    }
    if descriptor
        .get("conformsTo")
        .and_then(|v| v.references().next())
        .is_none()
    {
        findings.push(Finding::new(
            "descriptor.conformsTo.missing",
            Severity::Error,
            Some(&descriptor.id),
            "descriptor has no conformsTo reference to a specification version",
        ));
    }
}

fn check_root(graph: &CrateGraph, findings: &mut Vec<Finding>) {
    let root = graph.root();
    if !root.has_class("Dataset") {
        findings.push(Finding::new(
            "root.type.dataset",
            Severity::Error,
            Some(&root.id),
            "root data entity is not a Dataset",
        ));
    }
    for (term, rule) in [
        ("name", "root.name.missing"),
        ("description", "root.description.missing"),
    ] {
        if literal_text(root.get(term)).is_none() {
            findings.push(Finding::new(
                rule,
                Severity::Error,
                Some(&root.id),
                format!("root has no literal {term}"),
            ));
        }
    }
    match root.get("datePublished") {
        Some(value) if value.is_literal() && !value.scalars().is_empty() => {
            let lexical = match &value.scalars()[0] {
                crate::entity::Scalar::Text(s) => s.clone(),
                crate::entity::Scalar::Number(n) => n.lexical(),
                crate::entity::Scalar::Reference(_) => unreachable!("literal checked"),
            };
            if !is_iso8601(&lexical) {
                findings.push(Finding::new(
                    "root.datePublished.format",
                    Severity::Warning,
                    Some(&root.id),
                    format!("datePublished {lexical:?} is not ISO 8601"),
                ));
            }
        }
        _ => findings.push(Finding::new(
            "root.datePublished.missing",
            Severity::Error,
            Some(&root.id),
            "root has no literal datePublished",
        )),
    }
    match root.get("license").and_then(|v| v.references().next()) {
        Some(license) if graph.contains(license) => {}
        Some(license) => findings.push(Finding::new(
            "root.license.unresolved",
            Severity::Error,
            Some(&root.id),
            format!("license {license} is not described by an entity in the graph"),
        )),
        None => findings.push(Finding::new(
            "root.license.missing",
            Severity::Error,
            Some(&root.id),
            "root has no license reference",
        )),
    }
}

fn literal_text(value: Option<&PropertyValue>) -> Option<&str> {
    value
        .and_then(PropertyValue::as_text)
        .filter(|s| !s.is_empty())
}

/// Entities outside the mentions closure, in normalized-id order.
pub fn check_reachability(graph: &CrateGraph) -> Vec<EntityId> {
    let closure = graph.mentions_closure();
    graph
        .ids()
        .filter(|id| !closure.contains(id))
        .cloned()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Reachability gaps as warning findings with a remediation hint.
pub fn reachability_findings(graph: &CrateGraph) -> Vec<Finding> {
    check_reachability(graph)
        .iter()
        .map(|id| {
            Finding::new(
                "entity.unreachable",
                Severity::Warning,
                Some(id),
                "entity is not reachable from the root; link it from the root via mentions",
            )
        })
        .collect()
}

/// Where a profile rule requires its entities to live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Data,
    Contextual,
    Any,
}

impl Location {
    fn matches(&self, classification: Classification) -> bool {
        match self {
            Location::Any => true,
            Location::Data => classification == Classification::Data,
            Location::Contextual => classification == Classification::Contextual,
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            Location::Data => "a data entity",
            Location::Contextual => "a contextual entity",
            Location::Any => "anywhere",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiredEntity {
    pub class_term: String,
    pub min_count: usize,
    pub location: Location,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiredProperty {
    pub on_class: String,
    pub property: String,
    pub severity: Severity,
}

/// A declarative conformance profile: required entity classes, required
/// properties per class, and context extensions. Profiles are data, not
/// code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    pub id: String,
    pub name: String,
    pub required_entities: Vec<RequiredEntity>,
    pub required_properties: Vec<RequiredProperty>,
    pub context_extensions: IndexMap<String, String>,
}

impl Profile {
    /// A profile with no rules of its own; validating against it is the
    /// minimal validation.
    pub fn empty(id: impl Into<String>, name: impl Into<String>) -> Self {
        Profile {
            id: id.into(),
            name: name.into(),
            required_entities: Vec::new(),
            required_properties: Vec::new(),
            context_extensions: IndexMap::new(),
        }
    }
}

/// The built-in Workflow RO-Crate profile: at least one data entity typed
/// ComputationalWorkflow, which should name its workflow language, and
/// datasets should carry a license.
pub fn workflow_profile() -> Profile {
    Profile {
        id: "https://w3id.org/workflowhub/workflow-ro-crate/1.0".into(),
        name: "Workflow RO-Crate".into(),
        required_entities: vec![RequiredEntity {
            class_term: "ComputationalWorkflow".into(),
            min_count: 1,
            location: Location::Data,
        }],
        required_properties: vec![
            RequiredProperty {
                on_class: "ComputationalWorkflow".into(),
                property: "programmingLanguage".into(),
                severity: Severity::Warning,
            },
            RequiredProperty {
                on_class: "Dataset".into(),
                property: "license".into(),
                severity: Severity::Warning,
            },
        ],
        context_extensions: IndexMap::new(),
    }
}

/// Runs minimal validation, then the profile's entity and property rules.
pub fn validate_profile(graph: &CrateGraph, profile: &Profile) -> ValidationReport {
    let mut findings = validate_minimal(graph).findings;

    for rule in &profile.required_entities {
        let count = graph
            .entities()
            .filter(|e| e.has_class(&rule.class_term))
            .filter(|e| {
                graph
                    .classify(&e.id)
                    .map(|c| rule.location.matches(c))
                    .unwrap_or(false)
            })
            .count();
        if count < rule.min_count {
            findings.push(Finding::new(
                "profile.entity.missing",
                Severity::Error,
                None,
                format!(
                    "profile requires at least {} {} entity(ies) as {}, found {count}",
                    rule.min_count,
                    rule.class_term,
                    rule.location.as_str(),
                ),
            ));
        }
    }

    for rule in &profile.required_properties {
        for entity in graph.entities() {
            if entity.has_class(&rule.on_class) && entity.get(&rule.property).is_none() {
                findings.push(Finding::new(
                    "profile.property.missing",
                    rule.severity,
                    Some(&entity.id),
                    format!("{} should carry {}", rule.on_class, rule.property),
                ));
            }
        }
    }

    ValidationReport::from_findings(findings, Some(profile.id.clone()))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("malformed profile: {0}")]
    MalformedProfile(String),
}

/// Reads a profile document. Unknown fields are ignored with an info
/// finding; a missing id is malformed.
pub fn load_profile(bytes: &[u8]) -> Result<(Profile, Vec<Finding>), ProfileError> {
    let doc: Value = serde_json::from_slice(bytes)
        .map_err(|e| ProfileError::MalformedProfile(format!("not JSON: {e}")))?;
    let object = doc
        .as_object()
        .ok_or_else(|| ProfileError::MalformedProfile("document is not an object".into()))?;

    let mut notices = Vec::new();
    let known = [
        "id",
        "name",
        "requiredEntities",
        "requiredProperties",
        "contextExtensions",
    ];
    for key in object.keys() {
        if !known.contains(&key.as_str()) {
            notices.push(Finding::new(
                "profile.unknown-field",
                Severity::Info,
                None,
                format!("ignoring unknown profile field {key:?}"),
            ));
        }
    }

    let id = object
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| ProfileError::MalformedProfile("missing string field id".into()))?
        .to_string();
    let name = object
        .get("name")
        .and_then(Value::as_str)
        .unwrap_or(&id)
        .to_string();

    let mut required_entities = Vec::new();
    if let Some(rules) = object.get("requiredEntities") {
        let rules = rules.as_array().ok_or_else(|| {
            ProfileError::MalformedProfile("requiredEntities must be a list".into())
        })?;
        for rule in rules {
            let class_term = rule
                .get("type")
                .and_then(Value::as_str)
                .ok_or_else(|| {
                    ProfileError::MalformedProfile("required entity rule needs a type".into())
                })?
                .to_string();
            let min_count = rule
                .get("minCount")
                .map_or(Some(1), Value::as_u64)
                .ok_or_else(|| ProfileError::MalformedProfile("minCount must be a number".into()))?
                as usize;
            if min_count < 1 {
                return Err(ProfileError::MalformedProfile(
                    "minCount must be at least 1".into(),
                ));
            }
            let location = match rule.get("location").and_then(Value::as_str) {
                None | Some("Any") => Location::Any,
                Some("Data") => Location::Data,
                Some("Contextual") => Location::Contextual,
                Some(other) => {
                    return Err(ProfileError::MalformedProfile(format!(
                        "unknown location {other:?}"
                    )))
                }
            };
            required_entities.push(RequiredEntity {
                class_term,
                min_count,
                location,
            });
        }
    }

    let mut required_properties = Vec::new();
    if let Some(rules) = object.get("requiredProperties") {
        let rules = rules.as_array().ok_or_else(|| {
            ProfileError::MalformedProfile("requiredProperties must be a list".into())
        })?;
        for rule in rules {
            let on_class = rule
                .get("onType")
                .and_then(Value::as_str)
                .ok_or_else(|| {
                    ProfileError::MalformedProfile("required property rule needs onType".into())
                })?
                .to_string();
            let property = rule
                .get("property")
                .and_then(Value::as_str)
                .ok_or_else(|| {
                    ProfileError::MalformedProfile("required property rule needs property".into())
                })?
                .to_string();
            let severity = match rule.get("severity").and_then(Value::as_str) {
                None | Some("Error") => Severity::Error,
                Some("Warning") => Severity::Warning,
                Some("Info") => Severity::Info,
                Some(other) => {
                    return Err(ProfileError::MalformedProfile(format!(
                        "unknown severity {other:?}"
                    )))
                }
            };
            required_properties.push(RequiredProperty {
                on_class,
                property,
                severity,
            });
        }
    }

    let mut context_extensions = IndexMap::new();
    if let Some(ext) = object.get("contextExtensions") {
        let ext = ext.as_object().ok_or_else(|| {
            ProfileError::MalformedProfile("contextExtensions must be an object".into())
        })?;
        for (term, iri) in ext {
            let iri = iri.as_str().ok_or_else(|| {
                ProfileError::MalformedProfile(format!("extension {term:?} must map to a string"))
            })?;
            context_extensions.insert(term.clone(), iri.to_string());
        }
    }

    Ok((
        Profile {
            id,
            name,
            required_entities,
            required_properties,
            context_extensions,
        },
        notices,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entity::Entity;

    fn id(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    fn minimal() -> CrateGraph {
        CrateGraph::new("x", "y", "2020-01-01", id("#lic")).unwrap()
    }

    #[test]
    fn minimal_crate_passes() {
        let report = validate_minimal(&minimal());
        assert!(report.passed(), "{:?}", report.findings);
        assert!(report.findings.is_empty());
    }

    #[test]
    fn each_missing_root_property_flips_the_verdict() {
        for term in ["name", "description", "datePublished", "license"] {
            let g = minimal();
            let mut root = g.root().clone();
            root.properties.shift_remove(term);
            let g = g.replace_entity(root).unwrap();
            let report = validate_minimal(&g);
            assert_eq!(report.verdict, Verdict::Fail, "removing {term}");
            assert!(report
                .errors()
                .any(|f| f.rule == format!("root.{term}.missing")));
        }
    }

    #[test]
    fn unresolved_license_is_an_error() {
        let g = minimal();
        let mut root = g.root().clone();
        root.set("license", PropertyValue::reference(id("#other-lic")));
        let g = g.replace_entity(root).unwrap();
        let report = validate_minimal(&g);
        assert!(report.errors().any(|f| f.rule == "root.license.unresolved"));
    }

    #[test]
    fn non_iso_date_is_a_warning_not_an_error() {
        let g = minimal();
        let mut root = g.root().clone();
        root.set("datePublished", PropertyValue::text("sometime in spring"));
        let g = g.replace_entity(root).unwrap();
        let report = validate_minimal(&g);
        assert!(report.passed());
        assert!(report
            .warnings()
            .any(|f| f.rule == "root.datePublished.format"));
    }

    #[test]
    fn local_person_id_warns() {
        let g = minimal()
            .add_entity(Entity::new(id("#alice"), ["Person"]))
            .unwrap()
            .add_entity(Entity::new(
                id("https://orcid.org/0000-0002-1825-0097"),
                ["Person"],
            ))
            .unwrap();
        let report = validate_minimal(&g);
        let warned: Vec<_> = report
            .warnings()
            .filter(|f| f.rule == "person.id.local")
            .collect();
        assert_eq!(warned.len(), 1);
        assert_eq!(warned[0].entity, Some(id("#alice")));
    }

    #[test]
    fn class_rules() {
        let g = minimal()
            .add_entity(Entity::new(id("#untyped"), Vec::<String>::new()))
            .unwrap();
        let report = validate_minimal(&g);
        assert!(report.errors().any(|f| f.rule == "entity.type.missing"));

        let g = minimal()
            .add_entity(Entity::new(id("#both"), ["File", "Dataset"]))
            .unwrap();
        let report = validate_minimal(&g);
        assert!(report.errors().any(|f| f.rule == "entity.type.exclusive"));
    }

    #[test]
    fn reachability_reports_orphans_only() {
        let g = minimal();
        assert!(check_reachability(&g).is_empty());

        let g = g
            .add_entity(Entity::new(id("#orphan"), ["Person"]))
            .unwrap();
        assert_eq!(check_reachability(&g), vec![id("#orphan")]);

        let mut root = g.root().clone();
        root.set("mentions", PropertyValue::reference(id("#orphan")));
        let g = g.replace_entity(root).unwrap();
        assert!(check_reachability(&g).is_empty());

        // Never overlaps the closure.
        let closure = g.mentions_closure();
        assert!(check_reachability(&g).iter().all(|x| !closure.contains(x)));
    }

    fn workflow_crate() -> CrateGraph {
        let wf = Entity::new(id("workflow.cwl"), ["File", "ComputationalWorkflow"])
            .with("programmingLanguage", PropertyValue::reference(id("#cwl")));
        minimal()
            .add_data_entity(wf)
            .unwrap()
            .add_entity(Entity::new(id("#cwl"), ["ComputerLanguage"]))
            .unwrap()
    }

    #[test]
    fn workflow_profile_passes_on_workflow_crate() {
        let report = validate_profile(&workflow_crate(), &workflow_profile());
        assert!(report.passed(), "{:?}", report.findings);
        assert_eq!(
            report.profile.as_deref(),
            Some("https://w3id.org/workflowhub/workflow-ro-crate/1.0")
        );
    }

    #[test]
    fn workflow_profile_fails_without_workflow() {
        let report = validate_profile(&minimal(), &workflow_profile());
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.errors().any(|f| f.rule == "profile.entity.missing"));
    }

    #[test]
    fn contextual_only_workflow_fails_the_location_rule() {
        // Same entity, but added without the hasPart edge: not a data entity.
        let wf = Entity::new(id("workflow.cwl"), ["File", "ComputationalWorkflow"]);
        let g = minimal().add_entity(wf).unwrap();
        let report = validate_profile(&g, &workflow_profile());
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.errors().any(|f| f.rule == "profile.entity.missing"));
    }

    #[test]
    fn missing_programming_language_is_a_warning() {
        let wf = Entity::new(id("workflow.cwl"), ["File", "ComputationalWorkflow"]);
        let g = minimal().add_data_entity(wf).unwrap();
        let report = validate_profile(&g, &workflow_profile());
        assert!(report.passed());
        assert!(report
            .warnings()
            .any(|f| f.rule == "profile.property.missing" && f.entity == Some(id("workflow.cwl"))));
    }

    #[test]
    fn empty_profile_matches_minimal_validation() {
        for g in [minimal(), workflow_crate()] {
            let empty = Profile::empty("https://example.org/profiles/empty", "Empty");
            assert_eq!(
                validate_profile(&g, &empty).verdict,
                validate_minimal(&g).verdict
            );
        }
    }

    #[test]
    fn load_profile_roundtrip() {
        let (profile, notices) = load_profile(
            br#"{
                "id": "https://example.org/profiles/wf",
                "name": "Workflow",
                "requiredEntities": [
                    {"type": "ComputationalWorkflow", "minCount": 1, "location": "Data"}
                ],
                "requiredProperties": [
                    {"onType": "ComputationalWorkflow", "property": "programmingLanguage",
                     "severity": "Warning"}
                ],
                "contextExtensions": {"testInstance": "https://w3id.org/ro/terms/test#instance"},
                "comment": "ignored"
            }"#,
        )
        .unwrap();
        assert_eq!(profile.required_entities.len(), 1);
        assert_eq!(profile.required_entities[0].location, Location::Data);
        assert_eq!(profile.required_properties[0].severity, Severity::Warning);
        assert_eq!(profile.context_extensions.len(), 1);
        assert_eq!(notices.len(), 1);
        assert_eq!(notices[0].rule, "profile.unknown-field");
    }

    #[test]
    fn empty_rules_profile_only_reruns_minimal() {
        let (profile, _) = load_profile(br#"{"id": "https://example.org/p"}"#).unwrap();
        assert_eq!(
            validate_profile(&minimal(), &profile).verdict,
            Verdict::Pass
        );
    }

    #[test]
    fn profile_without_id_is_malformed() {
        assert!(matches!(
            load_profile(br#"{"name": "nameless"}"#),
            Err(ProfileError::MalformedProfile(_))
        ));
        assert!(matches!(
            load_profile(b"not json"),
            Err(ProfileError::MalformedProfile(_))
        ));
        assert!(matches!(
            load_profile(br#"{"id": "x", "requiredEntities": [{"type": "T", "minCount": 0}]}"#),
            Err(ProfileError::MalformedProfile(_))
        ));
    }
}
