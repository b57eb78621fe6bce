//! The in-memory flat entity graph: designated root and metadata descriptor,
//! data/contextual classification, and the mentions closure.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use thiserror::Error;

use crate::dates::is_iso8601;
use crate::entity::{Entity, PropertyValue, Scalar};
use crate::id::EntityId;
use crate::{METADATA_FILE_NAME, SPEC_CONFORMANCE_IRI};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("{field} must not be blank")]
    EmptyField { field: &'static str },
    #[error("datePublished is not ISO 8601: {0:?}")]
    InvalidDate(String),
    #[error("entity id already present: {0}")]
    DuplicateId(EntityId),
    #[error("not a data entity (must be classed exactly one of File, Dataset): {0}")]
    NotADataEntity(EntityId),
    #[error("unknown entity id: {0}")]
    UnknownId(EntityId),
}

/// Structural role of one entity within a crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Root,
    Descriptor,
    Data,
    Contextual,
}

/// Flat association from id to entity plus the designated root and
/// descriptor. Values are immutable; every mutation returns a new graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrateGraph {
    entities: IndexMap<EntityId, Entity>,
    root_id: EntityId,
    descriptor_id: EntityId,
    spec_version: String,
}

impl CrateGraph {
    /// A minimal crate: metadata descriptor, root dataset with the four
    /// required properties, and a placeholder contextual entity for the
    /// license.
    pub fn new(
        name: &str,
        description: &str,
        date_published: &str,
        license: EntityId,
    ) -> Result<Self, GraphError> {
        Self::new_with_version(
            name,
            description,
            date_published,
            license,
            SPEC_CONFORMANCE_IRI,
        )
    }

    /// As [`CrateGraph::new`] with an explicit conformance IRI.
    pub fn new_with_version(
        name: &str,
        description: &str,
        date_published: &str,
        license: EntityId,
        conformance_iri: &str,
    ) -> Result<Self, GraphError> {
        if name.trim().is_empty() {
            return Err(GraphError::EmptyField { field: "name" });
        }
        if description.trim().is_empty() {
            return Err(GraphError::EmptyField {
                field: "description",
            });
        }
        if !is_iso8601(date_published) {
            return Err(GraphError::InvalidDate(date_published.to_string()));
        }

        let root_id = EntityId::new("./").expect("root id");
        let descriptor_id = EntityId::new(METADATA_FILE_NAME).expect("descriptor id");
        let version_id = EntityId::new(conformance_iri).expect("conformance IRI");

        let descriptor = Entity::new(descriptor_id.clone(), ["CreativeWork"])
            .with("about", PropertyValue::reference(root_id.clone()))
            .with("conformsTo", PropertyValue::reference(version_id));
        let root = Entity::new(root_id.clone(), ["Dataset"])
            .with("name", PropertyValue::text(name))
            .with("description", PropertyValue::text(description))
            .with("datePublished", PropertyValue::text(date_published))
            .with("license", PropertyValue::reference(license.clone()));
        let license_entity =
            Entity::new(license, ["CreativeWork"]).with("name", PropertyValue::text("License"));

        let mut entities = IndexMap::new();
        entities.insert(descriptor.id.clone(), descriptor);
        entities.insert(root.id.clone(), root);
        entities.insert(license_entity.id.clone(), license_entity);
        Ok(CrateGraph {
            entities,
            root_id,
            descriptor_id,
            spec_version: conformance_iri.to_string(),
        })
    }

    /// Assembles a graph from parts already known to carry a root and a
    /// descriptor entity. Used by the parser.
    pub(crate) fn from_parts(
        entities: IndexMap<EntityId, Entity>,
        root_id: EntityId,
        descriptor_id: EntityId,
        spec_version: String,
    ) -> Self {
        debug_assert!(entities.contains_key(&root_id));
        debug_assert!(entities.contains_key(&descriptor_id));
        CrateGraph {
            entities,
            root_id,
            descriptor_id,
            spec_version,
        }
    }

    pub fn root_id(&self) -> &EntityId {
        &self.root_id
    }

    pub fn descriptor_id(&self) -> &EntityId {
        &self.descriptor_id
    }

    /// The conformance IRI named by the descriptor.
    pub fn spec_version(&self) -> &str {
        &self.spec_version
    }

    pub fn root(&self) -> &Entity {
        &self.entities[&self.root_id]
    }

    pub fn descriptor(&self) -> &Entity {
        &self.entities[&self.descriptor_id]
    }

    pub fn get(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.entities.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Entities in insertion order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &EntityId> {
        self.entities.keys()
    }

    /// A new graph with `entity` added; no other entity changes.
    pub fn add_entity(&self, entity: Entity) -> Result<Self, GraphError> {
        if self.entities.contains_key(&entity.id) {
            return Err(GraphError::DuplicateId(entity.id));
        }
        let mut next = self.clone();
        next.entities.insert(entity.id.clone(), entity);
        Ok(next)
    }

    /// Adds a data entity and appends it to the root's `hasPart`.
    ///
    /// Data entities are classed exactly one of `File` or `Dataset`; further
    /// classes (`ImageObject`, `ComputationalWorkflow`, …) may coexist.
    pub fn add_data_entity(&self, entity: Entity) -> Result<Self, GraphError> {
        let file = entity.has_class("File");
        let dataset = entity.has_class("Dataset");
        if file == dataset {
            return Err(GraphError::NotADataEntity(entity.id));
        }
        let id = entity.id.clone();
        let mut next = self.add_entity(entity)?;
        let root = next.entities.get_mut(&next.root_id).expect("root present");
        match root.properties.get_mut("hasPart") {
            Some(value) => value.push(Scalar::Reference(id)),
            None => root.set("hasPart", PropertyValue::reference(id)),
        }
        Ok(next)
    }

    /// A new graph with the entity under `id` replaced.
    pub fn replace_entity(&self, entity: Entity) -> Result<Self, GraphError> {
        if !self.entities.contains_key(&entity.id) {
            return Err(GraphError::UnknownId(entity.id));
        }
        let mut next = self.clone();
        next.entities.insert(entity.id.clone(), entity);
        Ok(next)
    }

    /// Ids referenced from the root's `hasPart`, in list order.
    pub fn has_part_ids(&self) -> Vec<&EntityId> {
        match self.root().get("hasPart") {
            Some(value) => value.references().collect(),
            None => Vec::new(),
        }
    }

    /// Structural role of `id`: the designated root or descriptor, a data
    /// entity (reachable along `hasPart` and classed File or Dataset), or a
    /// contextual entity otherwise. Every id gets exactly one role.
    pub fn classify(&self, id: &EntityId) -> Result<Classification, GraphError> {
        if !self.entities.contains_key(id) {
            return Err(GraphError::UnknownId(id.clone()));
        }
        if *id == self.root_id {
            return Ok(Classification::Root);
        }
        if *id == self.descriptor_id {
            return Ok(Classification::Descriptor);
        }
        if self.data_entity_ids().contains(id) {
            return Ok(Classification::Data);
        }
        Ok(Classification::Contextual)
    }

    /// Ids of data entities: entities reachable from the root along
    /// `hasPart` edges where every node on the way is classed File or
    /// Dataset.
    pub fn data_entity_ids(&self) -> BTreeSet<EntityId> {
        let mut out = BTreeSet::new();
        let mut queue: Vec<&EntityId> = self.has_part_ids();
        while let Some(id) = queue.pop() {
            if id == &self.root_id || id == &self.descriptor_id {
                continue;
            }
            let Some(entity) = self.entities.get(id) else {
                continue;
            };
            if !(entity.has_class("File") || entity.has_class("Dataset")) {
                continue;
            }
            if out.insert(id.clone()) {
                if let Some(parts) = entity.get("hasPart") {
                    queue.extend(parts.references());
                }
            }
        }
        out
    }

    /// Least fixpoint of the mentions rule seeded from the root: starting at
    /// the root, every reference target present in the graph is mentioned,
    /// transitively. The descriptor is always included — it describes the
    /// crate even though nothing references it.
    pub fn mentions_closure(&self) -> BTreeSet<EntityId> {
        let mut seen: BTreeSet<EntityId> = BTreeSet::new();
        seen.insert(self.root_id.clone());
        seen.insert(self.descriptor_id.clone());
        let mut queue = vec![self.root_id.clone(), self.descriptor_id.clone()];
        while let Some(id) = queue.pop() {
            let Some(entity) = self.entities.get(&id) else {
                continue;
            };
            for target in entity.references() {
                if self.entities.contains_key(target) && seen.insert(target.clone()) {
                    queue.push(target.clone());
                }
            }
        }
        seen
    }

    /// Relative references that resolve to no entity. Absolute IRIs may
    /// dangle; relative ones may not.
    pub fn dangling_relative_references(&self) -> Vec<(EntityId, String, EntityId)> {
        let mut out = Vec::new();
        for entity in self.entities.values() {
            for (term, value) in &entity.properties {
                for target in value.references() {
                    if !target.is_absolute() && !self.entities.contains_key(target) {
                        out.push((entity.id.clone(), term.clone(), target.clone()));
                    }
                }
            }
        }
        out
    }
}
