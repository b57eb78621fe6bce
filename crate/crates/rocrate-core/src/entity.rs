//! Entities and their property values.

use std::fmt;
use std::hash::{Hash, Hasher};

use indexmap::IndexMap;

use crate::id::EntityId;

/// A literal number: integers and finite decimals, kept apart so `2` and
/// `2.0` survive round trips unchanged.
#[derive(Debug, Clone, Copy)]
pub enum Number {
    Integer(i64),
    Decimal(f64),
}

impl Number {
    /// Lexical form used in serialized output: integers without a decimal
    /// point, decimals without exponent notation (a `.0` is appended when
    /// the shortest form has none).
    pub fn lexical(&self) -> String {
        match self {
            Number::Integer(i) => i.to_string(),
            Number::Decimal(f) => {
                debug_assert!(f.is_finite(), "non-finite number in graph");
                let mut s = format!("{f}");
                if !s.contains('.') {
                    s.push_str(".0");
                }
                s
            }
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Integer(a), Number::Integer(b)) => a == b,
            (Number::Decimal(a), Number::Decimal(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Number {}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Integer(i) => {
                0u8.hash(state);
                i.hash(state);
            }
            Number::Decimal(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lexical())
    }
}

/// One scalar property value: literal text, a literal number, or a reference
/// to another entity. References serialize as id-wrapper objects and are
/// therefore always distinguishable from text.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Text(String),
    Number(Number),
    Reference(EntityId),
}

impl Scalar {
    pub fn reference(&self) -> Option<&EntityId> {
        match self {
            Scalar::Reference(id) => Some(id),
            _ => None,
        }
    }
}

/// A property value: one scalar or an ordered list of scalars.
///
/// Lists never nest, and a one-element list collapses to its scalar on
/// construction; list-ness is only meaningful at length two or more, matching
/// how values are written.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PropertyValue {
    Scalar(Scalar),
    List(Vec<Scalar>),
}

impl PropertyValue {
    pub fn text(s: impl Into<String>) -> Self {
        PropertyValue::Scalar(Scalar::Text(s.into()))
    }

    pub fn integer(i: i64) -> Self {
        PropertyValue::Scalar(Scalar::Number(Number::Integer(i)))
    }

    pub fn decimal(f: f64) -> Self {
        PropertyValue::Scalar(Scalar::Number(Number::Decimal(f)))
    }

    pub fn reference(id: EntityId) -> Self {
        PropertyValue::Scalar(Scalar::Reference(id))
    }

    /// Builds a list value, collapsing a singleton to its scalar.
    pub fn list(mut items: Vec<Scalar>) -> Self {
        if items.len() == 1 {
            PropertyValue::Scalar(items.remove(0))
        } else {
            PropertyValue::List(items)
        }
    }

    /// All scalars in order: one for a scalar value, each element for a list.
    pub fn scalars(&self) -> &[Scalar] {
        match self {
            PropertyValue::Scalar(s) => std::slice::from_ref(s),
            PropertyValue::List(items) => items,
        }
    }

    /// Entity references contained in this value, in order.
    pub fn references(&self) -> impl Iterator<Item = &EntityId> {
        self.scalars().iter().filter_map(Scalar::reference)
    }

    /// Appends a scalar, turning a scalar value into a two-element list.
    pub fn push(&mut self, item: Scalar) {
        match self {
            PropertyValue::Scalar(s) => {
                *self = PropertyValue::List(vec![s.clone(), item]);
            }
            PropertyValue::List(items) => items.push(item),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropertyValue::Scalar(Scalar::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_reference(&self) -> Option<&EntityId> {
        match self {
            PropertyValue::Scalar(Scalar::Reference(id)) => Some(id),
            _ => None,
        }
    }

    /// True when every scalar is a literal (text or number).
    pub fn is_literal(&self) -> bool {
        self.scalars()
            .iter()
            .all(|s| !matches!(s, Scalar::Reference(_)))
    }
}

/// One node of the flat graph: id, class list and property map.
///
/// The property map never carries the reserved id/type keys; classes are a
/// plain term list (`Dataset`, `File`, `Person`, …) whose order is preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: EntityId,
    pub classes: Vec<String>,
    pub properties: IndexMap<String, PropertyValue>,
}

impl Entity {
    /// A new entity with at least one class and no properties.
    pub fn new(id: EntityId, classes: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Entity {
            id,
            classes: classes.into_iter().map(Into::into).collect(),
            properties: IndexMap::new(),
        }
    }

    /// Builder-style property insertion.
    pub fn with(mut self, term: impl Into<String>, value: PropertyValue) -> Self {
        self.set(term, value);
        self
    }

    pub fn set(&mut self, term: impl Into<String>, value: PropertyValue) {
        let term = term.into();
        debug_assert!(
            term != "@id" && term != "@type",
            "reserved key used as property term"
        );
        self.properties.insert(term, value);
    }

    pub fn get(&self, term: &str) -> Option<&PropertyValue> {
        self.properties.get(term)
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }

    /// References held by any property, in property-then-element order.
    pub fn references(&self) -> impl Iterator<Item = &EntityId> {
        self.properties.values().flat_map(PropertyValue::references)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    #[test]
    fn singleton_list_collapses() {
        let v = PropertyValue::list(vec![Scalar::Text("x".into())]);
        assert_eq!(v, PropertyValue::text("x"));
        let v = PropertyValue::list(vec![Scalar::Text("x".into()), Scalar::Text("y".into())]);
        assert!(matches!(v, PropertyValue::List(_)));
    }

    #[test]
    fn push_promotes_scalar_to_list() {
        let mut v = PropertyValue::reference(id("a.csv"));
        v.push(Scalar::Reference(id("b.csv")));
        assert_eq!(v.scalars().len(), 2);
    }

    #[test]
    fn number_lexical_forms() {
        assert_eq!(Number::Integer(2).lexical(), "2");
        assert_eq!(Number::Decimal(2.0).lexical(), "2.0");
        assert_eq!(Number::Decimal(13.37).lexical(), "13.37");
        // No exponent notation even for large magnitudes.
        assert_eq!(Number::Decimal(1e21).lexical(), "1000000000000000000000.0");
        assert_ne!(Number::Integer(2), Number::Decimal(2.0));
    }

    #[test]
    fn entity_reference_walk() {
        let e = Entity::new(id("./"), ["Dataset"])
            .with("author", PropertyValue::reference(id("#alice")))
            .with(
                "hasPart",
                PropertyValue::list(vec![
                    Scalar::Reference(id("a.csv")),
                    Scalar::Reference(id("b/")),
                ]),
            )
            .with("name", PropertyValue::text("Example"));
        let refs: Vec<&str> = e.references().map(|r| r.as_str()).collect();
        assert_eq!(refs, ["#alice", "a.csv", "b/"]);
    }
}
