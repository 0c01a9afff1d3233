//! Domain vocabulary shared by the knowledge bases, the parser and the
//! synchronization engine: information sources, relations, typed
//! attributes, web services and schema change events.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown target: {0}")]
    UnknownTarget(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("invalid component path `{0}`")]
    InvalidPath(String),
}

/// Domain type of an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeDomain {
    Number,
    String,
    Date,
}

impl fmt::Display for TypeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeDomain::Number => "Number",
            TypeDomain::String => "String",
            TypeDomain::Date => "Date",
        })
    }
}

/// Fully qualified relation name, `Source.Relation`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationRef {
    pub source_id: String,
    pub relation_name: String,
}

impl RelationRef {
    pub fn new(source_id: impl Into<String>, relation_name: impl Into<String>) -> Self {
        Self {
            source_id: source_id.into(),
            relation_name: relation_name.into(),
        }
    }

    pub fn attribute(&self, attribute_name: impl Into<String>) -> AttributeRef {
        AttributeRef {
            source_id: self.source_id.clone(),
            relation_name: self.relation_name.clone(),
            attribute_name: attribute_name.into(),
        }
    }
}

impl fmt::Display for RelationRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.source_id, self.relation_name)
    }
}

impl FromStr for RelationRef {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match split_path(s)?.as_slice() {
            [source, relation] => Ok(RelationRef::new(*source, *relation)),
            _ => Err(ModelError::InvalidPath(s.to_string())),
        }
    }
}

/// Fully qualified attribute name, `Source.Relation.Attribute`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttributeRef {
    pub source_id: String,
    pub relation_name: String,
    pub attribute_name: String,
}

impl AttributeRef {
    pub fn new(
        source_id: impl Into<String>,
        relation_name: impl Into<String>,
        attribute_name: impl Into<String>,
    ) -> Self {
        Self {
            source_id: source_id.into(),
            relation_name: relation_name.into(),
            attribute_name: attribute_name.into(),
        }
    }

    pub fn relation(&self) -> RelationRef {
        RelationRef::new(self.source_id.clone(), self.relation_name.clone())
    }
}

impl fmt::Display for AttributeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.source_id, self.relation_name, self.attribute_name)
    }
}

impl FromStr for AttributeRef {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match split_path(s)?.as_slice() {
            [source, relation, attribute] => Ok(AttributeRef::new(*source, *relation, *attribute)),
            _ => Err(ModelError::InvalidPath(s.to_string())),
        }
    }
}

fn split_path(s: &str) -> Result<Vec<&str>, ModelError> {
    let parts: Vec<&str> = s.split('.').collect();
    if parts.iter().any(|p| p.is_empty() || p.trim() != *p) {
        return Err(ModelError::InvalidPath(s.to_string()));
    }
    Ok(parts)
}

/// A relation with its ordered, typed attributes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelationSchema {
    pub name: String,
    pub attributes: Vec<(String, TypeDomain)>,
}

impl RelationSchema {
    pub fn new(name: impl Into<String>, attributes: Vec<(String, TypeDomain)>) -> Result<Self, ModelError> {
        let schema = Self {
            name: name.into(),
            attributes,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.name.is_empty() {
            return Err(ModelError::InvalidSchema("empty relation name".into()));
        }
        if self.attributes.is_empty() {
            return Err(ModelError::InvalidSchema(format!(
                "relation {} has no attributes",
                self.name
            )));
        }
        let mut seen = BTreeSet::new();
        for (name, _) in &self.attributes {
            if name.is_empty() {
                return Err(ModelError::InvalidSchema(format!(
                    "relation {} has an empty attribute name",
                    self.name
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(ModelError::InvalidSchema(format!(
                    "duplicate attribute {} in relation {}",
                    name, self.name
                )));
            }
        }
        Ok(())
    }

    pub fn attribute_type(&self, attribute: &str) -> Option<TypeDomain> {
        self.attributes
            .iter()
            .find(|(name, _)| name == attribute)
            .map(|(_, ty)| *ty)
    }

    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.attribute_type(attribute).is_some()
    }
}

/// The schema an information source exposes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceSchema {
    pub source_id: String,
    pub relations: Vec<RelationSchema>,
}

impl SourceSchema {
    pub fn new(source_id: impl Into<String>, relations: Vec<RelationSchema>) -> Result<Self, ModelError> {
        let schema = Self {
            source_id: source_id.into(),
            relations,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.source_id.is_empty() {
            return Err(ModelError::InvalidSchema("empty source id".into()));
        }
        if self.relations.is_empty() {
            return Err(ModelError::InvalidSchema(format!(
                "source {} has no relations",
                self.source_id
            )));
        }
        let mut seen = BTreeSet::new();
        for relation in &self.relations {
            relation.validate()?;
            if !seen.insert(relation.name.as_str()) {
                return Err(ModelError::InvalidSchema(format!(
                    "duplicate relation {} in source {}",
                    relation.name, self.source_id
                )));
            }
        }
        Ok(())
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSchema> {
        self.relations.iter().find(|r| r.name == name)
    }
}

/// A web service together with the sources and views it is built from and
/// the ordered list of services that may stand in for it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WebService {
    pub ws_id: String,
    pub source_ids: BTreeSet<String>,
    pub view_ids: Vec<String>,
    pub replacements: Vec<String>,
}

impl WebService {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.ws_id.is_empty() {
            return Err(ModelError::InvalidSchema("empty web service id".into()));
        }
        if self.view_ids.is_empty() {
            return Err(ModelError::InvalidSchema(format!(
                "web service {} has no views",
                self.ws_id
            )));
        }
        if self.replacements.contains(&self.ws_id) {
            return Err(ModelError::InvalidSchema(format!(
                "web service {} lists itself as a replacement",
                self.ws_id
            )));
        }
        Ok(())
    }
}

/// A schema change reported by an information source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChangeEvent {
    DeleteAttribute(AttributeRef),
    DeleteRelation(RelationRef),
}

/// A schema component named by a change event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Attribute(AttributeRef),
    Relation(RelationRef),
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Attribute(a) => a.fmt(f),
            Component::Relation(r) => r.fmt(f),
        }
    }
}

impl ChangeEvent {
    pub fn target(&self) -> Component {
        match self {
            ChangeEvent::DeleteAttribute(a) => Component::Attribute(a.clone()),
            ChangeEvent::DeleteRelation(r) => Component::Relation(r.clone()),
        }
    }

    pub fn source_id(&self) -> &str {
        match self {
            ChangeEvent::DeleteAttribute(a) => &a.source_id,
            ChangeEvent::DeleteRelation(r) => &r.source_id,
        }
    }
}

impl fmt::Display for ChangeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChangeEvent::DeleteAttribute(a) => write!(f, "delete-attribute {a}"),
            ChangeEvent::DeleteRelation(r) => write!(f, "delete-relation {r}"),
        }
    }
}

impl FromStr for ChangeEvent {
    type Err = ModelError;

    /// Parses `delete-attribute S.R.A` or `delete-relation S.R`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split_whitespace();
        let (kind, path) = match (parts.next(), parts.next(), parts.next()) {
            (Some(kind), Some(path), None) => (kind, path),
            _ => return Err(ModelError::InvalidPath(s.to_string())),
        };
        match kind {
            "delete-attribute" => Ok(ChangeEvent::DeleteAttribute(path.parse()?)),
            "delete-relation" => Ok(ChangeEvent::DeleteRelation(path.parse()?)),
            _ => Err(ModelError::InvalidPath(s.to_string())),
        }
    }
}

/// How the extent of a substitute compares to the original.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtentRelation {
    Equivalent,
    Superset,
    Subset,
    Indifferent,
}

impl ExtentRelation {
    pub const ALL: [ExtentRelation; 4] = [
        ExtentRelation::Equivalent,
        ExtentRelation::Superset,
        ExtentRelation::Subset,
        ExtentRelation::Indifferent,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            ExtentRelation::Equivalent => "≡",
            ExtentRelation::Superset => "⊇",
            ExtentRelation::Subset => "⊆",
            ExtentRelation::Indifferent => "≈",
        }
    }

    /// Accepts the set symbols plus the ASCII spellings `==`, `>=`, `<=`, `~`.
    pub fn from_symbol(symbol: &str) -> Option<Self> {
        match symbol {
            "≡" | "==" => Some(ExtentRelation::Equivalent),
            "⊇" | ">=" => Some(ExtentRelation::Superset),
            "⊆" | "<=" => Some(ExtentRelation::Subset),
            "≈" | "~" => Some(ExtentRelation::Indifferent),
            _ => None,
        }
    }

    /// Composition of two rewrite steps: `≡` is the identity, `≈` absorbs,
    /// and opposite containments meet at `≈`.
    pub fn meet(self, other: ExtentRelation) -> ExtentRelation {
        use ExtentRelation::*;
        match (self, other) {
            (Equivalent, x) | (x, Equivalent) => x,
            (Indifferent, _) | (_, Indifferent) => Indifferent,
            (Superset, Superset) => Superset,
            (Subset, Subset) => Subset,
            _ => Indifferent,
        }
    }
}

impl fmt::Display for ExtentRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// The set of registered source schemas, keyed by source id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    sources: BTreeMap<String, SourceSchema>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sources(sources: impl IntoIterator<Item = SourceSchema>) -> Result<Self, ModelError> {
        let mut catalog = Catalog::new();
        for source in sources {
            source.validate()?;
            if catalog.sources.contains_key(&source.source_id) {
                return Err(ModelError::InvalidSchema(format!(
                    "duplicate source id {}",
                    source.source_id
                )));
            }
            catalog.sources.insert(source.source_id.clone(), source);
        }
        Ok(catalog)
    }

    pub fn insert(&mut self, source: SourceSchema) -> Option<SourceSchema> {
        self.sources.insert(source.source_id.clone(), source)
    }

    pub fn source(&self, source_id: &str) -> Option<&SourceSchema> {
        self.sources.get(source_id)
    }

    pub fn sources(&self) -> impl Iterator<Item = &SourceSchema> {
        self.sources.values()
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn relation(&self, r: &RelationRef) -> Option<&RelationSchema> {
        self.source(&r.source_id)?.relation(&r.relation_name)
    }

    pub fn has_relation(&self, r: &RelationRef) -> bool {
        self.relation(r).is_some()
    }

    pub fn attribute_type(&self, a: &AttributeRef) -> Option<TypeDomain> {
        self.relation(&a.relation())?.attribute_type(&a.attribute_name)
    }

    pub fn has_attribute(&self, a: &AttributeRef) -> bool {
        self.attribute_type(a).is_some()
    }

    /// All relations in source-id then declaration order.
    pub fn relations(&self) -> impl Iterator<Item = (RelationRef, &RelationSchema)> {
        self.sources.values().flat_map(|s| {
            s.relations
                .iter()
                .map(move |r| (RelationRef::new(s.source_id.clone(), r.name.clone()), r))
        })
    }

    pub fn event_target_exists(&self, event: &ChangeEvent) -> bool {
        match event {
            ChangeEvent::DeleteAttribute(a) => self.has_attribute(a),
            ChangeEvent::DeleteRelation(r) => self.has_relation(r),
        }
    }
}

/// Returns the schemas as they stand after `event`. A relation left with no
/// attributes is removed; a source left with no relations is removed.
pub fn apply_change(schemas: &Catalog, event: &ChangeEvent) -> Result<Catalog, ModelError> {
    if !schemas.event_target_exists(event) {
        return Err(ModelError::UnknownTarget(event.target().to_string()));
    }
    let mut out = schemas.clone();
    let source = out.sources.get_mut(event.source_id()).expect("target checked above");
    match event {
        ChangeEvent::DeleteAttribute(a) => {
            let relation = source
                .relations
                .iter_mut()
                .find(|r| r.name == a.relation_name)
                .expect("target checked above");
            relation.attributes.retain(|(name, _)| *name != a.attribute_name);
            if relation.attributes.is_empty() {
                source.relations.retain(|r| r.name != a.relation_name);
            }
        }
        ChangeEvent::DeleteRelation(r) => {
            source.relations.retain(|rel| rel.name != r.relation_name);
        }
    }
    // a source needs at least one relation
    if source.relations.is_empty() {
        let id = source.source_id.clone();
        out.sources.remove(&id);
    }
    Ok(out)
}
