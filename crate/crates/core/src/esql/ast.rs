use std::fmt;

use chrono::NaiveDate;
use ordered_float::NotNan;

use crate::model::{AttributeRef, Component, ExtentRelation, RelationRef, TypeDomain};

/// Dispensable / replaceable flags attached to a view component.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvolutionParams {
    pub dispensable: bool,
    pub replaceable: bool,
}

impl EvolutionParams {
    pub const fn new(dispensable: bool, replaceable: bool) -> Self {
        Self {
            dispensable,
            replaceable,
        }
    }

    pub fn is_default(&self) -> bool {
        !self.dispensable && !self.replaceable
    }
}

/// Which component an evolution parameter group belongs to; decides the
/// keyword pair (`AD/AR`, `RD/RR`, `CD/CR`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Attribute,
    Relation,
    Condition,
}

impl ComponentKind {
    pub fn keywords(self) -> (&'static str, &'static str) {
        match self {
            ComponentKind::Attribute => ("AD", "AR"),
            ComponentKind::Relation => ("RD", "RR"),
            ComponentKind::Condition => ("CD", "CR"),
        }
    }
}

/// An alias-qualified attribute, `D.Name`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub alias: String,
    pub attribute: String,
}

impl ColumnRef {
    pub fn new(alias: impl Into<String>, attribute: impl Into<String>) -> Self {
        Self {
            alias: alias.into(),
            attribute: attribute.into(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.alias, self.attribute)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SelectItem {
    pub column: ColumnRef,
    pub params: EvolutionParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FromItem {
    pub relation: RelationRef,
    pub alias: String,
    pub params: EvolutionParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Column(ColumnRef),
    Number(NotNan<f64>),
    String(String),
    Date(NaiveDate),
}

impl Term {
    pub fn column(&self) -> Option<&ColumnRef> {
        match self {
            Term::Column(c) => Some(c),
            _ => None,
        }
    }

    /// Type of a literal term; `None` for columns.
    pub fn literal_type(&self) -> Option<TypeDomain> {
        match self {
            Term::Column(_) => None,
            Term::Number(_) => Some(TypeDomain::Number),
            Term::String(_) => Some(TypeDomain::String),
            Term::Date(_) => Some(TypeDomain::Date),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    pub const ALL: [Comparator; 6] = [
        Comparator::Eq,
        Comparator::Ne,
        Comparator::Lt,
        Comparator::Le,
        Comparator::Gt,
        Comparator::Ge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "<>",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }
}

/// `lhs op rhs` with its `(CD, CR)` flags.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveClause {
    pub lhs: Term,
    pub op: Comparator,
    pub rhs: Term,
    pub params: EvolutionParams,
}

impl PrimitiveClause {
    pub fn columns(&self) -> impl Iterator<Item = &ColumnRef> {
        self.lhs.column().into_iter().chain(self.rhs.column())
    }

    pub fn mentions_alias(&self, alias: &str) -> bool {
        self.columns().any(|c| c.alias == alias)
    }
}

/// A parsed `CREATE VIEW` statement. The WHERE list is a conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ViewDefinition {
    pub name: String,
    pub column_list: Option<Vec<String>>,
    pub ve: ExtentRelation,
    pub select: Vec<SelectItem>,
    pub from: Vec<FromItem>,
    pub where_clause: Vec<PrimitiveClause>,
}

impl ViewDefinition {
    pub fn from_item(&self, alias: &str) -> Option<&FromItem> {
        self.from.iter().find(|f| f.alias == alias)
    }

    /// Aliases bound to `relation`, in FROM order.
    pub fn aliases_of<'a>(&'a self, relation: &'a RelationRef) -> impl Iterator<Item = &'a str> + 'a {
        self.from
            .iter()
            .filter(move |f| f.relation == *relation)
            .map(|f| f.alias.as_str())
    }

    /// Every column mentioned in SELECT or WHERE.
    pub fn columns(&self) -> impl Iterator<Item = &ColumnRef> {
        self.select
            .iter()
            .map(|s| &s.column)
            .chain(self.where_clause.iter().flat_map(|c| c.columns()))
    }

    /// True when `column` denotes attribute `a` through an alias bound to
    /// `a`'s relation.
    pub fn column_denotes(&self, column: &ColumnRef, a: &AttributeRef) -> bool {
        column.attribute == a.attribute_name
            && self
                .from_item(&column.alias)
                .is_some_and(|f| f.relation.source_id == a.source_id && f.relation.relation_name == a.relation_name)
    }

    pub fn references_relation(&self, r: &RelationRef) -> bool {
        self.from.iter().any(|f| f.relation == *r)
    }

    /// True when SELECT or WHERE mention `a`.
    pub fn references_attribute(&self, a: &AttributeRef) -> bool {
        self.columns().any(|c| self.column_denotes(c, a))
    }

    pub fn references(&self, target: &Component) -> bool {
        match target {
            Component::Attribute(a) => self.references_attribute(a),
            Component::Relation(r) => self.references_relation(r),
        }
    }
}
