//! Meta knowledge base: source schemas, the substitution constraints that
//! relate them, and the web services built on top of them.
//!
//! Three constraint families are kept:
//!
//! * type integrity constraints, one per relation, fixing each attribute's
//!   domain;
//! * join constraints, conjunctions of attribute equalities between two
//!   relations;
//! * partial/complete constraints, containments between (projections of)
//!   two relations.
//!
//! Constraints are never cascade-deleted when a schema component goes away.
//! Candidate queries skip anything whose candidate side no longer exists.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::esql::{PrimitiveClause, Term};
use crate::model::{
    apply_change, AttributeRef, Catalog, ChangeEvent, ModelError, RelationRef, SourceSchema, TypeDomain, WebService,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KbError {
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("unknown attribute {0}")]
    UnknownAttribute(AttributeRef),
    #[error("unknown web service {0}")]
    UnknownWebService(String),
}

impl From<ModelError> for KbError {
    fn from(e: ModelError) -> Self {
        KbError::InvariantViolation(e.to_string())
    }
}

/// Containment `left θ right` stated by a partial/complete constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Containment {
    Subset,
    Superset,
    Equivalent,
}

impl Containment {
    pub fn inverse(self) -> Self {
        match self {
            Containment::Subset => Containment::Superset,
            Containment::Superset => Containment::Subset,
            Containment::Equivalent => Containment::Equivalent,
        }
    }

    /// Strongest containment implied by several constraints over the same pair.
    pub fn combine(thetas: impl IntoIterator<Item = Containment>) -> Option<Containment> {
        let (mut sub, mut sup, mut any) = (false, false, false);
        for theta in thetas {
            any = true;
            match theta {
                Containment::Subset => sub = true,
                Containment::Superset => sup = true,
                Containment::Equivalent => {
                    sub = true;
                    sup = true;
                }
            }
        }
        match (any, sub, sup) {
            (false, ..) => None,
            (_, true, true) => Some(Containment::Equivalent),
            (_, true, false) => Some(Containment::Subset),
            _ => Some(Containment::Superset),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Containment::Subset => "⊆",
            Containment::Superset => "⊇",
            Containment::Equivalent => "≡",
        }
    }
}

impl fmt::Display for Containment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeIntegrityConstraint {
    pub relation: RelationRef,
    pub typing: BTreeMap<String, TypeDomain>,
}

impl TypeIntegrityConstraint {
    /// The constraint a registered schema implies.
    pub fn from_schema(source_id: &str, relation: &crate::model::RelationSchema) -> Self {
        Self {
            relation: RelationRef::new(source_id, relation.name.clone()),
            typing: relation.attributes.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinConstraint {
    pub left: RelationRef,
    pub right: RelationRef,
    /// `(left attribute, right attribute)` pairs, conjoined.
    pub equalities: Vec<(String, String)>,
}

/// `π_projection(σ_selection(relation))`. Selection clauses use the relation
/// name as alias.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub relation: RelationRef,
    pub projection: Vec<String>,
    pub selection: Vec<PrimitiveClause>,
}

impl Fragment {
    pub fn projection_only(relation: RelationRef, projection: Vec<String>) -> Self {
        Self {
            relation,
            projection,
            selection: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcConstraint {
    pub left: Fragment,
    pub theta: Containment,
    pub right: Fragment,
}

impl PcConstraint {
    pub fn is_projection_only(&self) -> bool {
        self.left.selection.is_empty() && self.right.selection.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplacementRule {
    pub ws_id: String,
    pub substitutes: Vec<String>,
}

/// Anything that can be registered in the meta knowledge base.
#[derive(Debug, Clone)]
pub enum KbItem {
    Source(SourceSchema),
    TypeConstraint(TypeIntegrityConstraint),
    Join(JoinConstraint),
    PartialComplete(PcConstraint),
    Replacement(ReplacementRule),
    WebService(WebService),
}

/// A projection-only containment linking two relations, oriented from the
/// queried relation: `(theta, [(queried attr, other attr)])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcLink {
    pub theta: Containment,
    pub pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, Default)]
pub struct Wsmkb {
    catalog: Catalog,
    type_constraints: BTreeMap<RelationRef, TypeIntegrityConstraint>,
    joins: Vec<JoinConstraint>,
    pcs: Vec<PcConstraint>,
    web_services: BTreeMap<String, WebService>,
}

impl Wsmkb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, item: impl Into<KbItem>) -> Result<(), KbError> {
        match item.into() {
            KbItem::Source(s) => self.register_source(s),
            KbItem::TypeConstraint(tc) => self.register_type_constraint(tc),
            KbItem::Join(jc) => self.register_join(jc),
            KbItem::PartialComplete(pc) => self.register_pc(pc),
            KbItem::Replacement(rule) => self.register_replacement(rule),
            KbItem::WebService(ws) => self.register_web_service(ws),
        }
    }

    fn register_source(&mut self, source: SourceSchema) -> Result<(), KbError> {
        source.validate()?;
        match self.catalog.source(&source.source_id) {
            Some(existing) if *existing == source => Ok(()),
            Some(_) => {
                let previous = self.catalog.insert(source.clone());
                if let Err(e) = self.revalidate(&source.source_id) {
                    if let Some(previous) = previous {
                        self.catalog.insert(previous);
                    }
                    return Err(e);
                }
                Ok(())
            }
            None => {
                self.catalog.insert(source);
                Ok(())
            }
        }
    }

    fn revalidate(&self, source_id: &str) -> Result<(), KbError> {
        for tc in self.type_constraints.values() {
            if tc.relation.source_id == source_id {
                self.check_type_constraint(tc)?;
            }
        }
        for jc in &self.joins {
            if jc.left.source_id == source_id || jc.right.source_id == source_id {
                self.check_join(jc)?;
            }
        }
        for pc in &self.pcs {
            if pc.left.relation.source_id == source_id || pc.right.relation.source_id == source_id {
                self.check_pc(pc)?;
            }
        }
        Ok(())
    }

    fn relation_schema(&self, r: &RelationRef) -> Result<&crate::model::RelationSchema, KbError> {
        self.catalog
            .relation(r)
            .ok_or_else(|| KbError::DanglingReference(format!("relation {r} is not registered")))
    }

    fn schema_type(&self, a: &AttributeRef) -> Result<TypeDomain, KbError> {
        self.relation_schema(&a.relation())?
            .attribute_type(&a.attribute_name)
            .ok_or_else(|| KbError::DanglingReference(format!("attribute {a} is not registered")))
    }

    fn check_type_constraint(&self, tc: &TypeIntegrityConstraint) -> Result<(), KbError> {
        let schema = self.relation_schema(&tc.relation)?;
        if schema.attributes.len() != tc.typing.len() {
            return Err(KbError::InvariantViolation(format!(
                "type constraint on {} covers {} attributes, relation has {}",
                tc.relation,
                tc.typing.len(),
                schema.attributes.len()
            )));
        }
        for (name, ty) in &schema.attributes {
            match tc.typing.get(name) {
                Some(t) if t == ty => {}
                Some(t) => {
                    return Err(KbError::InvariantViolation(format!(
                        "type constraint declares {}.{name} as {t}, schema says {ty}",
                        tc.relation
                    )))
                }
                None => {
                    return Err(KbError::InvariantViolation(format!(
                        "type constraint on {} misses attribute {name}",
                        tc.relation
                    )))
                }
            }
        }
        Ok(())
    }

    fn register_type_constraint(&mut self, tc: TypeIntegrityConstraint) -> Result<(), KbError> {
        self.check_type_constraint(&tc)?;
        match self.type_constraints.get(&tc.relation) {
            Some(existing) if *existing == tc => Ok(()),
            Some(_) => Err(KbError::InvariantViolation(format!(
                "conflicting type constraint for {}",
                tc.relation
            ))),
            None => {
                self.type_constraints.insert(tc.relation.clone(), tc);
                Ok(())
            }
        }
    }

    fn check_join(&self, jc: &JoinConstraint) -> Result<(), KbError> {
        if jc.equalities.is_empty() {
            return Err(KbError::InvariantViolation(format!(
                "join constraint {} / {} has no equalities",
                jc.left, jc.right
            )));
        }
        for (l, r) in &jc.equalities {
            let la = jc.left.attribute(l.clone());
            let ra = jc.right.attribute(r.clone());
            let (lt, rt) = (self.schema_type(&la)?, self.schema_type(&ra)?);
            if lt != rt {
                return Err(KbError::InvariantViolation(format!(
                    "join equality {la} = {ra} compares {lt} with {rt}"
                )));
            }
        }
        Ok(())
    }

    fn register_join(&mut self, jc: JoinConstraint) -> Result<(), KbError> {
        self.check_join(&jc)?;
        if !self.joins.contains(&jc) {
            self.joins.push(jc);
        }
        Ok(())
    }

    fn check_fragment(&self, f: &Fragment) -> Result<Vec<TypeDomain>, KbError> {
        let schema = self.relation_schema(&f.relation)?;
        if f.projection.is_empty() {
            return Err(KbError::InvariantViolation(format!(
                "empty projection over {}",
                f.relation
            )));
        }
        let types = f
            .projection
            .iter()
            .map(|a| self.schema_type(&f.relation.attribute(a.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        for clause in &f.selection {
            for term in [&clause.lhs, &clause.rhs] {
                if let Term::Column(c) = term {
                    if c.alias != f.relation.relation_name {
                        return Err(KbError::InvariantViolation(format!(
                            "selection over {} refers to alias {}",
                            f.relation, c.alias
                        )));
                    }
                    if !schema.has_attribute(&c.attribute) {
                        return Err(KbError::DanglingReference(format!(
                            "selection attribute {}.{} is not registered",
                            f.relation, c.attribute
                        )));
                    }
                }
            }
        }
        Ok(types)
    }

    fn check_pc(&self, pc: &PcConstraint) -> Result<(), KbError> {
        let lt = self.check_fragment(&pc.left)?;
        let rt = self.check_fragment(&pc.right)?;
        if lt != rt {
            return Err(KbError::InvariantViolation(format!(
                "partial/complete constraint {} {} {} projects mismatched types",
                pc.left.relation, pc.theta, pc.right.relation
            )));
        }
        Ok(())
    }

    fn register_pc(&mut self, pc: PcConstraint) -> Result<(), KbError> {
        self.check_pc(&pc)?;
        if !self.pcs.contains(&pc) {
            self.pcs.push(pc);
        }
        Ok(())
    }

    fn register_web_service(&mut self, ws: WebService) -> Result<(), KbError> {
        ws.validate()?;
        for source in &ws.source_ids {
            if self.catalog.source(source).is_none() {
                return Err(KbError::DanglingReference(format!(
                    "web service {} uses unregistered source {source}",
                    ws.ws_id
                )));
            }
        }
        for sub in &ws.replacements {
            if !self.web_services.contains_key(sub) {
                return Err(KbError::DanglingReference(format!(
                    "web service {} names unregistered replacement {sub}",
                    ws.ws_id
                )));
            }
        }
        match self.web_services.get(&ws.ws_id) {
            Some(existing) if *existing == ws => Ok(()),
            Some(_) => Err(KbError::InvariantViolation(format!(
                "conflicting registration of web service {}",
                ws.ws_id
            ))),
            None => {
                self.web_services.insert(ws.ws_id.clone(), ws);
                Ok(())
            }
        }
    }

    fn register_replacement(&mut self, rule: ReplacementRule) -> Result<(), KbError> {
        if !self.web_services.contains_key(&rule.ws_id) {
            return Err(KbError::DanglingReference(format!(
                "replacement rule for unregistered web service {}",
                rule.ws_id
            )));
        }
        let mut seen = BTreeSet::new();
        for sub in &rule.substitutes {
            if *sub == rule.ws_id {
                return Err(KbError::InvariantViolation(format!(
                    "web service {} cannot replace itself",
                    rule.ws_id
                )));
            }
            if !self.web_services.contains_key(sub) {
                return Err(KbError::DanglingReference(format!(
                    "replacement rule for {} names unregistered web service {sub}",
                    rule.ws_id
                )));
            }
            if !seen.insert(sub) {
                return Err(KbError::InvariantViolation(format!(
                    "replacement rule for {} lists {sub} twice",
                    rule.ws_id
                )));
            }
        }
        let ws = self.web_services.get_mut(&rule.ws_id).expect("checked above");
        ws.replacements = rule.substitutes;
        Ok(())
    }

    /// Materializes a schema change. Constraints are kept as they are.
    pub fn apply_change(&mut self, event: &ChangeEvent) -> Result<(), ModelError> {
        self.catalog = apply_change(&self.catalog, event)?;
        Ok(())
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn type_constraints(&self) -> impl Iterator<Item = &TypeIntegrityConstraint> {
        self.type_constraints.values()
    }

    pub fn join_constraints(&self) -> &[JoinConstraint] {
        &self.joins
    }

    pub fn pc_constraints(&self) -> &[PcConstraint] {
        &self.pcs
    }

    pub fn web_services(&self) -> impl Iterator<Item = &WebService> {
        self.web_services.values()
    }

    pub fn web_service(&self, ws_id: &str) -> Option<&WebService> {
        self.web_services.get(ws_id)
    }

    /// Declared domain of `a`, from its relation's type integrity constraint.
    /// Still answers after `a` has been deleted from the schema.
    pub fn attribute_type(&self, a: &AttributeRef) -> Result<TypeDomain, KbError> {
        self.type_constraints
            .get(&a.relation())
            .and_then(|tc| tc.typing.get(&a.attribute_name))
            .copied()
            .ok_or_else(|| KbError::UnknownAttribute(a.clone()))
    }

    /// Attributes joined to `a` by a join-constraint equality (either
    /// orientation) with the same declared type, excluding `a` and anything
    /// no longer in the schema.
    pub fn candidate_substitute_attributes(&self, a: &AttributeRef) -> BTreeSet<AttributeRef> {
        let Ok(ty) = self.attribute_type(a) else {
            return BTreeSet::new();
        };
        let mut out = BTreeSet::new();
        for jc in &self.joins {
            for (l, r) in &jc.equalities {
                let la = jc.left.attribute(l.clone());
                let ra = jc.right.attribute(r.clone());
                let other = if la == *a {
                    ra
                } else if ra == *a {
                    la
                } else {
                    continue;
                };
                if other != *a && self.catalog.has_attribute(&other) && self.attribute_type(&other).ok() == Some(ty) {
                    out.insert(other);
                }
            }
        }
        out
    }

    /// Relations linked to `r` by a projection-only partial/complete
    /// constraint, with the containment read as `r θ s`.
    pub fn candidate_substitute_relations(&self, r: &RelationRef) -> BTreeSet<(RelationRef, Containment)> {
        let mut out = BTreeSet::new();
        for pc in &self.pcs {
            if !pc.is_projection_only() {
                continue;
            }
            let (other, theta) = if pc.left.relation == *r {
                (&pc.right, pc.theta)
            } else if pc.right.relation == *r {
                (&pc.left, pc.theta.inverse())
            } else {
                continue;
            };
            if other.relation != *r && self.fragment_exists(other) {
                out.insert((other.relation.clone(), theta));
            }
        }
        out
    }

    fn fragment_exists(&self, f: &Fragment) -> bool {
        self.catalog
            .relation(&f.relation)
            .is_some_and(|schema| f.projection.iter().all(|a| schema.has_attribute(a)))
    }

    /// Projection-only containments between `r` and `s`, oriented from `r`,
    /// in registration order. Only constraints whose `s` side still exists.
    pub fn pc_links(&self, r: &RelationRef, s: &RelationRef) -> Vec<PcLink> {
        let mut out = Vec::new();
        for pc in &self.pcs {
            if !pc.is_projection_only() {
                continue;
            }
            let (mine, other, theta) = if pc.left.relation == *r && pc.right.relation == *s {
                (&pc.left, &pc.right, pc.theta)
            } else if pc.right.relation == *r && pc.left.relation == *s {
                (&pc.right, &pc.left, pc.theta.inverse())
            } else {
                continue;
            };
            if !self.fragment_exists(other) {
                continue;
            }
            out.push(PcLink {
                theta,
                pairs: mine
                    .projection
                    .iter()
                    .cloned()
                    .zip(other.projection.iter().cloned())
                    .collect(),
            });
        }
        out
    }

    /// Join-constraint equalities between `r` and `s`, oriented `(r attr, s
    /// attr)`, in registration order.
    pub fn join_equalities(&self, r: &RelationRef, s: &RelationRef) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for jc in &self.joins {
            if jc.left == *r && jc.right == *s {
                out.extend(jc.equalities.iter().cloned());
            } else if jc.right == *r && jc.left == *s {
                out.extend(jc.equalities.iter().map(|(l, r)| (r.clone(), l.clone())));
            }
        }
        out
    }

    pub fn replacement_chain(&self, ws_id: &str) -> Result<Vec<String>, KbError> {
        self.web_services
            .get(ws_id)
            .map(|ws| ws.replacements.clone())
            .ok_or_else(|| KbError::UnknownWebService(ws_id.to_string()))
    }
}

impl From<SourceSchema> for KbItem {
    fn from(s: SourceSchema) -> Self {
        KbItem::Source(s)
    }
}

impl From<TypeIntegrityConstraint> for KbItem {
    fn from(tc: TypeIntegrityConstraint) -> Self {
        KbItem::TypeConstraint(tc)
    }
}

impl From<JoinConstraint> for KbItem {
    fn from(jc: JoinConstraint) -> Self {
        KbItem::Join(jc)
    }
}

impl From<PcConstraint> for KbItem {
    fn from(pc: PcConstraint) -> Self {
        KbItem::PartialComplete(pc)
    }
}

impl From<ReplacementRule> for KbItem {
    fn from(rule: ReplacementRule) -> Self {
        KbItem::Replacement(rule)
    }
}

impl From<WebService> for KbItem {
    fn from(ws: WebService) -> Self {
        KbItem::WebService(ws)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RelationSchema, TypeDomain::*};

    fn rel(name: &str, attrs: &[(&str, TypeDomain)]) -> RelationSchema {
        RelationSchema::new(name, attrs.iter().map(|(n, t)| (n.to_string(), *t)).collect()).unwrap()
    }

    fn r(s: &str) -> RelationRef {
        s.parse().unwrap()
    }

    fn a(s: &str) -> AttributeRef {
        s.parse().unwrap()
    }

    /// A cut-down slice of the healthcare knowledge base.
    fn kb() -> Wsmkb {
        let mut kb = Wsmkb::new();
        let doctor = |extra: bool| {
            let mut attrs = vec![("IdD", Number), ("Name", String), ("Speciality", String)];
            if extra {
                attrs.push(("IdS", Number));
            }
            rel("Doctor", &attrs)
        };
        let hospital = rel(
            "Hospital",
            &[("IdH", Number), ("Name", String), ("Localization", String)],
        );
        let patient = rel(
            "Patient",
            &[("IdP", Number), ("Name", String), ("Age", Number), ("Tel", Number)],
        );
        let service = rel("Service", &[("IdS", Number), ("Speciality", String)]);
        kb.register(SourceSchema::new("S1", vec![patient.clone(), doctor(false), hospital.clone()]).unwrap())
            .unwrap();
        kb.register(
            SourceSchema::new(
                "S2",
                vec![patient.clone(), doctor(true), hospital.clone(), service.clone()],
            )
            .unwrap(),
        )
        .unwrap();
        kb.register(SourceSchema::new("S3", vec![patient, doctor(true), hospital, service]).unwrap())
            .unwrap();
        let sources: Vec<_> = kb.catalog().sources().cloned().collect();
        for s in sources {
            for relation in &s.relations {
                kb.register(TypeIntegrityConstraint::from_schema(&s.source_id, relation))
                    .unwrap();
            }
        }
        for (l, rr, attr) in [
            ("S1.Patient", "S2.Patient", "Name"),
            ("S1.Patient", "S3.Patient", "Name"),
            ("S1.Doctor", "S2.Doctor", "Name"),
            ("S1.Doctor", "S3.Doctor", "Name"),
            ("S1.Hospital", "S3.Hospital", "Localization"),
        ] {
            kb.register(JoinConstraint {
                left: r(l),
                right: r(rr),
                equalities: vec![(attr.into(), attr.into())],
            })
            .unwrap();
        }
        let proj = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        kb.register(PcConstraint {
            left: Fragment::projection_only(r("S1.Hospital"), proj(&["IdH", "Name", "Localization"])),
            theta: Containment::Superset,
            right: Fragment::projection_only(r("S2.Hospital"), proj(&["IdH", "Name", "Localization"])),
        })
        .unwrap();
        kb.register(PcConstraint {
            left: Fragment::projection_only(r("S2.Service"), proj(&["IdS", "Speciality"])),
            theta: Containment::Superset,
            right: Fragment::projection_only(r("S3.Service"), proj(&["IdS", "Speciality"])),
        })
        .unwrap();
        kb
    }

    #[test]
    fn attribute_types() {
        let kb = kb();
        assert_eq!(kb.attribute_type(&a("S1.Patient.Age")), Ok(Number));
        assert_eq!(kb.attribute_type(&a("S2.Service.Speciality")), Ok(String));
        assert!(matches!(
            kb.attribute_type(&a("S1.Patient.Nonexistent")),
            Err(KbError::UnknownAttribute(_))
        ));
    }

    #[test]
    fn attribute_candidates() {
        let kb = kb();
        assert_eq!(
            kb.candidate_substitute_attributes(&a("S1.Doctor.Name")),
            [a("S2.Doctor.Name"), a("S3.Doctor.Name")].into_iter().collect()
        );
        assert!(kb.candidate_substitute_attributes(&a("S1.Patient.Tel")).is_empty());
        assert_eq!(
            kb.candidate_substitute_attributes(&a("S2.Doctor.Name")),
            [a("S1.Doctor.Name")].into_iter().collect()
        );
    }

    #[test]
    fn relation_candidates_are_oriented() {
        let kb = kb();
        assert_eq!(
            kb.candidate_substitute_relations(&r("S1.Hospital")),
            [(r("S2.Hospital"), Containment::Superset)].into_iter().collect()
        );
        assert!(kb.candidate_substitute_relations(&r("S1.Doctor")).is_empty());
        assert_eq!(
            kb.candidate_substitute_relations(&r("S3.Service")),
            [(r("S2.Service"), Containment::Subset)].into_iter().collect()
        );
    }

    #[test]
    fn stale_candidates_are_skipped() {
        let mut kb = kb();
        kb.apply_change(&ChangeEvent::DeleteRelation(r("S2.Hospital"))).unwrap();
        assert!(kb.candidate_substitute_relations(&r("S1.Hospital")).is_empty());
        kb.apply_change(&ChangeEvent::DeleteAttribute(a("S2.Doctor.Name")))
            .unwrap();
        assert_eq!(
            kb.candidate_substitute_attributes(&a("S1.Doctor.Name")),
            [a("S3.Doctor.Name")].into_iter().collect()
        );
        // the deleted attribute's type stays known
        assert_eq!(kb.attribute_type(&a("S2.Doctor.Name")), Ok(String));
    }

    #[test]
    fn join_type_mismatch_rejected() {
        let mut kb = kb();
        let err = kb
            .register(JoinConstraint {
                left: r("S1.Patient"),
                right: r("S1.Patient"),
                equalities: vec![("Age".into(), "Name".into())],
            })
            .unwrap_err();
        assert!(matches!(err, KbError::InvariantViolation(_)));
    }

    #[test]
    fn dangling_references_rejected() {
        let mut kb = Wsmkb::new();
        let err = kb
            .register(PcConstraint {
                left: Fragment::projection_only(r("S1.Hospital"), vec!["IdH".into()]),
                theta: Containment::Superset,
                right: Fragment::projection_only(r("S2.Hospital"), vec!["IdH".into()]),
            })
            .unwrap_err();
        assert!(matches!(err, KbError::DanglingReference(_)));
        let mut kb = self::kb();
        let err = kb
            .register(JoinConstraint {
                left: r("S1.Doctor"),
                right: r("S2.Doctor"),
                equalities: vec![("Salary".into(), "Name".into())],
            })
            .unwrap_err();
        assert!(matches!(err, KbError::DanglingReference(_)));
    }

    #[test]
    fn duplicate_registration_is_noop() {
        let mut kb = kb();
        let before = kb.join_constraints().len();
        kb.register(JoinConstraint {
            left: r("S1.Doctor"),
            right: r("S2.Doctor"),
            equalities: vec![("Name".into(), "Name".into())],
        })
        .unwrap();
        assert_eq!(kb.join_constraints().len(), before);
        let s1 = kb.catalog().source("S1").unwrap().clone();
        kb.register(s1).unwrap();
    }

    #[test]
    fn source_reregistration_revalidates() {
        let mut kb = kb();
        let changed = SourceSchema::new(
            "S1",
            vec![rel(
                "Doctor",
                &[("IdD", Number), ("Name", Number), ("Speciality", String)],
            )],
        )
        .unwrap();
        assert!(kb.register(changed).is_err());
        // rolled back
        assert_eq!(kb.catalog().attribute_type(&a("S1.Doctor.Name")), Some(String));
    }

    #[test]
    fn pc_projection_types_must_match() {
        let mut kb = kb();
        let err = kb
            .register(PcConstraint {
                left: Fragment::projection_only(r("S1.Patient"), vec!["Age".into()]),
                theta: Containment::Subset,
                right: Fragment::projection_only(r("S2.Patient"), vec!["Name".into()]),
            })
            .unwrap_err();
        assert!(matches!(err, KbError::InvariantViolation(_)));
    }

    #[test]
    fn selection_pcs_are_stored_but_not_candidates() {
        let mut kb = kb();
        kb.register(PcConstraint {
            left: Fragment {
                relation: r("S1.Patient"),
                projection: vec!["IdP".into()],
                selection: vec![crate::esql::parse_clause("Age > 60", "Patient").unwrap()],
            },
            theta: Containment::Subset,
            right: Fragment::projection_only(r("S3.Patient"), vec!["IdP".into()]),
        })
        .unwrap();
        assert_eq!(kb.pc_constraints().len(), 3);
        assert!(kb.candidate_substitute_relations(&r("S1.Patient")).is_empty());
    }

    #[test]
    fn replacement_chains() {
        let mut kb = kb();
        for id in ["WS3", "WS2", "WS1"] {
            kb.register(WebService {
                ws_id: id.into(),
                source_ids: ["S1".to_string()].into_iter().collect(),
                view_ids: vec!["V".into()],
                replacements: vec![],
            })
            .unwrap();
        }
        kb.register(ReplacementRule {
            ws_id: "WS1".into(),
            substitutes: vec!["WS2".into(), "WS3".into()],
        })
        .unwrap();
        kb.register(ReplacementRule {
            ws_id: "WS2".into(),
            substitutes: vec!["WS3".into()],
        })
        .unwrap();
        assert_eq!(kb.replacement_chain("WS1").unwrap(), ["WS2", "WS3"]);
        assert_eq!(kb.replacement_chain("WS2").unwrap(), ["WS3"]);
        assert!(kb.replacement_chain("WS3").unwrap().is_empty());
        assert!(matches!(
            kb.replacement_chain("WS9"),
            Err(KbError::UnknownWebService(_))
        ));
        assert!(kb
            .register(ReplacementRule {
                ws_id: "WS3".into(),
                substitutes: vec!["WS3".into()],
            })
            .is_err());
    }

    #[test]
    fn containment_combination() {
        use Containment::*;
        assert_eq!(Containment::combine([]), None);
        assert_eq!(Containment::combine([Subset]), Some(Subset));
        assert_eq!(Containment::combine([Subset, Superset]), Some(Equivalent));
        assert_eq!(Containment::combine([Superset, Superset]), Some(Superset));
        for t in [Subset, Superset, Equivalent] {
            assert_eq!(t.inverse().inverse(), t);
        }
    }
}
