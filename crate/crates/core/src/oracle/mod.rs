//! Brute-force reference for the synchronization engine.
//!
//! For a view and a deletion it tries every attribute or relation in the
//! post-event schemas as a substitute, keeps those that are legal, and
//! returns the outcome each one leads to. Only the stored facts of the
//! knowledge base are read (schemas, join equalities, containments); the
//! legality rules, extent table, ranking and rewriting are implemented here
//! again from scratch.

mod generate;

pub use generate::{generate_instance, InstanceSpec};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::esql::{ColumnRef, Comparator, EvolutionParams, FromItem, PrimitiveClause, Term, ViewDefinition};
use crate::model::{apply_change, AttributeRef, Catalog, ChangeEvent, ExtentRelation, RelationRef, TypeDomain};
use crate::sync::{Dropped, ViewOutcome};
use crate::wsmkb::{Containment, Wsmkb};

const FAILED: &str = "Web service can't be synchronized";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds bounds: {0}")]
    BoundsExceeded(String),
    #[error("unknown target {0}")]
    UnknownTarget(String),
}

/// Preference of an outcome: lower is better. `candidate` names the
/// substitute as `[source, relation]` or `[source, relation, attribute]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RankKey {
    pub class: u8,
    pub candidate: Vec<String>,
}

/// One reachable outcome; `key` is `None` when no substitute was used.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ranked {
    pub key: Option<RankKey>,
    pub outcome: ViewOutcome,
}

struct Pc {
    left: RelationRef,
    left_proj: Vec<String>,
    theta: Containment,
    right: RelationRef,
    right_proj: Vec<String>,
}

struct World {
    before: Catalog,
    after: Catalog,
    /// Every join equality as an attribute pair, in registration order.
    equalities: Vec<(AttributeRef, AttributeRef)>,
    /// Projection-only containments.
    pcs: Vec<Pc>,
}

impl World {
    fn new(kb: &Wsmkb, event: &ChangeEvent) -> Result<Self, OracleError> {
        let before = kb.catalog().clone();
        let after = apply_change(&before, event).map_err(|_| OracleError::UnknownTarget(event.target().to_string()))?;
        let equalities = kb
            .join_constraints()
            .iter()
            .flat_map(|jc| {
                jc.equalities
                    .iter()
                    .map(|(l, r)| (jc.left.attribute(l.clone()), jc.right.attribute(r.clone())))
            })
            .collect();
        let pcs = kb
            .pc_constraints()
            .iter()
            .filter(|pc| pc.left.selection.is_empty() && pc.right.selection.is_empty())
            .map(|pc| Pc {
                left: pc.left.relation.clone(),
                left_proj: pc.left.projection.clone(),
                theta: pc.theta,
                right: pc.right.relation.clone(),
                right_proj: pc.right.projection.clone(),
            })
            .collect();
        Ok(World {
            before,
            after,
            equalities,
            pcs,
        })
    }

    fn joined(&self, x: &AttributeRef, y: &AttributeRef) -> bool {
        self.equalities
            .iter()
            .any(|(l, r)| (l == x && r == y) || (l == y && r == x))
    }

    /// `(x attr, y attr)` join pairs between two relations, registration order.
    fn join_pairs(&self, x: &RelationRef, y: &RelationRef) -> Vec<(String, String)> {
        // Equalities of one constraint share their relations, so scanning the
        // flattened list keeps constraint order.
        let mut out = Vec::new();
        for (l, r) in &self.equalities {
            if l.relation() == *x && r.relation() == *y {
                out.push((l.attribute_name.clone(), r.attribute_name.clone()));
            } else if r.relation() == *x && l.relation() == *y {
                out.push((r.attribute_name.clone(), l.attribute_name.clone()));
            }
        }
        out
    }

    /// Containments between `x` and `y` read as `x θ y`, with attribute
    /// pairs, where `y`'s side still exists.
    fn containments(&self, x: &RelationRef, y: &RelationRef) -> Vec<(Containment, Vec<(String, String)>)> {
        let y_alive = |proj: &[String]| proj.iter().all(|a| self.after.has_attribute(&y.attribute(a.clone())));
        let mut out = Vec::new();
        for pc in &self.pcs {
            if pc.left == *x && pc.right == *y && y_alive(&pc.right_proj) {
                out.push((pc.theta, zip(&pc.left_proj, &pc.right_proj)));
            } else if pc.right == *x && pc.left == *y && y_alive(&pc.left_proj) {
                let flipped = match pc.theta {
                    Containment::Subset => Containment::Superset,
                    Containment::Superset => Containment::Subset,
                    Containment::Equivalent => Containment::Equivalent,
                };
                out.push((flipped, zip(&pc.right_proj, &pc.left_proj)));
            }
        }
        out
    }

    /// `(x ⊆ y known, x ⊇ y known)`.
    fn containment_facts(&self, x: &RelationRef, y: &RelationRef) -> Option<(bool, bool)> {
        let all = self.containments(x, y);
        if all.is_empty() {
            return None;
        }
        let sub = all
            .iter()
            .any(|(t, _)| matches!(t, Containment::Subset | Containment::Equivalent));
        let sup = all
            .iter()
            .any(|(t, _)| matches!(t, Containment::Superset | Containment::Equivalent));
        Some((sub, sup))
    }
}

fn zip(a: &[String], b: &[String]) -> Vec<(String, String)> {
    a.iter().cloned().zip(b.iter().cloned()).collect()
}

fn accepts(ve: ExtentRelation, extent: ExtentRelation) -> bool {
    use ExtentRelation::*;
    matches!(
        (ve, extent),
        (Indifferent, _) | (_, Equivalent) | (Superset, Superset) | (Subset, Subset)
    )
}

fn class(extent: ExtentRelation, ve: ExtentRelation) -> u8 {
    use ExtentRelation::*;
    if extent == Equivalent {
        0
    } else if extent == Indifferent {
        2
    } else if ve == Indifferent || ve == extent {
        1
    } else {
        2
    }
}

fn compose(extents: &[ExtentRelation]) -> ExtentRelation {
    extents.iter().fold(ExtentRelation::Equivalent, |acc, e| acc.meet(*e))
}

fn check_bounds(kb: &Wsmkb, view: &ViewDefinition, spec: &InstanceSpec) -> Result<(), OracleError> {
    let catalog = kb.catalog();
    let too_many = |what: &str, n: usize, max: usize| {
        if n > max {
            Err(OracleError::BoundsExceeded(format!("{n} {what}, at most {max}")))
        } else {
            Ok(())
        }
    };
    too_many("sources", catalog.len(), spec.sources)?;
    for s in catalog.sources() {
        too_many("relations in a source", s.relations.len(), spec.relations_per_source)?;
        for r in &s.relations {
            too_many(
                "attributes in a relation",
                r.attributes.len(),
                spec.attributes_per_relation,
            )?;
        }
    }
    too_many("join constraints", kb.join_constraints().len(), spec.join_constraints)?;
    too_many(
        "partial/complete constraints",
        kb.pc_constraints().len(),
        spec.pc_constraints,
    )?;
    too_many("conditions in a view", view.where_clause.len(), spec.clauses_per_view)
}

/// Every outcome reachable for `view` under `event`, evaluated against the
/// stores as they were before the event.
pub fn enumerate_outcomes(
    kb: &Wsmkb,
    view: &ViewDefinition,
    event: &ChangeEvent,
    spec: &InstanceSpec,
) -> Result<BTreeSet<Ranked>, OracleError> {
    check_bounds(kb, view, spec)?;
    let world = World::new(kb, event)?;
    Ok(match event {
        ChangeEvent::DeleteAttribute(a) => attribute_outcomes(&world, view, a),
        ChangeEvent::DeleteRelation(r) => relation_outcomes(&world, view, r),
    })
}

fn failed() -> ViewOutcome {
    ViewOutcome::Failed {
        message: FAILED.to_string(),
    }
}

fn next_alias(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut n = 2;
    while used.contains(&format!("{base}{n}")) {
        n += 1;
    }
    let alias = format!("{base}{n}");
    used.insert(alias.clone());
    alias
}

fn well_formed(catalog: &Catalog, view: &ViewDefinition) -> bool {
    let mut bound: BTreeMap<&str, &RelationRef> = BTreeMap::new();
    for f in &view.from {
        if !catalog.has_relation(&f.relation) || bound.insert(&f.alias, &f.relation).is_some() {
            return false;
        }
    }
    let ty = |t: &Term| -> Option<TypeDomain> {
        match t {
            Term::Column(c) => catalog.attribute_type(&bound.get(c.alias.as_str())?.attribute(c.attribute.clone())),
            Term::Number(_) => Some(TypeDomain::Number),
            Term::String(_) => Some(TypeDomain::String),
            Term::Date(_) => Some(TypeDomain::Date),
        }
    };
    !view.select.is_empty()
        && view.column_list.as_ref().is_none_or(|c| c.len() == view.select.len())
        && view
            .select
            .iter()
            .all(|s| ty(&Term::Column(s.column.clone())).is_some())
        && view.where_clause.iter().all(|c| {
            let (l, r) = (ty(&c.lhs), ty(&c.rhs));
            l.is_some() && l == r && (c.lhs.column().is_some() || c.rhs.column().is_some())
        })
}

/// Result of a rewrite under construction, with each removed component's
/// original position for ordering.
struct Draft {
    view: ViewDefinition,
    extents: Vec<ExtentRelation>,
    removed: Vec<(u8, usize, Dropped)>,
}

impl Draft {
    fn seal(mut self, catalog: &Catalog, ve: ExtentRelation) -> ViewOutcome {
        let extent = compose(&self.extents);
        if self.view.select.is_empty() || !accepts(ve, extent) || !well_formed(catalog, &self.view) {
            return failed();
        }
        self.removed.sort_by_key(|(kind, pos, _)| (*kind, *pos));
        ViewOutcome::Rewritten {
            view: self.view,
            extent,
            dropped: self.removed.into_iter().map(|(_, _, d)| d).collect(),
        }
    }
}

// ---- attribute deletion ----------------------------------------------------

struct AttrSub {
    b: AttributeRef,
    extent: ExtentRelation,
    link: (String, String),
}

fn attribute_outcomes(world: &World, view: &ViewDefinition, a: &AttributeRef) -> BTreeSet<Ranked> {
    let hits = |c: &ColumnRef| {
        c.attribute == a.attribute_name
            && view
                .from
                .iter()
                .any(|f| f.alias == c.alias && f.relation == a.relation())
    };
    if !view.columns().any(hits) {
        return [Ranked {
            key: None,
            outcome: ViewOutcome::Unchanged,
        }]
        .into();
    }
    let r = a.relation();
    let ty = world.before.attribute_type(a);
    let mut legal = Vec::new();
    for (s, schema) in world.after.relations() {
        if s == r {
            continue;
        }
        for (name, bty) in &schema.attributes {
            let b = s.attribute(name.clone());
            if Some(*bty) != ty || !world.joined(a, &b) {
                continue;
            }
            let extent = match world.containment_facts(&r, &s) {
                None => ExtentRelation::Indifferent,
                Some((true, _)) => ExtentRelation::Equivalent,
                Some((false, _)) => ExtentRelation::Subset,
            };
            if !accepts(view.ve, extent) {
                continue;
            }
            let ok = |(x, y): &(String, String)| {
                *x != a.attribute_name
                    && world.after.has_attribute(&r.attribute(x.clone()))
                    && world.after.has_attribute(&s.attribute(y.clone()))
            };
            let link = world
                .containments(&r, &s)
                .into_iter()
                .flat_map(|(_, pairs)| pairs)
                .find(ok)
                .or_else(|| world.join_pairs(&r, &s).into_iter().find(ok));
            if let Some(link) = link {
                legal.push(AttrSub { b, extent, link });
            }
        }
    }
    if legal.is_empty() {
        return [Ranked {
            key: None,
            outcome: rewrite_attribute(world, view, &hits, None),
        }]
        .into();
    }
    legal
        .iter()
        .map(|sub| Ranked {
            key: Some(RankKey {
                class: class(sub.extent, view.ve),
                candidate: vec![
                    sub.b.source_id.clone(),
                    sub.b.relation_name.clone(),
                    sub.b.attribute_name.clone(),
                ],
            }),
            outcome: rewrite_attribute(world, view, &hits, Some(sub)),
        })
        .collect()
}

fn rewrite_attribute(
    world: &World,
    view: &ViewDefinition,
    hits: &dyn Fn(&ColumnRef) -> bool,
    sub: Option<&AttrSub>,
) -> ViewOutcome {
    // decide every occurrence: Some(true) substitute, Some(false) drop
    let decide = |p: EvolutionParams| -> Option<bool> {
        if p.replaceable && sub.is_some() {
            Some(true)
        } else if p.dispensable {
            Some(false)
        } else {
            None
        }
    };
    let mut select_plan = Vec::new();
    for item in &view.select {
        select_plan.push(if hits(&item.column) {
            match decide(item.params) {
                Some(x) => Some(x),
                None => return failed(),
            }
        } else {
            None
        });
    }
    let mut where_plan = Vec::new();
    for clause in &view.where_clause {
        where_plan.push(if clause.columns().any(hits) {
            match decide(clause.params) {
                Some(x) => Some(x),
                None => return failed(),
            }
        } else {
            None
        });
    }
    let mut touched = BTreeSet::new();
    for (item, plan) in view.select.iter().zip(&select_plan) {
        if *plan == Some(true) {
            touched.insert(item.column.alias.clone());
        }
    }
    for (clause, plan) in view.where_clause.iter().zip(&where_plan) {
        if *plan == Some(true) {
            touched.extend(clause.columns().filter(|c| hits(c)).map(|c| c.alias.clone()));
        }
    }
    let mut used: BTreeSet<String> = view.from.iter().map(|f| f.alias.clone()).collect();
    let mut renamed = BTreeMap::new();
    for f in &view.from {
        if touched.contains(&f.alias) {
            renamed.insert(f.alias.clone(), next_alias(&f.alias, &mut used));
        }
    }
    let retarget = |c: &ColumnRef| match (sub, hits(c)) {
        (Some(sub), true) => ColumnRef::new(renamed[&c.alias].clone(), sub.b.attribute_name.clone()),
        _ => c.clone(),
    };

    let mut draft = Draft {
        view: ViewDefinition {
            select: Vec::new(),
            where_clause: Vec::new(),
            column_list: view.column_list.as_ref().map(|_| Vec::new()),
            ..view.clone()
        },
        extents: Vec::new(),
        removed: Vec::new(),
    };
    for (i, (item, plan)) in view.select.iter().zip(&select_plan).enumerate() {
        if *plan == Some(false) {
            draft.extents.push(ExtentRelation::Indifferent);
            draft.removed.push((1, i, Dropped::Attribute(item.clone())));
            continue;
        }
        let mut kept = item.clone();
        if *plan == Some(true) {
            kept.column = retarget(&item.column);
        }
        draft.view.select.push(kept);
        if let (Some(out), Some(cols)) = (draft.view.column_list.as_mut(), view.column_list.as_ref()) {
            out.push(cols[i].clone());
        }
    }
    for (i, (clause, plan)) in view.where_clause.iter().zip(&where_plan).enumerate() {
        match plan {
            Some(false) => {
                draft.extents.push(ExtentRelation::Superset);
                draft.removed.push((2, i, Dropped::Clause(clause.clone())));
            }
            Some(true) => {
                let side = |t: &Term| match t {
                    Term::Column(c) => Term::Column(retarget(c)),
                    other => other.clone(),
                };
                draft.view.where_clause.push(PrimitiveClause {
                    lhs: side(&clause.lhs),
                    rhs: side(&clause.rhs),
                    ..clause.clone()
                });
            }
            None => draft.view.where_clause.push(clause.clone()),
        }
    }
    if let (Some(sub), false) = (sub, renamed.is_empty()) {
        draft.extents.push(sub.extent);
        for f in &view.from {
            if let Some(new_alias) = renamed.get(&f.alias) {
                draft.view.from.push(FromItem {
                    relation: sub.b.relation(),
                    alias: new_alias.clone(),
                    params: f.params,
                });
                draft.view.where_clause.push(PrimitiveClause {
                    lhs: Term::Column(ColumnRef::new(f.alias.clone(), sub.link.0.clone())),
                    op: Comparator::Eq,
                    rhs: Term::Column(ColumnRef::new(new_alias.clone(), sub.link.1.clone())),
                    params: EvolutionParams::default(),
                });
            }
        }
    }
    draft.seal(&world.after, view.ve)
}

// ---- relation deletion -----------------------------------------------------

fn relation_outcomes(world: &World, view: &ViewDefinition, r: &RelationRef) -> BTreeSet<Ranked> {
    if !view.from.iter().any(|f| f.relation == *r) {
        return [Ranked {
            key: None,
            outcome: ViewOutcome::Unchanged,
        }]
        .into();
    }
    let replaceable: BTreeSet<String> = view
        .from
        .iter()
        .filter(|f| f.relation == *r && f.params.replaceable)
        .map(|f| f.alias.clone())
        .collect();
    let mut found = BTreeSet::new();
    if !replaceable.is_empty() {
        for (s, _) in world.after.relations() {
            let Some(facts) = world.containment_facts(r, &s) else {
                continue;
            };
            let theta = match facts {
                (true, true) => Containment::Equivalent,
                (true, false) => Containment::Subset,
                _ => Containment::Superset,
            };
            // legality is judged on the substitution alone
            let Some(alone) = rewrite_relation(world, view, r, Some((&s, theta))) else {
                continue;
            };
            let extent = compose(&alone.extents[alone.cascade_steps..]);
            if alone.draft.view.select.is_empty() || !accepts(view.ve, extent) {
                continue;
            }
            let key = RankKey {
                class: class(extent, view.ve),
                candidate: vec![s.source_id.clone(), s.relation_name.clone()],
            };
            let outcome = alone.draft.seal(&world.after, view.ve);
            found.insert(Ranked {
                key: Some(key),
                outcome,
            });
        }
    }
    if found.is_empty() {
        let outcome = match rewrite_relation(world, view, r, None) {
            Some(rw) => rw.draft.seal(&world.after, view.ve),
            None => failed(),
        };
        found.insert(Ranked { key: None, outcome });
    }
    found
}

struct RelationRewrite {
    draft: Draft,
    /// Number of leading extents that come from removing aliases.
    cascade_steps: usize,
    extents: Vec<ExtentRelation>,
}

/// Rebinds the replaceable aliases of `r` to `target` (when given) and
/// removes the other aliases of `r` with everything that reads them.
/// `None` when an indispensable component stands in the way.
fn rewrite_relation(
    world: &World,
    view: &ViewDefinition,
    r: &RelationRef,
    target: Option<(&RelationRef, Containment)>,
) -> Option<RelationRewrite> {
    let mut removed_aliases = BTreeSet::new();
    let mut moved = BTreeMap::new();
    let mut used: BTreeSet<String> = view.from.iter().map(|f| f.alias.clone()).collect();
    for f in view.from.iter().filter(|f| f.relation == *r) {
        if f.params.replaceable && target.is_some() {
            moved.insert(f.alias.clone(), next_alias(&f.alias, &mut used));
        } else if f.params.dispensable {
            removed_aliases.insert(f.alias.clone());
        } else {
            return None;
        }
    }
    let mut cascade = Vec::new();
    let mut own = Vec::new();
    let mut removed = Vec::new();

    // name of `r.x` in the target relation for an occurrence
    let counterpart = |x: &str, replaceable: bool| -> Option<String> {
        let (s, _) = target?;
        let ty = world.before.attribute_type(&r.attribute(x))?;
        if world.after.attribute_type(&s.attribute(x)) == Some(ty) {
            return Some(x.to_string());
        }
        if !replaceable {
            return None;
        }
        let mut partners: Vec<String> = world
            .join_pairs(r, s)
            .into_iter()
            .filter(|(mine, theirs)| mine == x && world.after.attribute_type(&s.attribute(theirs.clone())) == Some(ty))
            .map(|(_, theirs)| theirs)
            .collect();
        partners.sort();
        partners.into_iter().next()
    };
    let map_column = |c: &ColumnRef, replaceable: bool| -> Option<ColumnRef> {
        match moved.get(&c.alias) {
            None => Some(c.clone()),
            Some(alias) => counterpart(&c.attribute, replaceable).map(|x| ColumnRef::new(alias.clone(), x)),
        }
    };

    let mut select = Vec::new();
    let mut column_list = view.column_list.as_ref().map(|_| Vec::new());
    for (i, item) in view.select.iter().enumerate() {
        let mapped = if removed_aliases.contains(&item.column.alias) {
            if !item.params.dispensable {
                return None;
            }
            cascade.push(ExtentRelation::Indifferent);
            None
        } else {
            match map_column(&item.column, item.params.replaceable) {
                Some(c) => Some(c),
                None if item.params.dispensable => {
                    own.push(ExtentRelation::Indifferent);
                    None
                }
                None => return None,
            }
        };
        match mapped {
            Some(column) => {
                select.push(crate::esql::SelectItem {
                    column,
                    params: item.params,
                });
                if let (Some(out), Some(cols)) = (column_list.as_mut(), view.column_list.as_ref()) {
                    out.push(cols[i].clone());
                }
            }
            None => removed.push((1, i, Dropped::Attribute(item.clone()))),
        }
    }
    let mut where_clause = Vec::new();
    for (i, clause) in view.where_clause.iter().enumerate() {
        if clause.columns().any(|c| removed_aliases.contains(&c.alias)) {
            if !clause.params.dispensable {
                return None;
            }
            cascade.push(ExtentRelation::Superset);
            removed.push((2, i, Dropped::Clause(clause.clone())));
            continue;
        }
        let side = |t: &Term| -> Option<Term> {
            match t {
                Term::Column(c) => map_column(c, clause.params.replaceable).map(Term::Column),
                other => Some(other.clone()),
            }
        };
        match (side(&clause.lhs), side(&clause.rhs)) {
            (Some(lhs), Some(rhs)) => where_clause.push(PrimitiveClause {
                lhs,
                rhs,
                ..clause.clone()
            }),
            _ if clause.params.dispensable => {
                own.push(ExtentRelation::Superset);
                removed.push((2, i, Dropped::Clause(clause.clone())));
            }
            _ => return None,
        }
    }
    let mut from = Vec::new();
    for (i, f) in view.from.iter().enumerate() {
        if removed_aliases.contains(&f.alias) {
            cascade.push(ExtentRelation::Superset);
            removed.push((0, i, Dropped::Relation(f.clone())));
        } else if let Some(alias) = moved.get(&f.alias) {
            let (s, _) = target.expect("moved implies target");
            from.push(FromItem {
                relation: s.clone(),
                alias: alias.clone(),
                params: f.params,
            });
        } else {
            from.push(f.clone());
        }
    }
    if let (Some((_, theta)), false) = (target, moved.is_empty()) {
        own.insert(
            0,
            match theta {
                Containment::Equivalent => ExtentRelation::Equivalent,
                Containment::Subset => ExtentRelation::Superset,
                Containment::Superset => ExtentRelation::Subset,
            },
        );
    }
    let cascade_steps = cascade.len();
    let mut extents = cascade;
    extents.extend(own);
    Some(RelationRewrite {
        draft: Draft {
            view: ViewDefinition {
                select,
                from,
                where_clause,
                column_list,
                ..view.clone()
            },
            extents: extents.clone(),
            removed,
        },
        cascade_steps,
        extents,
    })
}
