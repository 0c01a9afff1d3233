use std::collections::{BTreeMap, BTreeSet};

use super::{
    classify_extent, finish, fresh_alias, rank, remove_select_items, ve_compatible, Dropped, RewriteStep, ViewOutcome,
};
use crate::esql::{ColumnRef, Term, ViewDefinition};
use crate::model::{ExtentRelation, RelationRef};
use crate::wsmkb::{Containment, Wsmkb};

/// A usable substitute relation for a deleted relation `r`, with `r θ s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationChoice {
    pub relation: RelationRef,
    pub theta: Containment,
    /// Extent of the substitution alone, including attributes and
    /// conditions it has to give up.
    pub extent: ExtentRelation,
}

struct Rebinding {
    view: ViewDefinition,
    steps: Vec<RewriteStep>,
    dropped: Vec<Dropped>,
}

/// Attribute of `s` standing in for `r.x`: the same name and type, or, for a
/// replaceable occurrence, the smallest-named same-type join partner.
fn counterpart(kb: &Wsmkb, r: &RelationRef, s: &RelationRef, x: &str, replaceable: bool) -> Option<String> {
    let ty = kb.attribute_type(&r.attribute(x)).ok()?;
    let catalog = kb.catalog();
    if catalog.attribute_type(&s.attribute(x)) == Some(ty) {
        return Some(x.to_string());
    }
    if !replaceable {
        return None;
    }
    kb.join_equalities(r, s)
        .into_iter()
        .filter(|(l, m)| l == x && catalog.attribute_type(&s.attribute(m.clone())) == Some(ty))
        .map(|(_, m)| m)
        .min()
}

/// Removes the aliases in `aliases` together with everything that reads
/// them. `None` when an indispensable attribute or condition is hit.
fn cascade(view: &ViewDefinition, aliases: &BTreeSet<String>) -> Option<Rebinding> {
    let mut out = view.clone();
    let mut steps = Vec::new();
    let mut dropped = Vec::new();
    let mut drop_select = Vec::new();
    for (i, item) in view.select.iter().enumerate() {
        if aliases.contains(&item.column.alias) {
            if !item.params.dispensable {
                return None;
            }
            drop_select.push(i);
            steps.push(RewriteStep::DropAttribute);
        }
    }
    dropped.extend(remove_select_items(&mut out, &drop_select));
    let mut where_clause = Vec::new();
    for clause in out.where_clause {
        if clause.columns().any(|c| aliases.contains(&c.alias)) {
            if !clause.params.dispensable {
                return None;
            }
            steps.push(RewriteStep::DropClause);
            dropped.push(Dropped::Clause(clause));
        } else {
            where_clause.push(clause);
        }
    }
    out.where_clause = where_clause;
    let mut from = Vec::new();
    for item in out.from {
        if aliases.contains(&item.alias) {
            steps.push(RewriteStep::DropRelation);
            dropped.push(Dropped::Relation(item));
        } else {
            from.push(item);
        }
    }
    out.from = from;
    Some(Rebinding {
        view: out,
        steps,
        dropped,
    })
}

/// Rebinds each alias in `aliases` (all bound to `r`) to `s` under a fresh
/// name, mapping the attributes read through them. `taken` holds the
/// aliases fresh names must avoid.
fn rebind(
    kb: &Wsmkb,
    view: &ViewDefinition,
    r: &RelationRef,
    s: &RelationRef,
    theta: Containment,
    aliases: &BTreeSet<String>,
    taken: &BTreeSet<String>,
) -> Option<Rebinding> {
    let mut taken = taken.clone();
    let mut fresh = BTreeMap::new();
    for item in view.from.iter().filter(|f| aliases.contains(&f.alias)) {
        let alias = fresh_alias(&item.alias, &taken);
        taken.insert(alias.clone());
        fresh.insert(item.alias.clone(), alias);
    }
    let map = |c: &ColumnRef, replaceable: bool| -> Option<ColumnRef> {
        match fresh.get(&c.alias) {
            Some(alias) => counterpart(kb, r, s, &c.attribute, replaceable).map(|x| ColumnRef::new(alias.clone(), x)),
            None => Some(c.clone()),
        }
    };

    let mut out = view.clone();
    let mut steps = vec![RewriteStep::SubstituteRelation(theta)];
    let mut dropped = Vec::new();
    let mut drop_select = Vec::new();
    for (i, item) in out.select.iter_mut().enumerate() {
        match map(&item.column, item.params.replaceable) {
            Some(c) => item.column = c,
            None if item.params.dispensable => {
                drop_select.push(i);
                steps.push(RewriteStep::DropAttribute);
            }
            None => return None,
        }
    }
    dropped.extend(remove_select_items(&mut out, &drop_select));
    let mut where_clause = Vec::new();
    for clause in out.where_clause {
        let mut mapped = clause.clone();
        let mut complete = true;
        for term in [&mut mapped.lhs, &mut mapped.rhs] {
            if let Term::Column(c) = term {
                match map(c, clause.params.replaceable) {
                    Some(m) => *c = m,
                    None => complete = false,
                }
            }
        }
        if complete {
            where_clause.push(mapped);
        } else if clause.params.dispensable {
            steps.push(RewriteStep::DropClause);
            dropped.push(Dropped::Clause(clause));
        } else {
            return None;
        }
    }
    out.where_clause = where_clause;
    for item in out.from.iter_mut() {
        if let Some(alias) = fresh.get(&item.alias) {
            item.relation = s.clone();
            item.alias = alias.clone();
        }
    }
    Some(Rebinding {
        view: out,
        steps,
        dropped,
    })
}

/// Aliases of `r` split into those that would be rebound when a substitute
/// exists (replaceable) and the rest.
fn split_aliases(view: &ViewDefinition, r: &RelationRef) -> (BTreeSet<String>, BTreeSet<String>) {
    view.from
        .iter()
        .filter(|f| f.relation == *r)
        .map(|f| (f.alias.clone(), f.params.replaceable))
        .fold(
            (BTreeSet::new(), BTreeSet::new()),
            |(mut yes, mut no), (alias, replaceable)| {
                if replaceable {
                    yes.insert(alias)
                } else {
                    no.insert(alias)
                };
                (yes, no)
            },
        )
}

fn all_aliases(view: &ViewDefinition) -> BTreeSet<String> {
    view.from.iter().map(|f| f.alias.clone()).collect()
}

/// Extent of rebinding the replaceable aliases of `r` to `s`, when every
/// attribute and condition they carry can follow and the view's `VE`
/// accepts the result.
fn replacement_extent(
    kb: &Wsmkb,
    view: &ViewDefinition,
    r: &RelationRef,
    s: &RelationRef,
    theta: Containment,
) -> Option<ExtentRelation> {
    let (rebound, others) = split_aliases(view, r);
    if rebound.is_empty() {
        return None;
    }
    let reduced = cascade(view, &others)?;
    let rb = rebind(kb, &reduced.view, r, s, theta, &rebound, &all_aliases(view))?;
    if rb.view.select.is_empty() {
        return None;
    }
    let extent = classify_extent(&rb.steps);
    ve_compatible(view.ve, extent).then_some(extent)
}

pub fn relation_replaces(
    kb: &Wsmkb,
    view: &ViewDefinition,
    r: &RelationRef,
    s: &RelationRef,
    theta: Containment,
) -> bool {
    replacement_extent(kb, view, r, s, theta).is_some()
}

/// Best usable substitute for `r` in `view`: ranked by extent under the
/// view's `VE`, then by name.
pub fn find_relation(kb: &Wsmkb, view: &ViewDefinition, r: &RelationRef) -> Option<RelationChoice> {
    let mut thetas: BTreeMap<RelationRef, Vec<Containment>> = BTreeMap::new();
    for (s, theta) in kb.candidate_substitute_relations(r) {
        thetas.entry(s).or_default().push(theta);
    }
    thetas
        .into_iter()
        .filter_map(|(s, list)| {
            let theta = Containment::combine(list)?;
            let extent = replacement_extent(kb, view, r, &s, theta)?;
            Some(RelationChoice {
                relation: s,
                theta,
                extent,
            })
        })
        .min_by(|x, y| (rank(x.extent, view.ve), &x.relation).cmp(&(rank(y.extent, view.ve), &y.relation)))
}

/// `view` with every alias of `r` rebound to `s`; `None` when some
/// indispensable attribute or condition has no counterpart in `s`.
pub fn substitute_relation(
    kb: &Wsmkb,
    view: &ViewDefinition,
    r: &RelationRef,
    s: &RelationRef,
) -> Option<ViewDefinition> {
    let theta = Containment::combine(kb.pc_links(r, s).iter().map(|l| l.theta)).unwrap_or(Containment::Equivalent);
    let aliases: BTreeSet<String> = view.aliases_of(r).map(str::to_string).collect();
    rebind(kb, view, r, s, theta, &aliases, &all_aliases(view)).map(|rb| rb.view)
}

pub fn rewrite_view_for_relation(kb: &Wsmkb, view: &ViewDefinition, r: &RelationRef) -> ViewOutcome {
    if !view.references_relation(r) {
        return ViewOutcome::Unchanged;
    }
    let choice = find_relation(kb, view, r);
    let (mut rebound, mut others) = split_aliases(view, r);
    if choice.is_none() {
        others.append(&mut rebound);
    }
    let dispensable = |alias: &String| view.from_item(alias).is_some_and(|f| f.params.dispensable);
    if !others.iter().all(dispensable) {
        return ViewOutcome::failed();
    }
    let Some(mut acc) = cascade(view, &others) else {
        return ViewOutcome::failed();
    };
    if let Some(choice) = choice {
        let Some(rb) = rebind(
            kb,
            &acc.view,
            r,
            &choice.relation,
            choice.theta,
            &rebound,
            &all_aliases(view),
        ) else {
            return ViewOutcome::failed();
        };
        acc.view = rb.view;
        acc.steps.extend(rb.steps);
        acc.dropped.extend(rb.dropped);
    }
    finish(kb.catalog(), view, acc.view, &acc.steps, acc.dropped)
}
