use std::collections::{BTreeMap, BTreeSet};

use super::{
    classify_step, finish, fresh_alias, rank, remove_select_items, ve_compatible, Dropped, RewriteStep, ViewOutcome,
};
use crate::esql::{ColumnRef, Comparator, EvolutionParams, FromItem, PrimitiveClause, Term, ViewDefinition};
use crate::model::{AttributeRef, ExtentRelation, RelationRef};
use crate::wsmkb::{Containment, Wsmkb};

/// A usable substitute `b` for a deleted attribute `a` of relation `r`,
/// read from `b`'s relation `s` joined to `r` on `link`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeChoice {
    pub attribute: AttributeRef,
    pub theta: Option<Containment>,
    pub extent: ExtentRelation,
    /// `(r attribute, s attribute)` equated by the added join condition.
    pub link: (String, String),
}

/// Same declared type and a join-constraint equality between the two.
pub fn attribute_replaces(kb: &Wsmkb, a: &AttributeRef, b: &AttributeRef) -> bool {
    match (kb.attribute_type(a), kb.attribute_type(b)) {
        (Ok(x), Ok(y)) if x == y => {}
        _ => return false,
    }
    kb.join_equalities(&a.relation(), &b.relation())
        .iter()
        .any(|(x, y)| *x == a.attribute_name && *y == b.attribute_name)
}

/// The join used to reach `s` from `r` once `a` is gone: the first usable
/// pair of a projection-only containment between them, else a join
/// constraint equality not involving `a`.
fn linking_join(kb: &Wsmkb, a: &AttributeRef, s: &RelationRef) -> Option<(String, String)> {
    let r = a.relation();
    let catalog = kb.catalog();
    let usable = |(x, y): &(String, String)| {
        *x != a.attribute_name
            && catalog.has_attribute(&r.attribute(x.clone()))
            && catalog.has_attribute(&s.attribute(y.clone()))
    };
    kb.pc_links(&r, s)
        .iter()
        .find_map(|link| link.pairs.iter().find(|p| usable(p)).cloned())
        .or_else(|| kb.join_equalities(&r, s).into_iter().find(usable))
}

fn choice_for(kb: &Wsmkb, view: &ViewDefinition, a: &AttributeRef, b: &AttributeRef) -> Option<AttributeChoice> {
    let (r, s) = (a.relation(), b.relation());
    if r == s || !kb.catalog().has_attribute(b) || !attribute_replaces(kb, a, b) {
        return None;
    }
    let theta = Containment::combine(kb.pc_links(&r, &s).iter().map(|l| l.theta));
    let extent = classify_step(RewriteStep::SubstituteAttribute(theta));
    if !ve_compatible(view.ve, extent) {
        return None;
    }
    Some(AttributeChoice {
        attribute: b.clone(),
        theta,
        extent,
        link: linking_join(kb, a, &s)?,
    })
}

/// Best usable substitute for `a` in `view`: ranked by extent under the
/// view's `VE`, then by name.
pub fn find_attribute(kb: &Wsmkb, a: &AttributeRef, view: &ViewDefinition) -> Option<AttributeChoice> {
    kb.candidate_substitute_attributes(a)
        .iter()
        .filter_map(|b| choice_for(kb, view, a, b))
        .min_by(|x, y| (rank(x.extent, view.ve), &x.attribute).cmp(&(rank(y.extent, view.ve), &y.attribute)))
}

/// Rewrites `view` after deletion of `a`, using `b` wherever a replaceable
/// occurrence allows it.
pub fn substitute_attribute(kb: &Wsmkb, view: &ViewDefinition, a: &AttributeRef, b: &AttributeRef) -> ViewOutcome {
    match choice_for(kb, view, a, b) {
        Some(choice) => rewrite(kb, view, a, Some(&choice)),
        None => ViewOutcome::failed(),
    }
}

pub fn rewrite_view_for_attribute(kb: &Wsmkb, view: &ViewDefinition, a: &AttributeRef) -> ViewOutcome {
    if !view.references_attribute(a) {
        return ViewOutcome::Unchanged;
    }
    let choice = find_attribute(kb, a, view);
    rewrite(kb, view, a, choice.as_ref())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Action {
    Keep,
    Substitute,
    Drop,
}

fn action(params: EvolutionParams, hit: bool, can_substitute: bool) -> Option<Action> {
    if !hit {
        Some(Action::Keep)
    } else if params.replaceable && can_substitute {
        Some(Action::Substitute)
    } else if params.dispensable {
        Some(Action::Drop)
    } else {
        None
    }
}

fn rewrite(kb: &Wsmkb, view: &ViewDefinition, a: &AttributeRef, choice: Option<&AttributeChoice>) -> ViewOutcome {
    let denotes = |c: &ColumnRef| view.column_denotes(c, a);
    let mut select_actions = Vec::new();
    for item in &view.select {
        match action(item.params, denotes(&item.column), choice.is_some()) {
            Some(act) => select_actions.push(act),
            None => return ViewOutcome::failed(),
        }
    }
    let mut clause_actions = Vec::new();
    for clause in &view.where_clause {
        match action(clause.params, clause.columns().any(denotes), choice.is_some()) {
            Some(act) => clause_actions.push(act),
            None => return ViewOutcome::failed(),
        }
    }

    // aliases of r through which some occurrence gets substituted
    let mut substituted: BTreeSet<&str> = BTreeSet::new();
    for (item, act) in view.select.iter().zip(&select_actions) {
        if *act == Action::Substitute {
            substituted.insert(&item.column.alias);
        }
    }
    for (clause, act) in view.where_clause.iter().zip(&clause_actions) {
        if *act == Action::Substitute {
            substituted.extend(clause.columns().filter(|c| denotes(c)).map(|c| c.alias.as_str()));
        }
    }
    let mut taken: BTreeSet<String> = view.from.iter().map(|f| f.alias.clone()).collect();
    let mut fresh = BTreeMap::new();
    for item in view.from.iter().filter(|f| substituted.contains(f.alias.as_str())) {
        let alias = fresh_alias(&item.alias, &taken);
        taken.insert(alias.clone());
        fresh.insert(item.alias.clone(), alias);
    }

    let mut out = view.clone();
    let mut steps = Vec::new();
    let mut dropped = Vec::new();
    if let Some(choice) = choice.filter(|_| !fresh.is_empty()) {
        let b = &choice.attribute;
        let swap = |c: &ColumnRef| {
            if denotes(c) {
                ColumnRef::new(fresh[&c.alias].clone(), b.attribute_name.clone())
            } else {
                c.clone()
            }
        };
        for (item, act) in out.select.iter_mut().zip(&select_actions) {
            if *act == Action::Substitute {
                item.column = swap(&item.column);
            }
        }
        for (clause, act) in out.where_clause.iter_mut().zip(&clause_actions) {
            if *act == Action::Substitute {
                for term in [&mut clause.lhs, &mut clause.rhs] {
                    if let Term::Column(c) = term {
                        *c = swap(c);
                    }
                }
            }
        }
        let (jr, js) = &choice.link;
        for item in view.from.iter().filter(|f| fresh.contains_key(&f.alias)) {
            let alias = fresh[&item.alias].clone();
            out.from.push(FromItem {
                relation: b.relation(),
                alias: alias.clone(),
                params: item.params,
            });
            out.where_clause.push(PrimitiveClause {
                lhs: Term::Column(ColumnRef::new(item.alias.clone(), jr.clone())),
                op: Comparator::Eq,
                rhs: Term::Column(ColumnRef::new(alias, js.clone())),
                params: EvolutionParams::default(),
            });
        }
        steps.push(RewriteStep::SubstituteAttribute(choice.theta));
    }

    let drop_select: Vec<usize> = positions(&select_actions, Action::Drop);
    steps.extend(drop_select.iter().map(|_| RewriteStep::DropAttribute));
    dropped.extend(remove_select_items(&mut out, &drop_select));
    for &i in positions(&clause_actions, Action::Drop).iter().rev() {
        dropped.push(Dropped::Clause(out.where_clause.remove(i)));
        steps.push(RewriteStep::DropClause);
    }
    finish(kb.catalog(), view, out, &steps, dropped)
}

fn positions(actions: &[Action], wanted: Action) -> Vec<usize> {
    actions
        .iter()
        .enumerate()
        .filter(|(_, a)| **a == wanted)
        .map(|(i, _)| i)
        .collect()
}
