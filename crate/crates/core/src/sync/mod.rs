//! Synchronization engine: applies a schema deletion and rewrites every view
//! that referenced the deleted component, following each component's
//! dispensable/replaceable flags and the view's `VE`.
//!
//! Per occurrence of the deleted component the rule is the same for
//! attributes, relations and conditions: substitute when replaceable and a
//! usable substitute exists, otherwise drop when dispensable, otherwise fail.

mod attribute;
mod extent;
mod relation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::esql::{self, FromItem, PrimitiveClause, SelectItem, ViewDefinition};
use crate::model::{Catalog, ChangeEvent, Component, ExtentRelation};
use crate::wsmkb::{KbError, Wsmkb};
use crate::wsvkb::{validate_definition, Wsvkb};

pub use attribute::{
    attribute_replaces, find_attribute, rewrite_view_for_attribute, substitute_attribute, AttributeChoice,
};
pub use extent::{classify_extent, classify_step, classify_ws, rank, ve_compatible, RewriteStep};
pub use relation::{find_relation, relation_replaces, rewrite_view_for_relation, substitute_relation, RelationChoice};

pub const FAILURE_MESSAGE: &str = "Web service can't be synchronized";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyncError {
    #[error("unknown target {0}")]
    UnknownTarget(String),
}

/// A component removed from a view by a rewrite.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dropped {
    Relation(FromItem),
    Attribute(SelectItem),
    Clause(PrimitiveClause),
}

impl fmt::Display for Dropped {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dropped::Relation(r) => write!(f, "relation {}", esql::print_from_item(r)),
            Dropped::Attribute(a) => write!(f, "attribute {}", esql::print_select_item(a)),
            Dropped::Clause(c) => write!(f, "condition {}", esql::print_clause(c)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViewOutcome {
    Unchanged,
    Rewritten {
        view: ViewDefinition,
        extent: ExtentRelation,
        dropped: Vec<Dropped>,
    },
    Failed {
        message: String,
    },
}

impl ViewOutcome {
    pub fn failed() -> Self {
        ViewOutcome::Failed {
            message: FAILURE_MESSAGE.to_string(),
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, ViewOutcome::Failed { .. })
    }

    /// Extent relative to the view before the event; `None` when failed.
    pub fn extent(&self) -> Option<ExtentRelation> {
        match self {
            ViewOutcome::Unchanged => Some(ExtentRelation::Equivalent),
            ViewOutcome::Rewritten { extent, .. } => Some(*extent),
            ViewOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WsStatus {
    Extent(ExtentRelation),
    /// Some view failed; the replacement chosen from the web service's
    /// replacement chain, if any is usable.
    FailedWithFallback(Option<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncReport {
    pub event: ChangeEvent,
    pub per_view: BTreeMap<String, ViewOutcome>,
    pub per_ws: BTreeMap<String, WsStatus>,
}

impl SyncReport {
    pub fn any_failed(&self) -> bool {
        self.per_view.values().any(ViewOutcome::is_failed)
    }
}

/// Web services calling a view that references `target`.
pub fn search_affected(vkb: &Wsvkb, target: &Component) -> BTreeSet<String> {
    vkb.views_referencing(target)
        .iter()
        .flat_map(|v| vkb.web_services_of_view(v).unwrap_or_default())
        .collect()
}

/// First replacement whose views are all currently valid.
pub fn fallback_web_service(kb: &Wsmkb, vkb: &Wsvkb, ws_id: &str) -> Result<Option<String>, KbError> {
    Ok(kb.replacement_chain(ws_id)?.into_iter().find(|candidate| {
        kb.web_service(candidate)
            .is_some_and(|ws| ws.view_ids.iter().all(|v| vkb.is_valid(kb, v)))
    }))
}

/// Applies `event` to the stores. Rewritten definitions replace the stored
/// ones; views that cannot be synchronized keep their old definition and are
/// marked invalid.
pub fn synchronize(kb: &mut Wsmkb, vkb: &mut Wsvkb, event: &ChangeEvent) -> Result<SyncReport, SyncError> {
    if !kb.catalog().event_target_exists(event) {
        return Err(SyncError::UnknownTarget(event.target().to_string()));
    }
    let target = event.target();
    let views = vkb.views_referencing(&target);
    let affected = search_affected(vkb, &target);
    kb.apply_change(event)
        .map_err(|_| SyncError::UnknownTarget(target.to_string()))?;

    let mut per_view = BTreeMap::new();
    for view_id in &views {
        let def = &vkb.view(view_id).expect("listed by the store").definition;
        let outcome = match event {
            ChangeEvent::DeleteAttribute(a) => rewrite_view_for_attribute(kb, def, a),
            ChangeEvent::DeleteRelation(r) => rewrite_view_for_relation(kb, def, r),
        };
        per_view.insert(view_id.clone(), outcome);
    }
    for (view_id, outcome) in &per_view {
        match outcome {
            ViewOutcome::Rewritten { view, .. } => vkb.replace_definition(view_id, view.clone()),
            ViewOutcome::Failed { .. } => vkb.mark_invalid(view_id),
            ViewOutcome::Unchanged => Ok(()),
        }
        .expect("view exists");
    }

    let mut per_ws = BTreeMap::new();
    for ws_id in affected {
        let view_ids = vkb.views_of_web_service(&ws_id).unwrap_or_default();
        let extents: Option<Vec<ExtentRelation>> = view_ids
            .iter()
            .map(|v| {
                per_view
                    .get(v)
                    .map_or(Some(ExtentRelation::Equivalent), ViewOutcome::extent)
            })
            .collect();
        let status = match extents {
            Some(extents) if !extents.is_empty() => WsStatus::Extent(classify_ws(&extents)),
            Some(_) => WsStatus::Extent(ExtentRelation::Equivalent),
            None => WsStatus::FailedWithFallback(fallback_web_service(kb, vkb, &ws_id).unwrap_or(None)),
        };
        per_ws.insert(ws_id, status);
    }
    Ok(SyncReport {
        event: event.clone(),
        per_view,
        per_ws,
    })
}

/// `alias` followed by the smallest integer suffix from 2 up that is free.
pub(crate) fn fresh_alias(alias: &str, taken: &BTreeSet<String>) -> String {
    (2..)
        .map(|n| format!("{alias}{n}"))
        .find(|a| !taken.contains(a))
        .expect("unbounded")
}

/// Shared tail of every rewrite: reject an empty projection, an extent the
/// view does not accept, or a definition that no longer validates.
pub(crate) fn finish(
    catalog: &Catalog,
    original: &ViewDefinition,
    view: ViewDefinition,
    steps: &[RewriteStep],
    mut dropped: Vec<Dropped>,
) -> ViewOutcome {
    if view.select.is_empty() {
        return ViewOutcome::failed();
    }
    let extent = classify_extent(steps);
    if !ve_compatible(original.ve, extent) || validate_definition(catalog, &view).is_err() {
        return ViewOutcome::failed();
    }
    let position = |d: &Dropped| match d {
        Dropped::Relation(f) => (0, original.from.iter().position(|x| x == f)),
        Dropped::Attribute(s) => (1, original.select.iter().position(|x| x == s)),
        Dropped::Clause(c) => (2, original.where_clause.iter().position(|x| x == c)),
    };
    dropped.sort_by_key(position);
    ViewOutcome::Rewritten { view, extent, dropped }
}

/// Removes the SELECT items at `positions` (sorted), keeping any column list
/// in step.
pub(crate) fn remove_select_items(view: &mut ViewDefinition, positions: &[usize]) -> Vec<Dropped> {
    let mut out = Vec::new();
    for &i in positions.iter().rev() {
        out.push(Dropped::Attribute(view.select.remove(i)));
        if let Some(cols) = view.column_list.as_mut() {
            cols.remove(i);
        }
    }
    out.reverse();
    out
}
