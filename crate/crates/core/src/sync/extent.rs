use crate::model::ExtentRelation;
use crate::wsmkb::Containment;

/// One elementary change made while rewriting a view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteStep {
    /// Deleted relation `r` rebound to `s`, with `r θ s`.
    SubstituteRelation(Containment),
    /// Deleted attribute read from a joined relation `s`; `r θ s` over the
    /// projection-only constraints between them, if any.
    SubstituteAttribute(Option<Containment>),
    DropClause,
    DropAttribute,
    DropRelation,
}

/// Extent of a single step relative to the original view.
pub fn classify_step(step: RewriteStep) -> ExtentRelation {
    use ExtentRelation::*;
    match step {
        RewriteStep::SubstituteRelation(Containment::Equivalent) => Equivalent,
        RewriteStep::SubstituteRelation(Containment::Subset) => Superset,
        RewriteStep::SubstituteRelation(Containment::Superset) => Subset,
        RewriteStep::SubstituteAttribute(Some(Containment::Equivalent | Containment::Subset)) => Equivalent,
        RewriteStep::SubstituteAttribute(Some(Containment::Superset)) => Subset,
        RewriteStep::SubstituteAttribute(None) => Indifferent,
        RewriteStep::DropClause | RewriteStep::DropRelation => Superset,
        RewriteStep::DropAttribute => Indifferent,
    }
}

/// Composed extent of a rewrite; no steps means `≡`.
pub fn classify_extent(steps: &[RewriteStep]) -> ExtentRelation {
    steps
        .iter()
        .map(|s| classify_step(*s))
        .fold(ExtentRelation::Equivalent, ExtentRelation::meet)
}

pub fn ve_compatible(ve: ExtentRelation, extent: ExtentRelation) -> bool {
    use ExtentRelation::*;
    match ve {
        Indifferent => true,
        _ => extent == Equivalent || extent == ve,
    }
}

/// Preference class of a rewrite extent under `ve`: 0 for `≡`, 1 when it
/// goes the direction `ve` asks for, 2 otherwise.
pub fn rank(extent: ExtentRelation, ve: ExtentRelation) -> u8 {
    use ExtentRelation::*;
    match (extent, ve) {
        (Equivalent, _) => 0,
        (Indifferent, _) => 2,
        (_, Indifferent) => 1,
        (e, v) if e == v => 1,
        _ => 2,
    }
}

/// Web-service level extent from the extents of its views.
pub fn classify_ws(view_extents: &[ExtentRelation]) -> ExtentRelation {
    use ExtentRelation::*;
    let has = |e| view_extents.contains(&e);
    if view_extents.iter().all(|e| *e == Equivalent) {
        Equivalent
    } else if has(Indifferent) || (has(Superset) && has(Subset)) {
        Indifferent
    } else if has(Superset) {
        Superset
    } else {
        Subset
    }
}
