use chrono::NaiveDate;
use ordered_float::NotNan;
use proptest::prelude::*;

use wssync::esql::{
    is_reserved_word, ColumnRef, Comparator, EvolutionParams, FromItem, PrimitiveClause, SelectItem, Term,
    ViewDefinition,
};
use wssync::model::{ExtentRelation, RelationRef};

pub fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,7}".prop_filter("reserved", |s| !is_reserved_word(s))
}

pub fn params() -> impl Strategy<Value = EvolutionParams> {
    (any::<bool>(), any::<bool>()).prop_map(|(d, r)| EvolutionParams::new(d, r))
}

pub fn extent() -> impl Strategy<Value = ExtentRelation> {
    prop::sample::select(ExtentRelation::ALL.to_vec())
}

fn literal() -> impl Strategy<Value = Term> {
    prop_oneof![
        (-1.0e12f64..1.0e12).prop_map(|n| Term::Number(NotNan::new(n).unwrap())),
        (-1000i64..1000).prop_map(|n| Term::Number(NotNan::new(n as f64).unwrap())),
        "[ -~\\n\\t\\r]{0,12}".prop_map(Term::String),
        (0i32..40000).prop_map(|d| Term::Date(NaiveDate::from_num_days_from_ce_opt(700_000 + d).unwrap())),
    ]
}

fn column(aliases: Vec<String>) -> impl Strategy<Value = ColumnRef> {
    (prop::sample::select(aliases), ident()).prop_map(|(a, x)| ColumnRef::new(a, x))
}

fn clause(aliases: Vec<String>) -> impl Strategy<Value = PrimitiveClause> {
    let lhs = column(aliases.clone()).prop_map(Term::Column);
    let rhs = prop_oneof![column(aliases).prop_map(Term::Column), literal()];
    (
        lhs,
        rhs,
        prop::sample::select(Comparator::ALL.to_vec()),
        params(),
        any::<bool>(),
    )
        .prop_map(|(lhs, rhs, op, params, swap)| {
            let (lhs, rhs) = if swap { (rhs, lhs) } else { (lhs, rhs) };
            PrimitiveClause { lhs, op, rhs, params }
        })
}

/// Well-formed views: distinct aliases, every column bound to a FROM alias,
/// no literal-only conditions.
pub fn view() -> impl Strategy<Value = ViewDefinition> {
    let from = prop::collection::btree_map(ident(), (ident(), ident(), params()), 1..4);
    (ident(), extent(), from, any::<bool>()).prop_flat_map(|(name, ve, from, with_columns)| {
        let from: Vec<FromItem> = from
            .into_iter()
            .map(|(alias, (s, r, params))| FromItem {
                relation: RelationRef::new(s, r),
                alias,
                params,
            })
            .collect();
        let aliases: Vec<String> = from.iter().map(|f| f.alias.clone()).collect();
        let select = prop::collection::vec(
            (column(aliases.clone()), params()).prop_map(|(column, params)| SelectItem { column, params }),
            1..5,
        );
        let where_clause = prop::collection::vec(clause(aliases), 0..4);
        (select, where_clause, prop::collection::vec(ident(), 4)).prop_map(move |(select, where_clause, names)| {
            let column_list = with_columns.then(|| names[..select.len()].to_vec());
            ViewDefinition {
                name: name.clone(),
                column_list,
                ve,
                select,
                from: from.clone(),
                where_clause,
            }
        })
    })
}
