//! Every (dispensable, replaceable) pair for attributes and relations, with
//! and without a usable substitute, on a toy knowledge base whose views all
//! accept any extent.

use serde_json::json;

use wssync::esql::print_view;
use wssync::kbfile::{load_str, LoadedKb};
use wssync::model::{ChangeEvent, RelationRef};
use wssync::sync::{synchronize, Dropped, ViewOutcome, FAILURE_MESSAGE};

#[derive(Debug, PartialEq, Eq)]
pub enum Class {
    Drop,
    Substitute,
    Fail,
}

fn attrs(names: &[(&str, &str)]) -> serde_json::Value {
    names.iter().map(|(n, t)| json!({ "name": n, "type": t })).collect()
}

/// S1.R and S2.R are joinable on A and equivalent as a whole; S1.Q has no
/// constraint at all.
fn kb(view: &str) -> LoadedKb {
    let r = attrs(&[("K", "number"), ("A", "string")]);
    let doc = json!({
        "sources": [
            { "id": "S1", "relations": [
                { "name": "R", "attributes": r },
                { "name": "Q", "attributes": r },
                { "name": "P", "attributes": attrs(&[("K", "number")]) },
            ]},
            { "id": "S2", "relations": [{ "name": "R", "attributes": r }] },
        ],
        "join_constraints": [
            { "id": "JC1", "left": "S1.R", "right": "S2.R", "equalities": [["A", "A"]] },
        ],
        "pc_constraints": [
            { "id": "PC1",
              "left": { "relation": "S1.R", "projection": ["K", "A"] },
              "theta": "equivalent",
              "right": { "relation": "S2.R", "projection": ["K", "A"] } },
        ],
        "web_services": [{ "id": "WS1", "sources": ["S1", "S2"], "views": ["V"], "replacements": [] }],
        "views": [{ "id": "V", "text": view }],
    });
    load_str(&doc.to_string()).expect("toy knowledge base loads")
}

fn flags(d: bool, r: bool, x: char) -> String {
    format!("({x}D={d}, {x}R={r})")
}

fn run(view: &str, event: &str) -> ViewOutcome {
    let mut kb = kb(view);
    let event: ChangeEvent = event.parse().unwrap();
    let mut report = synchronize(&mut kb.wsmkb, &mut kb.wsvkb, &event).unwrap();
    report.per_view.remove("V").expect("V is affected")
}

pub fn attribute_case(d: bool, r: bool, candidate: bool) -> (Class, ViewOutcome) {
    let rel = if candidate { "R" } else { "Q" };
    let view = format!(
        "CREATE VIEW V VE='≈' AS SELECT X.K, X.A {} FROM S1.{rel} X;",
        flags(d, r, 'A')
    );
    let outcome = run(&view, &format!("delete-attribute S1.{rel}.A"));
    let class = match &outcome {
        ViewOutcome::Failed { message } => {
            assert_eq!(message, FAILURE_MESSAGE);
            Class::Fail
        }
        ViewOutcome::Rewritten { view, dropped, .. } => {
            let s2 = RelationRef::new("S2", "R");
            if view.references_relation(&s2) {
                assert!(dropped.is_empty(), "{dropped:?}");
                assert_eq!(view.select.len(), 2, "{}", print_view(view));
                Class::Substitute
            } else {
                assert!(matches!(dropped.as_slice(), [Dropped::Attribute(_)]), "{dropped:?}");
                assert_eq!(view.select.len(), 1, "{}", print_view(view));
                Class::Drop
            }
        }
        ViewOutcome::Unchanged => panic!("referencing view reported unchanged"),
    };
    (class, outcome)
}

pub fn relation_case(d: bool, r: bool, candidate: bool) -> (Class, ViewOutcome) {
    let rel = if candidate { "R" } else { "Q" };
    let view = format!(
        "CREATE VIEW V VE='≈' AS SELECT P.K, X.A (AD=true, AR=true) \
         FROM S1.P P, S1.{rel} X {} WHERE (X.K = P.K) (CD=true, CR=true);",
        flags(d, r, 'R')
    );
    let outcome = run(&view, &format!("delete-relation S1.{rel}"));
    let class = match &outcome {
        ViewOutcome::Failed { message } => {
            assert_eq!(message, FAILURE_MESSAGE);
            Class::Fail
        }
        ViewOutcome::Rewritten { view, dropped, .. } => {
            if view.references_relation(&RelationRef::new("S2", "R")) {
                assert!(dropped.is_empty(), "{dropped:?}");
                assert_eq!(view.from.len(), 2);
                assert_eq!(view.where_clause.len(), 1);
                Class::Substitute
            } else {
                assert_eq!(view.from.len(), 1, "{}", print_view(view));
                assert_eq!(view.select.len(), 1);
                assert!(view.where_clause.is_empty());
                assert!(dropped.iter().any(|d| matches!(d, Dropped::Relation(_))));
                Class::Drop
            }
        }
        ViewOutcome::Unchanged => panic!("referencing view reported unchanged"),
    };
    (class, outcome)
}

/// Expected action for `(dispensable, replaceable)` given whether a
/// substitute exists.
pub fn expected(d: bool, r: bool, candidate: bool) -> Class {
    match (d, r) {
        (true, false) => Class::Drop,
        (true, true) if candidate => Class::Substitute,
        (true, true) => Class::Drop,
        (false, false) => Class::Fail,
        (false, true) if candidate => Class::Substitute,
        (false, true) => Class::Fail,
    }
}

/// All sixteen cases, for the acceptance report.
pub fn all_cases_hold() -> bool {
    [true, false].iter().all(|&d| {
        [true, false].iter().all(|&r| {
            [true, false].iter().all(|&c| {
                attribute_case(d, r, c).0 == expected(d, r, c) && relation_case(d, r, c).0 == expected(d, r, c)
            })
        })
    })
}
