mod common;

use common::matrix::{attribute_case, expected, relation_case};

macro_rules! matrix {
    ($($name:ident: $case:ident($d:expr, $r:expr, $c:expr);)*) => {
        $(
            #[test]
            fn $name() {
                let (class, outcome) = $case($d, $r, $c);
                assert_eq!(class, expected($d, $r, $c), "{outcome:?}");
            }
        )*
    };
}

matrix! {
    attribute_dispensable_only_with_candidate: attribute_case(true, false, true);
    attribute_dispensable_only_without_candidate: attribute_case(true, false, false);
    attribute_both_with_candidate: attribute_case(true, true, true);
    attribute_both_without_candidate: attribute_case(true, true, false);
    attribute_neither_with_candidate: attribute_case(false, false, true);
    attribute_neither_without_candidate: attribute_case(false, false, false);
    attribute_replaceable_only_with_candidate: attribute_case(false, true, true);
    attribute_replaceable_only_without_candidate: attribute_case(false, true, false);
    relation_dispensable_only_with_candidate: relation_case(true, false, true);
    relation_dispensable_only_without_candidate: relation_case(true, false, false);
    relation_both_with_candidate: relation_case(true, true, true);
    relation_both_without_candidate: relation_case(true, true, false);
    relation_neither_with_candidate: relation_case(false, false, true);
    relation_neither_without_candidate: relation_case(false, false, false);
    relation_replaceable_only_with_candidate: relation_case(false, true, true);
    relation_replaceable_only_without_candidate: relation_case(false, true, false);
}
