//! E-SQL: SELECT-FROM-WHERE view definitions where every attribute,
//! relation and condition carries dispensable/replaceable flags and the view
//! declares which extent relation (`VE`) a rewrite may have.
//!
//! ```text
//! CREATE VIEW V1 VE='⊇' AS
//! SELECT D.IdD,
//!        D.Name (AD=false, AR=true)
//! FROM S1.Doctor D (RD=false, RR=true)
//! WHERE (D.Speciality = "Cardiologist") (CD=false, CR=true);
//! ```
//!
//! Keywords are case-insensitive, identifiers are not. Conditions may be
//! separated by `AND` or `,`. Omitted parameter groups default to `false`,
//! an omitted `VE` to `≡`, an omitted alias to the relation name.

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::*;
pub use parser::{parse_clause, parse_view, parse_views};
pub use printer::{print_clause, print_from_item, print_select_item, print_term, print_view};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EsqlError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {0}")]
    Semantic(String),
}

impl EsqlError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        EsqlError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Words that cannot be used as view names, aliases or source ids.
pub fn is_reserved_word(word: &str) -> bool {
    parser::is_reserved(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExtentRelation, RelationRef};

    const EXAMPLE_1: &str = r#"CREATE VIEW V1 VE='⊇' AS
SELECT D.IdD, D.Name (AD=false, AR=true)
FROM S1.Doctor D (RD=false, RR=true)
WHERE (D.Speciality= "Cardiologist") (CD=false, CR=true);"#;

    const EXAMPLE_2: &str = r#"CREATE VIEW V2 VE='⊆' AS
SELECT H.IdH, H.Name (AD=false, AR=true)
FROM S1.Hospital H (RD=false, RR=true)
WHERE (H.Localization= "Tunis") (CD=false, CR=true);"#;

    #[test]
    fn parses_example_1() {
        let v = parse_view(EXAMPLE_1).unwrap();
        assert_eq!(v.name, "V1");
        assert_eq!(v.ve, ExtentRelation::Superset);
        assert_eq!(
            v.select,
            vec![
                SelectItem {
                    column: ColumnRef::new("D", "IdD"),
                    params: EvolutionParams::new(false, false),
                },
                SelectItem {
                    column: ColumnRef::new("D", "Name"),
                    params: EvolutionParams::new(false, true),
                },
            ]
        );
        assert_eq!(
            v.from,
            vec![FromItem {
                relation: RelationRef::new("S1", "Doctor"),
                alias: "D".into(),
                params: EvolutionParams::new(false, true),
            }]
        );
        assert_eq!(
            v.where_clause,
            vec![PrimitiveClause {
                lhs: Term::Column(ColumnRef::new("D", "Speciality")),
                op: Comparator::Eq,
                rhs: Term::String("Cardiologist".into()),
                params: EvolutionParams::new(false, true),
            }]
        );
    }

    #[test]
    fn parses_example_2() {
        let v = parse_view(EXAMPLE_2).unwrap();
        assert_eq!(v.name, "V2");
        assert_eq!(v.ve, ExtentRelation::Subset);
        assert_eq!(v.from[0].relation, RelationRef::new("S1", "Hospital"));
        assert_eq!(v.from[0].alias, "H");
        assert_eq!(v.where_clause[0].lhs, Term::Column(ColumnRef::new("H", "Localization")));
        assert_eq!(v.where_clause[0].rhs, Term::String("Tunis".into()));
    }

    #[test]
    fn all_defaults() {
        let v = parse_view("CREATE VIEW V0 AS SELECT R.A FROM S1.R R;").unwrap();
        assert_eq!(v.ve, ExtentRelation::Equivalent);
        assert!(v.select[0].params.is_default());
        assert!(v.from[0].params.is_default());
        let text = print_view(&v);
        for group in ["(AD", "(RD", "(CD"] {
            assert!(!text.contains(group), "{text}");
        }
        assert!(text.contains("VE='≡'"));
    }

    #[test]
    fn explicit_false_equals_omitted() {
        let a = parse_view(
            "CREATE VIEW V AS SELECT R.A (AD=false, AR=false) FROM S.R R (RD=false) WHERE R.A = 1 (CR=false);",
        )
        .unwrap();
        let b = parse_view("create view V as select R.A from S.R R where R.A = 1").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn round_trip_examples() {
        for text in [EXAMPLE_1, EXAMPLE_2] {
            let v = parse_view(text).unwrap();
            assert_eq!(parse_view(&print_view(&v)).unwrap(), v);
        }
    }

    #[test]
    fn canonical_layout() {
        let v = parse_view(EXAMPLE_1).unwrap();
        assert_eq!(
            print_view(&v),
            "CREATE VIEW V1 VE='⊇' AS\n\
             SELECT D.IdD,\n       D.Name (AD=false, AR=true)\n\
             FROM S1.Doctor D (RD=false, RR=true)\n\
             WHERE (D.Speciality = \"Cardiologist\") (CD=false, CR=true);\n"
        );
    }

    #[test]
    fn default_alias_and_unqualified_columns() {
        let v = parse_view("CREATE VIEW V AS SELECT A FROM S1.R WHERE A > 3").unwrap();
        assert_eq!(v.from[0].alias, "R");
        assert_eq!(v.select[0].column, ColumnRef::new("R", "A"));
        let err = parse_view("CREATE VIEW V AS SELECT A FROM S1.R, S1.T").unwrap_err();
        assert!(matches!(err, EsqlError::Semantic(_)));
    }

    #[test]
    fn literals() {
        let v = parse_view(
            "CREATE VIEW V AS SELECT R.A FROM S.R R WHERE R.A >= -2.5, R.B <> \"x\\\"y\", R.C < DATE '2011-03-04'",
        )
        .unwrap();
        assert_eq!(v.where_clause.len(), 3);
        assert_eq!(v.where_clause[0].rhs, Term::Number((-2.5).try_into().unwrap()));
        assert_eq!(v.where_clause[1].rhs, Term::String("x\"y".into()));
        assert_eq!(
            v.where_clause[2].rhs,
            Term::Date(chrono::NaiveDate::from_ymd_opt(2011, 3, 4).unwrap())
        );
        assert_eq!(parse_view(&print_view(&v)).unwrap(), v);
    }

    #[test]
    fn column_list_arity() {
        let v = parse_view("CREATE VIEW V (a, b) AS SELECT R.A, R.B FROM S.R R").unwrap();
        assert_eq!(v.column_list, Some(vec!["a".to_string(), "b".to_string()]));
        assert_eq!(parse_view(&print_view(&v)).unwrap(), v);
        assert!(matches!(
            parse_view("CREATE VIEW V (a) AS SELECT R.A, R.B FROM S.R R"),
            Err(EsqlError::Semantic(_))
        ));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            parse_view("CREATE VIEW V AS SELECT X.A FROM S.R R"),
            Err(EsqlError::Semantic(_))
        ));
        assert!(matches!(
            parse_view("CREATE VIEW V AS SELECT R.A FROM S.R R, S.T R"),
            Err(EsqlError::Semantic(_))
        ));
        assert!(matches!(
            parse_view("CREATE VIEW V AS SELECT R.A FROM S.R R WHERE 1 = 2"),
            Err(EsqlError::Semantic(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_view("CREATE VIEW V AS\nSELECT R.A (RD=true) FROM S.R R").unwrap_err();
        match err {
            EsqlError::Syntax { line, column, message } => {
                assert_eq!((line, column), (2, 13));
                assert!(message.contains("AD or AR"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_view("CREATE VIEW V VE='?' AS SELECT R.A FROM S.R R").is_err());
        assert!(parse_view("CREATE VIEW V AS SELECT R.A (AD=true, AD=false) FROM S.R R").is_err());
        assert!(parse_view("CREATE VIEW V AS SELECT R.A FROM S.R R extra").is_err());
        assert!(parse_view("CREATE VIEW V AS SELECT R.A FROM S.R R WHERE R.A = DATE '2020-13-01'").is_err());
    }

    #[test]
    fn multi_statement_files() {
        let src = format!("-- healthcare views\n{EXAMPLE_1}\n\n{EXAMPLE_2}\n");
        let views = parse_views(&src).unwrap();
        assert_eq!(views.len(), 2);
        assert_eq!(views[1].name, "V2");
        assert!(parse_views("CREATE VIEW A AS SELECT R.A FROM S.R R CREATE VIEW B AS SELECT R.A FROM S.R R").is_err());
    }

    #[test]
    fn primed_names_and_and_separators() {
        let v = parse_view(
            r#"CREATE VIEW V1' VE='⊇' AS
SELECT D.IdD, D2.Name (AD=false, AR=true)
FROM S1.Doctor D (RD=false, RR=true),
      S2.Doctor D2 (RD=false, RR=true)
WHERE (D.Speciality= "Cardiologist") (CD=false, CR=true) AND
       (D.IdD = D2.IdD)"#,
        )
        .unwrap();
        assert_eq!(v.name, "V1'");
        assert_eq!(v.where_clause.len(), 2);
        assert!(v.where_clause[1].params.is_default());
    }

    #[test]
    fn standalone_clause() {
        let c = parse_clause("Localization = \"Tunis\"", "Hospital").unwrap();
        assert_eq!(c.lhs, Term::Column(ColumnRef::new("Hospital", "Localization")));
    }
}
