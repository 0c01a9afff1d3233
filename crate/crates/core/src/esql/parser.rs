use std::collections::BTreeSet;

use chrono::NaiveDate;
use ordered_float::NotNan;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::EsqlError;
use crate::model::{ExtentRelation, RelationRef};

const RESERVED: &[&str] = &["CREATE", "VIEW", "VE", "AS", "SELECT", "FROM", "WHERE", "AND", "DATE"];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.iter().any(|k| k.eq_ignore_ascii_case(word))
}

/// Column reference before alias resolution; `alias` is `None` when the
/// attribute was written unqualified.
#[derive(Debug)]
struct RawColumn {
    alias: Option<String>,
    attribute: String,
    line: usize,
    column: usize,
}

enum RawTerm {
    Column(RawColumn),
    Literal(Term),
}

struct RawClause {
    lhs: RawTerm,
    op: Comparator,
    rhs: RawTerm,
    params: EvolutionParams,
    line: usize,
    column: usize,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, EsqlError> {
        Ok(Self {
            tokens: tokenize(src)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> EsqlError {
        let t = self.peek();
        EsqlError::syntax(t.line, t.column, msg)
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::DqString(_) => "string literal".into(),
            Tok::SqString(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`<>`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
        }
    }

    fn unexpected(&self, expected: &str) -> EsqlError {
        self.error(format!(
            "expected {expected}, found {}",
            Self::describe(&self.peek().tok)
        ))
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), EsqlError> {
        if self.is_keyword(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), EsqlError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    /// Any word, reserved or not (positions after a `.`).
    fn word(&mut self, what: &str) -> Result<String, EsqlError> {
        match &self.peek().tok {
            Tok::Word(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// A word that is not a reserved keyword.
    fn identifier(&mut self, what: &str) -> Result<String, EsqlError> {
        match &self.peek().tok {
            Tok::Word(w) if !is_reserved(w) => {
                let w = w.clone();
                self.advance();
                Ok(w)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn view(&mut self) -> Result<ViewDefinition, EsqlError> {
        self.expect_keyword("CREATE")?;
        self.expect_keyword("VIEW")?;
        let name = self.identifier("view name")?;

        let column_list = if self.eat(&Tok::LParen) {
            let mut cols = vec![self.identifier("column name")?];
            while self.eat(&Tok::Comma) {
                cols.push(self.identifier("column name")?);
            }
            self.expect(&Tok::RParen, "`)`")?;
            Some(cols)
        } else {
            None
        };

        let ve = if self.is_keyword("VE") {
            self.advance();
            self.expect(&Tok::Eq, "`=`")?;
            match &self.peek().tok {
                Tok::SqString(sym) => {
                    let ve = ExtentRelation::from_symbol(sym.trim()).ok_or_else(|| {
                        self.error(format!("unknown view extension '{sym}', expected one of ≡ ⊇ ⊆ ≈"))
                    })?;
                    self.advance();
                    ve
                }
                _ => return Err(self.unexpected("quoted view extension symbol")),
            }
        } else {
            ExtentRelation::Equivalent
        };

        self.expect_keyword("AS")?;
        self.expect_keyword("SELECT")?;
        let mut raw_select = vec![self.select_item()?];
        while self.eat(&Tok::Comma) {
            raw_select.push(self.select_item()?);
        }

        self.expect_keyword("FROM")?;
        let mut from = vec![self.relation_item()?];
        while self.eat(&Tok::Comma) {
            from.push(self.relation_item()?);
        }

        let mut raw_where = Vec::new();
        if self.is_keyword("WHERE") {
            self.advance();
            raw_where.push(self.clause()?);
            loop {
                if self.eat(&Tok::Comma)
                    || (self.is_keyword("AND") && {
                        self.advance();
                        true
                    })
                {
                    raw_where.push(self.clause()?);
                } else {
                    break;
                }
            }
        }

        // semantic pass
        let mut aliases = BTreeSet::new();
        for item in &from {
            if !aliases.insert(item.alias.as_str()) {
                return Err(EsqlError::Semantic(format!(
                    "duplicate alias `{}` in view {name}",
                    item.alias
                )));
            }
        }
        let resolve = |raw: RawColumn| -> Result<ColumnRef, EsqlError> {
            let alias = match raw.alias {
                Some(alias) => alias,
                None if from.len() == 1 => from[0].alias.clone(),
                None => {
                    return Err(EsqlError::Semantic(format!(
                        "unqualified attribute `{}` at line {}, column {} is ambiguous with several FROM items",
                        raw.attribute, raw.line, raw.column
                    )))
                }
            };
            if !aliases.contains(alias.as_str()) {
                return Err(EsqlError::Semantic(format!(
                    "undeclared alias `{alias}` at line {}, column {}",
                    raw.line, raw.column
                )));
            }
            Ok(ColumnRef::new(alias, raw.attribute))
        };
        let resolve_term = |raw: RawTerm| -> Result<Term, EsqlError> {
            match raw {
                RawTerm::Column(c) => Ok(Term::Column(resolve(c)?)),
                RawTerm::Literal(t) => Ok(t),
            }
        };

        let mut select = Vec::with_capacity(raw_select.len());
        for (column, params) in raw_select {
            select.push(SelectItem {
                column: resolve(column)?,
                params,
            });
        }
        let mut where_clause = Vec::with_capacity(raw_where.len());
        for raw in raw_where {
            let (line, column) = (raw.line, raw.column);
            let clause = PrimitiveClause {
                lhs: resolve_term(raw.lhs)?,
                op: raw.op,
                rhs: resolve_term(raw.rhs)?,
                params: raw.params,
            };
            if clause.columns().next().is_none() {
                return Err(EsqlError::Semantic(format!(
                    "condition at line {line}, column {column} compares two literals"
                )));
            }
            where_clause.push(clause);
        }
        if let Some(cols) = &column_list {
            if cols.len() != select.len() {
                return Err(EsqlError::Semantic(format!(
                    "view {name} declares {} columns but selects {} attributes",
                    cols.len(),
                    select.len()
                )));
            }
        }

        Ok(ViewDefinition {
            name,
            column_list,
            ve,
            select,
            from,
            where_clause,
        })
    }

    fn column(&mut self) -> Result<RawColumn, EsqlError> {
        let (line, column) = (self.peek().line, self.peek().column);
        let first = self.identifier("attribute")?;
        if self.eat(&Tok::Dot) {
            let attribute = self.word("attribute name")?;
            Ok(RawColumn {
                alias: Some(first),
                attribute,
                line,
                column,
            })
        } else {
            Ok(RawColumn {
                alias: None,
                attribute: first,
                line,
                column,
            })
        }
    }

    fn select_item(&mut self) -> Result<(RawColumn, EvolutionParams), EsqlError> {
        let column = self.column()?;
        let params = self.params(ComponentKind::Attribute)?;
        Ok((column, params))
    }

    fn relation_item(&mut self) -> Result<FromItem, EsqlError> {
        let source = self.identifier("source id")?;
        self.expect(&Tok::Dot, "`.` between source and relation")?;
        let relation = self.word("relation name")?;
        let alias = match &self.peek().tok {
            Tok::Word(w) if !is_reserved(w) => {
                let w = w.clone();
                self.advance();
                w
            }
            _ => relation.clone(),
        };
        let params = self.params(ComponentKind::Relation)?;
        Ok(FromItem {
            relation: RelationRef::new(source, relation),
            alias,
            params,
        })
    }

    /// True when the upcoming tokens are `( <XD|XR> =`.
    fn at_param_group(&self) -> bool {
        self.peek().tok == Tok::LParen
            && matches!(self.peek_at(1), Tok::Word(w) if w.len() == 2 && is_param_key(w))
            && *self.peek_at(2) == Tok::Eq
    }

    fn params(&mut self, kind: ComponentKind) -> Result<EvolutionParams, EsqlError> {
        let mut params = EvolutionParams::default();
        if !self.at_param_group() {
            return Ok(params);
        }
        self.advance();
        let (d_kw, r_kw) = kind.keywords();
        let (mut seen_d, mut seen_r) = (false, false);
        loop {
            let key_tok = self.peek().clone();
            let key = self.word("evolution parameter")?;
            let is_d = key.eq_ignore_ascii_case(d_kw);
            let is_r = key.eq_ignore_ascii_case(r_kw);
            if !is_d && !is_r {
                return Err(EsqlError::syntax(
                    key_tok.line,
                    key_tok.column,
                    format!("expected {d_kw} or {r_kw}, found `{key}`"),
                ));
            }
            if (is_d && seen_d) || (is_r && seen_r) {
                return Err(EsqlError::syntax(
                    key_tok.line,
                    key_tok.column,
                    format!("parameter {key} given twice"),
                ));
            }
            self.expect(&Tok::Eq, "`=`")?;
            let value = if self.is_keyword("true") {
                true
            } else if self.is_keyword("false") {
                false
            } else {
                return Err(self.unexpected("true or false"));
            };
            self.advance();
            if is_d {
                seen_d = true;
                params.dispensable = value;
            } else {
                seen_r = true;
                params.replaceable = value;
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RParen, "`)`")?;
        Ok(params)
    }

    fn clause(&mut self) -> Result<RawClause, EsqlError> {
        let (line, column) = (self.peek().line, self.peek().column);
        let parenthesized = !self.at_param_group() && self.eat(&Tok::LParen);
        let lhs = self.term()?;
        let op = match self.peek().tok {
            Tok::Eq => Comparator::Eq,
            Tok::Ne => Comparator::Ne,
            Tok::Lt => Comparator::Lt,
            Tok::Le => Comparator::Le,
            Tok::Gt => Comparator::Gt,
            Tok::Ge => Comparator::Ge,
            _ => return Err(self.unexpected("comparison operator")),
        };
        self.advance();
        let rhs = self.term()?;
        if parenthesized {
            self.expect(&Tok::RParen, "`)`")?;
        }
        let params = self.params(ComponentKind::Condition)?;
        Ok(RawClause {
            lhs,
            op,
            rhs,
            params,
            line,
            column,
        })
    }

    fn term(&mut self) -> Result<RawTerm, EsqlError> {
        let tok = self.peek().clone();
        match &tok.tok {
            Tok::Number(n) => {
                let value: f64 = n.parse().map_err(|_| self.error(format!("invalid number `{n}`")))?;
                let value = NotNan::new(value)
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.error(format!("number `{n}` out of range")))?;
                self.advance();
                Ok(RawTerm::Literal(Term::Number(value)))
            }
            Tok::DqString(s) => {
                self.advance();
                Ok(RawTerm::Literal(Term::String(s.clone())))
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("DATE") => {
                self.advance();
                match &self.peek().tok {
                    Tok::SqString(s) | Tok::DqString(s) => {
                        let date = NaiveDate::parse_from_str(s, "%Y-%m-%d")
                            .map_err(|_| self.error(format!("invalid date `{s}`, expected YYYY-MM-DD")))?;
                        self.advance();
                        Ok(RawTerm::Literal(Term::Date(date)))
                    }
                    _ => Err(self.unexpected("quoted date after DATE")),
                }
            }
            Tok::Word(_) => Ok(RawTerm::Column(self.column()?)),
            _ => Err(self.unexpected("attribute or literal")),
        }
    }
}

fn is_param_key(word: &str) -> bool {
    ["AD", "AR", "RD", "RR", "CD", "CR"]
        .iter()
        .any(|k| k.eq_ignore_ascii_case(word))
}

/// Parses a single `CREATE VIEW` statement; the trailing `;` is optional.
pub fn parse_view(src: &str) -> Result<ViewDefinition, EsqlError> {
    let mut parser = Parser::new(src)?;
    let view = parser.view()?;
    parser.eat(&Tok::Semi);
    if parser.peek().tok != Tok::Eof {
        return Err(parser.unexpected("end of input"));
    }
    Ok(view)
}

/// Parses a file of `;`-separated `CREATE VIEW` statements.
pub fn parse_views(src: &str) -> Result<Vec<ViewDefinition>, EsqlError> {
    let mut parser = Parser::new(src)?;
    let mut views = Vec::new();
    while parser.peek().tok != Tok::Eof {
        views.push(parser.view()?);
        if !parser.eat(&Tok::Semi) && parser.peek().tok != Tok::Eof {
            return Err(parser.unexpected("`;`"));
        }
    }
    Ok(views)
}

/// Parses a stand-alone condition in which unqualified attributes bind to
/// `default_alias`.
pub fn parse_clause(src: &str, default_alias: &str) -> Result<PrimitiveClause, EsqlError> {
    let mut parser = Parser::new(src)?;
    let raw = parser.clause()?;
    if parser.peek().tok != Tok::Eof {
        return Err(parser.unexpected("end of condition"));
    }
    let resolve = |t: RawTerm| match t {
        RawTerm::Column(c) => Term::Column(ColumnRef::new(
            c.alias.unwrap_or_else(|| default_alias.to_string()),
            c.attribute,
        )),
        RawTerm::Literal(t) => t,
    };
    let clause = PrimitiveClause {
        lhs: resolve(raw.lhs),
        op: raw.op,
        rhs: resolve(raw.rhs),
        params: raw.params,
    };
    if clause.columns().next().is_none() {
        return Err(EsqlError::Semantic("condition compares two literals".into()));
    }
    Ok(clause)
}
