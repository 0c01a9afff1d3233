use std::fmt::Write;

use super::ast::*;

fn params(out: &mut String, params: &EvolutionParams, kind: ComponentKind) {
    if params.is_default() {
        return;
    }
    let (d, r) = kind.keywords();
    let _ = write!(out, " ({d}={}, {r}={})", params.dispensable, params.replaceable);
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn print_term(term: &Term) -> String {
    match term {
        Term::Column(c) => c.to_string(),
        Term::Number(n) => n.into_inner().to_string(),
        Term::String(s) => escape(s),
        Term::Date(d) => format!("DATE '{}'", d.format("%Y-%m-%d")),
    }
}

pub fn print_select_item(item: &SelectItem) -> String {
    let mut out = item.column.to_string();
    params(&mut out, &item.params, ComponentKind::Attribute);
    out
}

pub fn print_from_item(item: &FromItem) -> String {
    let mut out = format!("{} {}", item.relation, item.alias);
    params(&mut out, &item.params, ComponentKind::Relation);
    out
}

pub fn print_clause(clause: &PrimitiveClause) -> String {
    let mut out = format!(
        "({} {} {})",
        print_term(&clause.lhs),
        clause.op.as_str(),
        print_term(&clause.rhs)
    );
    params(&mut out, &clause.params, ComponentKind::Condition);
    out
}

/// Canonical E-SQL text: one component per line, parameter groups only when
/// they differ from the defaults, VE always written.
pub fn print_view(view: &ViewDefinition) -> String {
    let mut out = format!("CREATE VIEW {}", view.name);
    if let Some(cols) = &view.column_list {
        let _ = write!(out, " ({})", cols.join(", "));
    }
    let _ = writeln!(out, " VE='{}' AS", view.ve.symbol());

    for (i, item) in view.select.iter().enumerate() {
        out.push_str(if i == 0 { "SELECT " } else { ",\n       " });
        out.push_str(&print_select_item(item));
    }
    out.push('\n');
    for (i, item) in view.from.iter().enumerate() {
        out.push_str(if i == 0 { "FROM " } else { ",\n     " });
        out.push_str(&print_from_item(item));
    }
    for (i, clause) in view.where_clause.iter().enumerate() {
        out.push_str(if i == 0 { "\nWHERE " } else { "\n  AND " });
        out.push_str(&print_clause(clause));
    }
    out.push_str(";\n");
    out
}
