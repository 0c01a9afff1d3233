use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::esql::{
    self, ColumnRef, Comparator, EvolutionParams, FromItem, PrimitiveClause, SelectItem, Term, ViewDefinition,
};
use crate::kbfile::{
    AttributeDoc, FragmentDoc, JoinDoc, KbDocument, PcDoc, RelationDoc, SourceDoc, ViewDoc, WebServiceDoc,
};
use crate::model::{AttributeRef, ChangeEvent, ExtentRelation, RelationRef, TypeDomain};

/// Size limits for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub sources: usize,
    pub relations_per_source: usize,
    pub attributes_per_relation: usize,
    pub join_constraints: usize,
    pub pc_constraints: usize,
    pub views: usize,
    pub clauses_per_view: usize,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        Self {
            sources: 3,
            relations_per_source: 3,
            attributes_per_relation: 4,
            join_constraints: 6,
            pc_constraints: 4,
            views: 3,
            clauses_per_view: 3,
        }
    }
}

/// Attribute names with a fixed domain, so equally named attributes in
/// different sources line up.
const ATTRIBUTES: [(&str, TypeDomain); 7] = [
    ("id", TypeDomain::Number),
    ("name", TypeDomain::String),
    ("label", TypeDomain::String),
    ("age", TypeDomain::Number),
    ("code", TypeDomain::Number),
    ("city", TypeDomain::String),
    ("since", TypeDomain::Date),
];
const RELATIONS: [&str; 3] = ["Emp", "Dept", "Site"];
const STRINGS: [&str; 3] = ["Tunis", "Lyon", "x\"y"];

type Schema = Vec<(RelationRef, Vec<(String, TypeDomain)>)>;

// Flags lean towards permissive so most trials reach a rewrite.
fn params(rng: &mut ChaCha8Rng) -> EvolutionParams {
    EvolutionParams::new(rng.gen_bool(0.6), rng.gen_bool(0.75))
}

fn literal(rng: &mut ChaCha8Rng, ty: TypeDomain) -> Term {
    match ty {
        TypeDomain::Number => Term::Number((rng.gen_range(-5..100) as f64).try_into().expect("finite")),
        TypeDomain::String => Term::String(STRINGS.choose(rng).expect("nonempty").to_string()),
        TypeDomain::Date => Term::Date(
            chrono::NaiveDate::from_ymd_opt(2000 + rng.gen_range(0..20), rng.gen_range(1..13), rng.gen_range(1..29))
                .expect("valid day"),
        ),
    }
}

fn schema(rng: &mut ChaCha8Rng, spec: &InstanceSpec) -> Schema {
    let limit = spec.attributes_per_relation.min(ATTRIBUTES.len());
    // relations sharing a name across sources mostly share attributes
    let base: Vec<Vec<(&str, TypeDomain)>> = RELATIONS
        .iter()
        .map(|_| {
            let mut attrs = ATTRIBUTES.to_vec();
            attrs.shuffle(rng);
            attrs.truncate(rng.gen_range(limit.min(2)..=limit));
            attrs
        })
        .collect();
    let mut out = Vec::new();
    for s in 1..=rng.gen_range(2..=spec.sources.max(2)) {
        let mut names: Vec<usize> = (0..RELATIONS.len()).collect();
        names.shuffle(rng);
        for i in names.into_iter().take(rng.gen_range(1..=spec.relations_per_source)) {
            let mut attrs = base[i].clone();
            if attrs.len() > 1 && rng.gen_bool(0.3) {
                attrs.remove(rng.gen_range(0..attrs.len()));
            }
            if attrs.len() < limit && rng.gen_bool(0.3) {
                let extra: Vec<_> = ATTRIBUTES.iter().filter(|a| !attrs.contains(a)).collect();
                attrs.push(**extra.choose(rng).expect("fewer than all attributes"));
            }
            let mut attrs: Vec<_> = attrs.into_iter().map(|(a, t)| (a.to_string(), t)).collect();
            attrs.sort();
            out.push((RelationRef::new(format!("S{s}"), RELATIONS[i]), attrs));
        }
    }
    out
}

/// Pairs of equally typed attributes between two relations.
fn typed_pairs(x: &[(String, TypeDomain)], y: &[(String, TypeDomain)]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (a, ta) in x {
        for (b, tb) in y {
            if ta == tb {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Two different relations, most of the time namesakes from two sources.
fn distinct_pair(rng: &mut ChaCha8Rng, schema: &Schema) -> Option<(usize, usize)> {
    let n = schema.len();
    if n < 2 {
        return None;
    }
    let namesakes: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && schema[i].0.relation_name == schema[j].0.relation_name)
        .collect();
    if !namesakes.is_empty() && rng.gen_bool(0.75) {
        return namesakes.choose(rng).copied();
    }
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    Some((i, j))
}

fn joins(rng: &mut ChaCha8Rng, spec: &InstanceSpec, schema: &Schema) -> Vec<JoinDoc> {
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(spec.join_constraints.min(2)..=spec.join_constraints) {
        let Some((i, j)) = distinct_pair(rng, schema) else {
            break;
        };
        let mut pairs = typed_pairs(&schema[i].1, &schema[j].1);
        if pairs.is_empty() {
            continue;
        }
        // prefer same-name equalities, as real join constraints mostly are
        pairs.shuffle(rng);
        pairs.sort_by_key(|(a, b)| a != b);
        let k = rng.gen_range(1..=pairs.len().min(2));
        let jc = JoinDoc {
            id: Some(format!("JC{}", out.len() + 1)),
            left: schema[i].0.to_string(),
            right: schema[j].0.to_string(),
            equalities: pairs.into_iter().take(k).collect(),
        };
        if !out
            .iter()
            .any(|o: &JoinDoc| o.left == jc.left && o.right == jc.right && o.equalities == jc.equalities)
        {
            out.push(jc);
        }
    }
    out
}

fn pcs(rng: &mut ChaCha8Rng, spec: &InstanceSpec, schema: &Schema) -> Vec<PcDoc> {
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(spec.pc_constraints.min(1)..=spec.pc_constraints) {
        let Some((i, j)) = distinct_pair(rng, schema) else {
            break;
        };
        let mut pairs = typed_pairs(&schema[i].1, &schema[j].1);
        pairs.shuffle(rng);
        pairs.sort_by_key(|(a, b)| a != b);
        let mut left_used = BTreeSet::new();
        let mut right_used = BTreeSet::new();
        pairs.retain(|(a, b)| left_used.insert(a.clone()) & right_used.insert(b.clone()));
        if pairs.is_empty() {
            continue;
        }
        let k = rng.gen_range(1..=pairs.len().min(3));
        let (lp, rp): (Vec<String>, Vec<String>) = pairs.into_iter().take(k).unzip();
        let mut left = FragmentDoc {
            relation: schema[i].0.to_string(),
            projection: lp,
            selection: Vec::new(),
        };
        if rng.gen_ratio(1, 10) {
            if let Some((a, t)) = schema[i].1.first() {
                let clause = PrimitiveClause {
                    lhs: Term::Column(ColumnRef::new(schema[i].0.relation_name.clone(), a.clone())),
                    op: Comparator::Ne,
                    rhs: literal(rng, *t),
                    params: EvolutionParams::default(),
                };
                left.selection.push(esql::print_clause(&clause));
            }
        }
        out.push(PcDoc {
            id: Some(format!("PC{}", out.len() + 1)),
            left,
            theta: ["subset", "superset", "equivalent"]
                .choose(rng)
                .expect("nonempty")
                .to_string(),
            right: FragmentDoc {
                relation: schema[j].0.to_string(),
                projection: rp,
                selection: Vec::new(),
            },
        });
    }
    out
}

fn view(rng: &mut ChaCha8Rng, spec: &InstanceSpec, schema: &Schema, name: String) -> ViewDefinition {
    let mut from: Vec<FromItem> = Vec::new();
    for k in 0..rng.gen_range(1..=2) {
        let (r, _) = schema.choose(rng).expect("nonempty schema");
        // one letter per relation; a second use of a relation gets a suffix
        let base = r.relation_name[..1].to_string();
        let alias = if from.iter().any(|f| f.alias == base) {
            format!("{base}{}", k + 5)
        } else {
            base
        };
        from.push(FromItem {
            relation: r.clone(),
            alias,
            params: params(rng),
        });
    }
    let columns: Vec<(ColumnRef, TypeDomain)> = from
        .iter()
        .flat_map(|f| {
            let attrs = &schema.iter().find(|(r, _)| *r == f.relation).expect("declared").1;
            attrs
                .iter()
                .map(move |(a, t)| (ColumnRef::new(f.alias.clone(), a.clone()), *t))
        })
        .collect();
    let mut select = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let (c, _) = columns.choose(rng).expect("relations have attributes");
        select.push(SelectItem {
            column: c.clone(),
            params: params(rng),
        });
    }
    let mut where_clause = Vec::new();
    for _ in 0..rng.gen_range(0..=spec.clauses_per_view) {
        let (c, t) = columns.choose(rng).expect("relations have attributes");
        let same: Vec<_> = columns.iter().filter(|(d, u)| u == t && d != c).collect();
        let rhs = match same.choose(rng) {
            Some((d, _)) if rng.gen_bool(0.3) => Term::Column(d.clone()),
            _ => literal(rng, *t),
        };
        where_clause.push(PrimitiveClause {
            lhs: Term::Column(c.clone()),
            op: *Comparator::ALL.choose(rng).expect("nonempty"),
            rhs,
            params: params(rng),
        });
    }
    ViewDefinition {
        name,
        column_list: None,
        ve: *[
            ExtentRelation::Equivalent,
            ExtentRelation::Superset,
            ExtentRelation::Subset,
            ExtentRelation::Indifferent,
            ExtentRelation::Indifferent,
        ]
        .choose(rng)
        .expect("nonempty"),
        select,
        from,
        where_clause,
    }
}

fn event(rng: &mut ChaCha8Rng, schema: &Schema, views: &[ViewDefinition]) -> ChangeEvent {
    let v = views.choose(rng).expect("at least one view");
    // mostly hit something a view uses
    if rng.gen_ratio(9, 10) {
        if rng.gen_bool(0.5) {
            let c = v.columns().collect::<Vec<_>>();
            let c = c.choose(rng).expect("views select something");
            let f = v.from_item(&c.alias).expect("declared");
            return ChangeEvent::DeleteAttribute(f.relation.attribute(c.attribute.clone()));
        }
        return ChangeEvent::DeleteRelation(v.from.choose(rng).expect("nonempty").relation.clone());
    }
    let (r, attrs) = schema.choose(rng).expect("nonempty schema");
    if rng.gen_bool(0.5) {
        let (a, _) = attrs.choose(rng).expect("nonempty");
        ChangeEvent::DeleteAttribute(AttributeRef::new(
            r.source_id.clone(),
            r.relation_name.clone(),
            a.clone(),
        ))
    } else {
        ChangeEvent::DeleteRelation(r.clone())
    }
}

/// A random knowledge base within `spec` plus a deletion of one of its
/// components. Deterministic in `seed`.
pub fn generate_instance(seed: u64, spec: &InstanceSpec) -> (KbDocument, ChangeEvent) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = schema(&mut rng, spec);
    let join_constraints = joins(&mut rng, spec, &schema);
    let pc_constraints = pcs(&mut rng, spec, &schema);
    let views: Vec<ViewDefinition> = (1..=rng.gen_range(1..=spec.views))
        .map(|i| view(&mut rng, spec, &schema, format!("V{i}")))
        .collect();
    let event = event(&mut rng, &schema, &views);

    let mut web_services = Vec::new();
    let mut remaining: Vec<&ViewDefinition> = views.iter().collect();
    while !remaining.is_empty() {
        let take = rng.gen_range(1..=remaining.len());
        let mine: Vec<&ViewDefinition> = remaining.drain(..take).collect();
        let sources: BTreeSet<String> = mine
            .iter()
            .flat_map(|v| v.from.iter().map(|f| f.relation.source_id.clone()))
            .collect();
        web_services.push(WebServiceDoc {
            id: format!("WS{}", web_services.len() + 1),
            sources: sources.into_iter().collect(),
            views: mine.iter().map(|v| v.name.clone()).collect(),
            replacements: Vec::new(),
        });
    }
    // earlier services may fall back on later ones
    let ids: Vec<String> = web_services.iter().map(|w| w.id.clone()).collect();
    for (i, ws) in web_services.iter_mut().enumerate() {
        ws.replacements = ids[i + 1..].to_vec();
    }

    let mut sources: Vec<SourceDoc> = Vec::new();
    for (r, attrs) in &schema {
        let relation = RelationDoc {
            name: r.relation_name.clone(),
            attributes: attrs
                .iter()
                .map(|(name, ty)| AttributeDoc {
                    name: name.clone(),
                    ty: *ty,
                })
                .collect(),
        };
        match sources.iter_mut().find(|s| s.id == r.source_id) {
            Some(s) => s.relations.push(relation),
            None => sources.push(SourceDoc {
                id: r.source_id.clone(),
                relations: vec![relation],
            }),
        }
    }
    let doc = KbDocument {
        sources,
        join_constraints,
        pc_constraints,
        web_services,
        views: views
            .iter()
            .map(|v| ViewDoc {
                id: v.name.clone(),
                text: esql::print_view(v),
            })
            .collect(),
    };
    (doc, event)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kbfile::load_document;

    #[test]
    fn same_seed_same_instance() {
        let spec = InstanceSpec::default();
        assert_eq!(generate_instance(42, &spec), generate_instance(42, &spec));
        assert_ne!(generate_instance(1, &spec).0, generate_instance(2, &spec).0);
    }

    #[test]
    fn generated_instances_register() {
        let spec = InstanceSpec::default();
        for seed in 0..1000 {
            let (doc, event) = generate_instance(seed, &spec);
            let kb = load_document(&doc).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            assert!(kb.wsmkb.catalog().event_target_exists(&event), "seed {seed}");
            assert!(kb.warnings.is_empty(), "seed {seed}: {:?}", kb.warnings);
        }
    }
}
