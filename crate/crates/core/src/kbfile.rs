//! JSON knowledge-base documents: source schemas, constraints, web services
//! and E-SQL view text in one file. See `docs/kb-schema.json`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::esql;
use crate::model::{RelationRef, RelationSchema, SourceSchema, TypeDomain, WebService};
use crate::wsmkb::{
    Containment, Fragment, JoinConstraint, PcConstraint, ReplacementRule, TypeIntegrityConstraint, Wsmkb,
};
use crate::wsvkb::{ViewRecord, Wsvkb};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KbDocument {
    #[serde(default)]
    pub sources: Vec<SourceDoc>,
    #[serde(default)]
    pub join_constraints: Vec<JoinDoc>,
    #[serde(default)]
    pub pc_constraints: Vec<PcDoc>,
    #[serde(default)]
    pub web_services: Vec<WebServiceDoc>,
    #[serde(default)]
    pub views: Vec<ViewDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceDoc {
    pub id: String,
    pub relations: Vec<RelationDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDoc {
    pub name: String,
    pub attributes: Vec<AttributeDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoinDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub left: String,
    pub right: String,
    pub equalities: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentDoc {
    pub relation: String,
    pub projection: Vec<String>,
    /// Conditions over the relation's attributes, e.g. `"Age > 60"`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selection: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub left: FragmentDoc,
    /// `subset`, `superset`, `equivalent`, or one of `⊆ ⊇ ≡`.
    pub theta: String,
    pub right: FragmentDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WebServiceDoc {
    pub id: String,
    pub sources: Vec<String>,
    pub views: Vec<String>,
    #[serde(default)]
    pub replacements: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewDoc {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("no such file: {0}")]
    NotFound(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{location}: {message}")]
    Invalid { location: String, message: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub sources: usize,
    pub relations: usize,
    pub type_constraints: usize,
    pub join_constraints: usize,
    pub pc_constraints: usize,
    pub web_services: usize,
    pub views: usize,
}

impl fmt::Display for LoadStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} sources, {} relations, {} TCs, {} JCs, {} PCs, {} web services, {} views",
            self.sources,
            self.relations,
            self.type_constraints,
            self.join_constraints,
            self.pc_constraints,
            self.web_services,
            self.views
        )
    }
}

#[derive(Debug, Clone)]
pub struct LoadedKb {
    pub wsmkb: Wsmkb,
    pub wsvkb: Wsvkb,
    pub stats: LoadStats,
    pub warnings: Vec<String>,
}

pub fn load_path(path: impl AsRef<Path>) -> Result<LoadedKb, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => LoadError::NotFound(path.display().to_string()),
        _ => LoadError::Io {
            path: path.display().to_string(),
            source,
        },
    })?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<LoadedKb, LoadError> {
    load_document(&serde_json::from_str(text)?)
}

fn invalid(location: String) -> impl FnOnce(String) -> LoadError {
    move |message| LoadError::Invalid { location, message }
}

fn relation_ref(text: &str) -> Result<RelationRef, String> {
    text.parse().map_err(|e: crate::model::ModelError| e.to_string())
}

fn theta(text: &str) -> Result<Containment, String> {
    match text {
        "subset" | "⊆" => Ok(Containment::Subset),
        "superset" | "⊇" => Ok(Containment::Superset),
        "equivalent" | "≡" => Ok(Containment::Equivalent),
        other => Err(format!("unknown theta {other:?}")),
    }
}

fn fragment(doc: &FragmentDoc) -> Result<Fragment, String> {
    let relation = relation_ref(&doc.relation)?;
    let selection = doc
        .selection
        .iter()
        .map(|c| esql::parse_clause(c, &relation.relation_name).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    Ok(Fragment {
        relation,
        projection: doc.projection.clone(),
        selection,
    })
}

fn label(section: &str, index: usize, id: Option<&str>) -> String {
    match id {
        Some(id) => format!("{section}[{index}] ({id})"),
        None => format!("{section}[{index}]"),
    }
}

/// Registers everything in dependency order: sources and their type
/// constraints, joins, containments, web services, views, the web
/// service/view map, and finally replacement rules.
pub fn load_document(doc: &KbDocument) -> Result<LoadedKb, LoadError> {
    let mut kb = Wsmkb::new();
    let mut stats = LoadStats::default();
    let mut sources = std::collections::BTreeSet::new();
    for (i, s) in doc.sources.iter().enumerate() {
        let at = || label("sources", i, Some(&s.id));
        if !sources.insert(s.id.as_str()) {
            return Err(invalid(at())("duplicate source id".into()));
        }
        let relations = s
            .relations
            .iter()
            .map(|r| {
                RelationSchema::new(
                    r.name.clone(),
                    r.attributes.iter().map(|a| (a.name.clone(), a.ty)).collect(),
                )
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| invalid(at())(e.to_string()))?;
        let schema = SourceSchema::new(s.id.clone(), relations).map_err(|e| invalid(at())(e.to_string()))?;
        kb.register(schema.clone()).map_err(|e| invalid(at())(e.to_string()))?;
        for r in &schema.relations {
            kb.register(TypeIntegrityConstraint::from_schema(&schema.source_id, r))
                .map_err(|e| invalid(at())(e.to_string()))?;
            stats.type_constraints += 1;
        }
        stats.sources += 1;
        stats.relations += schema.relations.len();
    }
    for (i, j) in doc.join_constraints.iter().enumerate() {
        let at = label("join_constraints", i, j.id.as_deref());
        let jc = (|| {
            Ok::<_, String>(JoinConstraint {
                left: relation_ref(&j.left)?,
                right: relation_ref(&j.right)?,
                equalities: j.equalities.clone(),
            })
        })()
        .map_err(invalid(at.clone()))?;
        kb.register(jc).map_err(|e| invalid(at)(e.to_string()))?;
        stats.join_constraints += 1;
    }
    for (i, p) in doc.pc_constraints.iter().enumerate() {
        let at = label("pc_constraints", i, p.id.as_deref());
        let pc = (|| {
            Ok::<_, String>(PcConstraint {
                left: fragment(&p.left)?,
                theta: theta(&p.theta)?,
                right: fragment(&p.right)?,
            })
        })()
        .map_err(invalid(at.clone()))?;
        kb.register(pc).map_err(|e| invalid(at)(e.to_string()))?;
        stats.pc_constraints += 1;
    }
    for (i, w) in doc.web_services.iter().enumerate() {
        let ws = WebService {
            ws_id: w.id.clone(),
            source_ids: w.sources.iter().cloned().collect(),
            view_ids: w.views.clone(),
            replacements: Vec::new(),
        };
        kb.register(ws)
            .map_err(|e| invalid(label("web_services", i, Some(&w.id)))(e.to_string()))?;
        stats.web_services += 1;
    }
    let mut vkb = Wsvkb::new();
    for (i, v) in doc.views.iter().enumerate() {
        let at = || label("views", i, Some(&v.id));
        let record = ViewRecord::parse(&v.text).map_err(|e| invalid(at())(e.to_string()))?;
        if record.view_id != v.id {
            return Err(invalid(at())(format!("text defines view {}", record.view_id)));
        }
        vkb.add_view(&kb, record).map_err(|e| invalid(at())(e.to_string()))?;
        stats.views += 1;
    }
    for (i, w) in doc.web_services.iter().enumerate() {
        let at = || label("web_services", i, Some(&w.id));
        vkb.map_web_service(&w.id, w.views.clone())
            .map_err(|e| invalid(at())(e.to_string()))?;
        if !w.replacements.is_empty() {
            kb.register(ReplacementRule {
                ws_id: w.id.clone(),
                substitutes: w.replacements.clone(),
            })
            .map_err(|e| invalid(at())(e.to_string()))?;
        }
    }
    let warnings = vkb.consistency_warnings(&kb);
    Ok(LoadedKb {
        wsmkb: kb,
        wsvkb: vkb,
        stats,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = include_str!("../fixtures/healthcare.kb.json");

    #[test]
    fn fixture_counts() {
        let kb = load_str(FIXTURE).unwrap();
        assert_eq!(kb.stats.sources, 3);
        assert_eq!(kb.stats.type_constraints, 20);
        assert_eq!(kb.stats.join_constraints, 11);
        assert_eq!(kb.stats.pc_constraints, 5);
        assert_eq!(kb.stats.views, 6);
        assert_eq!(kb.wsmkb.replacement_chain("WS1").unwrap(), ["WS2", "WS3"]);
    }

    #[test]
    fn fixture_has_no_warnings() {
        assert_eq!(load_str(FIXTURE).unwrap().warnings, Vec::<String>::new());
    }

    #[test]
    fn errors_carry_location() {
        let mut doc: KbDocument = serde_json::from_str(FIXTURE).unwrap();
        doc.join_constraints[2].equalities = vec![("IdD".into(), "Name".into())];
        let err = load_document(&doc).unwrap_err().to_string();
        assert!(err.starts_with("join_constraints[2] (JC3): "), "{err}");

        let mut doc: KbDocument = serde_json::from_str(FIXTURE).unwrap();
        doc.pc_constraints[0].theta = "bigger".into();
        assert!(load_document(&doc)
            .unwrap_err()
            .to_string()
            .starts_with("pc_constraints[0] (PC1)"));
    }

    #[test]
    fn selection_fragments_parse() {
        let mut doc: KbDocument = serde_json::from_str(FIXTURE).unwrap();
        doc.pc_constraints[0].left.selection = vec!["Age > 60".into()];
        let kb = load_document(&doc).unwrap();
        assert!(!kb.wsmkb.pc_constraints()[0].is_projection_only());
    }

    #[test]
    fn document_round_trips_through_json() {
        let doc: KbDocument = serde_json::from_str(FIXTURE).unwrap();
        let again: KbDocument = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(doc, again);
    }
}
