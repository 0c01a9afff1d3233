//! View knowledge base: E-SQL view definitions keyed by id and the map from
//! web services to the views they call.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::esql::{self, EsqlError, Term, ViewDefinition};
use crate::model::{Catalog, Component, TypeDomain};
use crate::wsmkb::Wsmkb;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ViewStoreError {
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("view {view}: {message}")]
    Validation { view: String, message: String },
    #[error("unknown view {0}")]
    UnknownView(String),
    #[error(transparent)]
    Parse(#[from] EsqlError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewRecord {
    pub view_id: String,
    pub definition: ViewDefinition,
    /// Text as registered; kept for diagnostics only.
    pub source_text: String,
}

impl ViewRecord {
    /// Parses `text`; the id is the view's name.
    pub fn parse(text: &str) -> Result<Self, EsqlError> {
        let definition = esql::parse_view(text)?;
        Ok(Self {
            view_id: definition.name.clone(),
            definition,
            source_text: text.to_string(),
        })
    }

    pub fn from_definition(definition: ViewDefinition) -> Self {
        Self {
            view_id: definition.name.clone(),
            source_text: esql::print_view(&definition),
            definition,
        }
    }
}

/// Checks that every relation and attribute a definition mentions exists in
/// `catalog`, and that each condition compares values of one type.
pub fn validate_definition(catalog: &Catalog, def: &ViewDefinition) -> Result<(), String> {
    if def.select.is_empty() {
        return Err("empty SELECT".into());
    }
    if def.from.is_empty() {
        return Err("empty FROM".into());
    }
    let mut aliases = BTreeSet::new();
    for item in &def.from {
        if !catalog.has_relation(&item.relation) {
            return Err(format!("relation {} does not exist", item.relation));
        }
        if !aliases.insert(item.alias.as_str()) {
            return Err(format!("duplicate alias {}", item.alias));
        }
    }
    if let Some(cols) = &def.column_list {
        if cols.len() != def.select.len() {
            return Err("column list arity differs from SELECT".into());
        }
    }
    let column_type = |c: &esql::ColumnRef| -> Result<TypeDomain, String> {
        let item = def
            .from_item(&c.alias)
            .ok_or_else(|| format!("undeclared alias {}", c.alias))?;
        catalog
            .attribute_type(&item.relation.attribute(c.attribute.clone()))
            .ok_or_else(|| format!("attribute {}.{} does not exist", item.relation, c.attribute))
    };
    for item in &def.select {
        column_type(&item.column)?;
    }
    for clause in &def.where_clause {
        let ty = |t: &Term| match t {
            Term::Column(c) => column_type(c),
            lit => Ok(lit.literal_type().expect("literal")),
        };
        let (lt, rt) = (ty(&clause.lhs)?, ty(&clause.rhs)?);
        if clause.columns().next().is_none() {
            return Err(format!("condition {} has no attribute", esql::print_clause(clause)));
        }
        if lt != rt {
            return Err(format!(
                "condition {} compares {lt} with {rt}",
                esql::print_clause(clause)
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct Wsvkb {
    views: BTreeMap<String, ViewRecord>,
    invalid: BTreeSet<String>,
    ws_views: BTreeMap<String, Vec<String>>,
}

impl Wsvkb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_view(&mut self, kb: &Wsmkb, record: ViewRecord) -> Result<(), ViewStoreError> {
        if self.views.contains_key(&record.view_id) {
            return Err(ViewStoreError::DuplicateId(record.view_id));
        }
        validate_definition(kb.catalog(), &record.definition).map_err(|message| ViewStoreError::Validation {
            view: record.view_id.clone(),
            message,
        })?;
        self.views.insert(record.view_id.clone(), record);
        Ok(())
    }

    /// Records which views a web service calls.
    pub fn map_web_service(&mut self, ws_id: &str, view_ids: Vec<String>) -> Result<(), ViewStoreError> {
        if let Some(missing) = view_ids.iter().find(|v| !self.views.contains_key(*v)) {
            return Err(ViewStoreError::UnknownView(missing.clone()));
        }
        match self.ws_views.get(ws_id) {
            Some(existing) if *existing == view_ids => Ok(()),
            Some(_) => Err(ViewStoreError::DuplicateId(ws_id.to_string())),
            None => {
                self.ws_views.insert(ws_id.to_string(), view_ids);
                Ok(())
            }
        }
    }

    pub fn view(&self, view_id: &str) -> Option<&ViewRecord> {
        self.views.get(view_id)
    }

    pub fn views(&self) -> impl Iterator<Item = &ViewRecord> {
        self.views.values()
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn ws_view_map(&self) -> &BTreeMap<String, Vec<String>> {
        &self.ws_views
    }

    pub fn views_of_web_service(&self, ws_id: &str) -> Option<&[String]> {
        self.ws_views.get(ws_id).map(Vec::as_slice)
    }

    /// Views whose FROM lists a relation, or whose SELECT/WHERE mention an
    /// attribute.
    pub fn views_referencing(&self, target: &Component) -> BTreeSet<String> {
        self.views
            .values()
            .filter(|r| r.definition.references(target))
            .map(|r| r.view_id.clone())
            .collect()
    }

    pub fn web_services_of_view(&self, view_id: &str) -> Result<BTreeSet<String>, ViewStoreError> {
        if !self.views.contains_key(view_id) {
            return Err(ViewStoreError::UnknownView(view_id.to_string()));
        }
        Ok(self
            .ws_views
            .iter()
            .filter(|(_, views)| views.iter().any(|v| v == view_id))
            .map(|(ws, _)| ws.clone())
            .collect())
    }

    /// Stores a synchronized definition; the view becomes valid again.
    pub fn replace_definition(&mut self, view_id: &str, definition: ViewDefinition) -> Result<(), ViewStoreError> {
        let record = self
            .views
            .get_mut(view_id)
            .ok_or_else(|| ViewStoreError::UnknownView(view_id.to_string()))?;
        record.source_text = esql::print_view(&definition);
        record.definition = definition;
        self.invalid.remove(view_id);
        Ok(())
    }

    /// Flags a view that could not be synchronized; its definition is kept.
    pub fn mark_invalid(&mut self, view_id: &str) -> Result<(), ViewStoreError> {
        if !self.views.contains_key(view_id) {
            return Err(ViewStoreError::UnknownView(view_id.to_string()));
        }
        self.invalid.insert(view_id.to_string());
        Ok(())
    }

    /// Not flagged invalid and consistent with the current schemas.
    pub fn is_valid(&self, kb: &Wsmkb, view_id: &str) -> bool {
        !self.invalid.contains(view_id)
            && self
                .views
                .get(view_id)
                .is_some_and(|r| validate_definition(kb.catalog(), &r.definition).is_ok())
    }

    /// Web services whose declared sources do not match the sources their
    /// views read. Reported, never rejected.
    pub fn consistency_warnings(&self, kb: &Wsmkb) -> Vec<String> {
        let mut out = Vec::new();
        for ws in kb.web_services() {
            let used: BTreeSet<&str> = self
                .ws_views
                .get(&ws.ws_id)
                .into_iter()
                .flatten()
                .filter_map(|v| self.views.get(v))
                .flat_map(|r| r.definition.from.iter().map(|f| f.relation.source_id.as_str()))
                .collect();
            let declared: BTreeSet<&str> = ws.source_ids.iter().map(String::as_str).collect();
            for s in used.difference(&declared) {
                out.push(format!(
                    "web service {} reads source {s} through its views but does not declare it",
                    ws.ws_id
                ));
            }
            for s in declared.difference(&used) {
                out.push(format!(
                    "web service {} declares source {s} but none of its views read it",
                    ws.ws_id
                ));
            }
            let mapped = self.ws_views.get(&ws.ws_id);
            if mapped.is_some_and(|m| *m != ws.view_ids) {
                out.push(format!(
                    "web service {} view list differs between the knowledge bases",
                    ws.ws_id
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AttributeRef, RelationRef, RelationSchema, SourceSchema, TypeDomain::*};

    fn kb() -> Wsmkb {
        let mut kb = Wsmkb::new();
        let rel = |name: &str, attrs: &[(&str, TypeDomain)]| {
            RelationSchema::new(name, attrs.iter().map(|(n, t)| (n.to_string(), *t)).collect()).unwrap()
        };
        kb.register(
            SourceSchema::new(
                "S1",
                vec![
                    rel("Doctor", &[("IdD", Number), ("Name", String), ("Speciality", String)]),
                    rel(
                        "Hospital",
                        &[("IdH", Number), ("Name", String), ("Localization", String)],
                    ),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        kb.register(SourceSchema::new("S3", vec![rel("Service", &[("IdS", Number), ("Speciality", String)])]).unwrap())
            .unwrap();
        kb
    }

    const V1: &str = r#"CREATE VIEW V1 VE='⊇' AS
SELECT D.IdD, D.Name (AD=false, AR=true)
FROM S1.Doctor D (RD=false, RR=true)
WHERE (D.Speciality= "Cardiologist") (CD=false, CR=true);"#;

    const V2: &str = r#"CREATE VIEW V2 VE='⊆' AS
SELECT H.IdH, H.Name (AD=false, AR=true)
FROM S1.Hospital H (RD=false, RR=true)
WHERE (H.Localization= "Tunis") (CD=false, CR=true);"#;

    fn store() -> (Wsmkb, Wsvkb) {
        let kb = kb();
        let mut vkb = Wsvkb::new();
        vkb.add_view(&kb, ViewRecord::parse(V1).unwrap()).unwrap();
        vkb.add_view(&kb, ViewRecord::parse(V2).unwrap()).unwrap();
        (kb, vkb)
    }

    #[test]
    fn references() {
        let (_, vkb) = store();
        let doctor = RelationRef::new("S1", "Doctor");
        assert!(vkb.views_referencing(&Component::Relation(doctor)).contains("V1"));
        assert_eq!(
            vkb.views_referencing(&Component::Attribute(AttributeRef::new("S1", "Doctor", "Name"))),
            ["V1".to_string()].into_iter().collect()
        );
        assert_eq!(
            vkb.views_referencing(&Component::Relation(RelationRef::new("S1", "Hospital"))),
            ["V2".to_string()].into_iter().collect()
        );
        assert!(vkb
            .views_referencing(&Component::Attribute(AttributeRef::new("S3", "Service", "IdS")))
            .is_empty());
        // same attribute name in another relation is not a reference
        assert_eq!(
            vkb.views_referencing(&Component::Attribute(AttributeRef::new("S1", "Hospital", "Name"))),
            ["V2".to_string()].into_iter().collect()
        );
    }

    #[test]
    fn duplicate_and_invalid_views() {
        let (kb, mut vkb) = store();
        assert!(matches!(
            vkb.add_view(&kb, ViewRecord::parse(V1).unwrap()),
            Err(ViewStoreError::DuplicateId(_))
        ));
        let salary = ViewRecord::parse("CREATE VIEW V9 AS SELECT D.Salary FROM S1.Doctor D").unwrap();
        assert!(matches!(
            vkb.add_view(&kb, salary),
            Err(ViewStoreError::Validation { .. })
        ));
        let mistyped =
            ViewRecord::parse("CREATE VIEW V8 AS SELECT D.IdD FROM S1.Doctor D WHERE D.IdD = \"x\"").unwrap();
        assert!(matches!(
            vkb.add_view(&kb, mistyped),
            Err(ViewStoreError::Validation { .. })
        ));
        let missing = ViewRecord::parse("CREATE VIEW V7 AS SELECT D.IdD FROM S2.Doctor D").unwrap();
        assert!(vkb.add_view(&kb, missing).is_err());
    }

    #[test]
    fn web_service_map() {
        let (kb, mut vkb) = store();
        vkb.add_view(
            &kb,
            ViewRecord::parse("CREATE VIEW V3 AS SELECT S.IdS FROM S3.Service S").unwrap(),
        )
        .unwrap();
        vkb.map_web_service("WS1", vec!["V1".into(), "V2".into(), "V3".into()])
            .unwrap();
        vkb.map_web_service("WS2", vec!["V3".into()]).unwrap();
        assert_eq!(
            vkb.web_services_of_view("V3").unwrap(),
            ["WS1".to_string(), "WS2".to_string()].into_iter().collect()
        );
        assert_eq!(vkb.web_services_of_view("V1").unwrap().len(), 1);
        assert!(matches!(
            vkb.web_services_of_view("V42"),
            Err(ViewStoreError::UnknownView(_))
        ));
        assert!(matches!(
            vkb.map_web_service("WS3", vec!["V42".into()]),
            Err(ViewStoreError::UnknownView(_))
        ));
    }

    #[test]
    fn validity_tracks_flags_and_schema() {
        let (mut kb, mut vkb) = store();
        assert!(vkb.is_valid(&kb, "V1"));
        vkb.mark_invalid("V1").unwrap();
        assert!(!vkb.is_valid(&kb, "V1"));
        let def = vkb.view("V1").unwrap().definition.clone();
        vkb.replace_definition("V1", def).unwrap();
        assert!(vkb.is_valid(&kb, "V1"));
        kb.apply_change(&crate::model::ChangeEvent::DeleteRelation(RelationRef::new(
            "S1", "Hospital",
        )))
        .unwrap();
        assert!(!vkb.is_valid(&kb, "V2"));
    }

    #[test]
    fn relation_references_cover_attribute_references() {
        let (kb, vkb) = store();
        for (r, schema) in kb.catalog().relations() {
            let by_relation = vkb.views_referencing(&Component::Relation(r.clone()));
            for (attr, _) in &schema.attributes {
                let by_attr = vkb.views_referencing(&Component::Attribute(r.attribute(attr.clone())));
                assert!(by_attr.is_subset(&by_relation));
            }
        }
    }
}
