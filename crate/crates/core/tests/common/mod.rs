#![allow(dead_code)]

pub mod matrix;
pub mod strategies;

use std::path::PathBuf;

use wssync::esql::{self, ViewDefinition};
use wssync::kbfile::{self, LoadedKb};

pub fn fixture_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/healthcare.kb.json")
}

pub fn healthcare() -> LoadedKb {
    kbfile::load_path(fixture_path()).expect("fixture loads")
}

/// A golden view text, renamed to `name` so it compares with the stored view.
pub fn golden(file: &str, name: &str) -> ViewDefinition {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/golden")
        .join(file);
    let mut v = esql::parse_view(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.name = name.to_string();
    v
}
