#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use metaforge::ecore::{parse_ecore, EcoreDocument, EcoreOptions};
use metaforge::plantuml::{parse_puml, PumlDocument, PumlOptions};
use metaforge::Metamodel;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load_puml(path: &Path) -> Metamodel {
    let text = fs::read_to_string(path).unwrap();
    parse_puml(&PumlDocument::new(text), &PumlOptions::default())
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .metamodel
}

pub fn load_ecore(path: &Path) -> Metamodel {
    let text = fs::read_to_string(path).unwrap();
    parse_ecore(&EcoreDocument::new(text), &EcoreOptions::default())
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .metamodel
}
