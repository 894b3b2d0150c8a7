//! Ecore XMI codec for the supported subset: one `EPackage` of `EClass`es
//! with `EAttribute`s and `EReference`s.

mod emit;
mod parse;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, ParseMode};
use crate::metamodel::{Metamodel, PackageInfo, Violation};

pub use emit::emit_ecore;
pub use parse::parse_ecore;

pub const ECORE_NS: &str = "http://www.eclipse.org/emf/2002/Ecore";
pub const XMI_NS: &str = "http://www.omg.org/XMI";
pub const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EcoreDocument {
    pub raw_xml: String,
}

impl EcoreDocument {
    pub fn new(raw_xml: impl Into<String>) -> Self {
        EcoreDocument { raw_xml: raw_xml.into() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EcoreOptions {
    pub mode: ParseMode,
    /// Header values used for attributes missing on the `EPackage`.
    pub package: PackageInfo,
}

impl EcoreOptions {
    pub fn strict() -> Self {
        EcoreOptions {
            mode: ParseMode::Strict,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcoreParse {
    pub metamodel: Metamodel,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EcoreError {
    #[error("malformed XML at byte {offset} (line {line}, column {column}): {message}")]
    Xml {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("not an Ecore document: {0}")]
    Structure(Diagnostic),
    #[error("{} diagnostic(s) in strict mode, first at {}", .0.len(), .0[0])]
    Strict(Vec<Diagnostic>),
    #[error("document is not a valid metamodel: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl EcoreError {
    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            EcoreError::Strict(ds) => ds.iter().map(ToString::to_string).collect(),
            EcoreError::Invalid(vs) => vs.iter().map(ToString::to_string).collect(),
            other => vec![other.to_string()],
        }
    }
}
