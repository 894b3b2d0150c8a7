//! PlantUML class-diagram codec.
//!
//! The supported grammar (see `docs/plantuml-grammar.ebnf`) covers class
//! declarations with an optional body, the `abstract` modifier, typed
//! fields with optional defaults, `*--` composition, `-->` directed
//! association, `<|--` / `--|>` generalization, comments and blank lines.
//! Everything else is reported as a located diagnostic.

mod emit;
mod parse;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, ParseMode};
use crate::metamodel::{Metamodel, PackageInfo, Violation};

pub use emit::emit_puml;
pub use parse::parse_puml;

/// Comment prefix carrying the package header, which PlantUML has no
/// syntax for. Emitted only when the header differs from the default.
pub const PACKAGE_PRAGMA: &str = "' metaforge:package";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PumlDocument {
    pub raw_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_name: Option<String>,
}

impl PumlDocument {
    pub fn new(raw_text: impl Into<String>) -> Self {
        PumlDocument {
            raw_text: raw_text.into(),
            source_name: None,
        }
    }

    pub fn named(raw_text: impl Into<String>, source_name: impl Into<String>) -> Self {
        PumlDocument {
            raw_text: raw_text.into(),
            source_name: Some(source_name.into()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PumlOptions {
    pub mode: ParseMode,
    /// Header used when the document carries no package pragma.
    pub package: PackageInfo,
}

impl PumlOptions {
    pub fn strict() -> Self {
        PumlOptions {
            mode: ParseMode::Strict,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumlParse {
    pub metamodel: Metamodel,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PumlError {
    #[error("syntax error at {0}")]
    Syntax(Diagnostic),
    #[error("{} diagnostic(s) in strict mode, first at {}", .0.len(), .0[0])]
    Strict(Vec<Diagnostic>),
    #[error("class `{name}` declared twice (line {line})")]
    DuplicateClass { name: String, line: usize },
    #[error("diagram is not a valid metamodel: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl PumlError {
    /// Located diagnostics for display, one per problem.
    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            PumlError::Syntax(d) => vec![d.to_string()],
            PumlError::Strict(ds) => ds.iter().map(ToString::to_string).collect(),
            PumlError::DuplicateClass { name, line } => {
                vec![format!("{line}:1: class `{name}` declared twice")]
            }
            PumlError::Invalid(vs) => vs.iter().map(ToString::to_string).collect(),
        }
    }
}
