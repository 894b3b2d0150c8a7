//! Iterative metamodel construction: a metamodel IR with PlantUML and Ecore
//! codecs, requirement chunking, an LLM gateway, and a scorer comparing
//! generated metamodels against references.

pub mod metamodel;

pub use metamodel::{
    merge, seed_metamodel, validate, AttributeDef, ClassDef, MergeError, MergeOutcome, Metamodel,
    PackageInfo, ReferenceDef, Rule, ValueType, Violation,
};
pub mod diagnostics;
pub mod ecore;
pub mod evaluation;
pub mod llm;
pub mod pipeline;
pub mod plantuml;
pub mod requirements;
pub mod scenario;
#[cfg(feature = "testing")]
pub mod testing;

pub use diagnostics::{Diagnostic, ParseMode};
