use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ecore::EcoreDocument;
use crate::plantuml::PumlDocument;

pub const ECORE_SYSTEM_PROMPT: &str = "You are generating .ecore metamodel without additional comments.";
pub const ECORE_USER_TEMPLATE: &str = "Based on description [requirements] update Ecore metamodel [current metamodel]";
pub const PUML_SYSTEM_PROMPT: &str =
    "You are generating plantuml metamodel about vehicle with no additional comments. Subclass relations should be identified.";
pub const PUML_USER_TEMPLATE: &str = "Based on description [requirements] update plantuml class diagram [current plantuml]";

const REQUIREMENTS_SLOT: &str = "[requirements]";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptPair {
    pub system: String,
    pub user: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("requirements text is empty")]
    EmptyRequirements,
    #[error("current metamodel is not usable: {0}")]
    MalformedCurrent(String),
}

/// Prompt pair asking for an updated `.ecore` metamodel.
pub fn build_ecore_prompt(requirements: &str, current: &EcoreDocument) -> Result<PromptPair, PromptError> {
    if requirements.trim().is_empty() {
        return Err(PromptError::EmptyRequirements);
    }
    roxmltree::Document::parse(&current.raw_xml).map_err(|e| PromptError::MalformedCurrent(e.to_string()))?;
    Ok(PromptPair {
        system: ECORE_SYSTEM_PROMPT.to_string(),
        user: fill(ECORE_USER_TEMPLATE, requirements, "[current metamodel]", &current.raw_xml),
    })
}

/// Prompt pair asking for an updated PlantUML class diagram.
pub fn build_puml_prompt(requirements: &str, current: &PumlDocument) -> Result<PromptPair, PromptError> {
    if requirements.trim().is_empty() {
        return Err(PromptError::EmptyRequirements);
    }
    if !current.raw_text.contains("@startuml") || !current.raw_text.contains("@enduml") {
        return Err(PromptError::MalformedCurrent("missing @startuml/@enduml".into()));
    }
    Ok(PromptPair {
        system: PUML_SYSTEM_PROMPT.to_string(),
        user: fill(PUML_USER_TEMPLATE, requirements, "[current plantuml]", &current.raw_text),
    })
}

/// Substitutes both slots in one pass so slot-like text inside the values
/// is never substituted again.
fn fill(template: &str, requirements: &str, current_slot: &str, current: &str) -> String {
    let (before, rest) = template.split_once(REQUIREMENTS_SLOT).expect("template has a requirements slot");
    let (middle, after) = rest.split_once(current_slot).expect("template has a current slot");
    let mut out = String::with_capacity(template.len() + requirements.len() + current.len());
    out.push_str(before);
    out.push_str(requirements);
    out.push_str(middle);
    out.push_str(current);
    out.push_str(after);
    out
}

/// Stable fixture key: lowercase hex SHA-256 of `system`, a NUL byte, `user`.
pub fn prompt_hash(prompt: &PromptPair) -> String {
    let mut h = Sha256::new();
    h.update(prompt.system.as_bytes());
    h.update([0u8]);
    h.update(prompt.user.as_bytes());
    hex::encode(h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecore::emit_ecore;
    use crate::metamodel::seed_metamodel;
    use crate::plantuml::emit_puml;

    #[test]
    fn ecore_prompt_texts() {
        let seed = emit_ecore(&seed_metamodel()).unwrap();
        let p = build_ecore_prompt("r1", &seed).unwrap();
        assert_eq!(p.system, "You are generating .ecore metamodel without additional comments.");
        assert!(p.user.starts_with("Based on description r1 update Ecore metamodel "));
        assert!(p.user.ends_with(&seed.raw_xml));
    }

    #[test]
    fn puml_prompt_texts() {
        let seed = emit_puml(&seed_metamodel()).unwrap();
        let p = build_puml_prompt("r1", &seed).unwrap();
        assert!(p.system.ends_with("Subclass relations should be identified."));
        assert_eq!(p.user, format!("Based on description r1 update plantuml class diagram {}", seed.raw_text));
    }

    #[test]
    fn empty_requirements_rejected() {
        let seed = emit_ecore(&seed_metamodel()).unwrap();
        assert_eq!(build_ecore_prompt("  \n", &seed), Err(PromptError::EmptyRequirements));
        let seed = emit_puml(&seed_metamodel()).unwrap();
        assert_eq!(build_puml_prompt("", &seed), Err(PromptError::EmptyRequirements));
    }

    #[test]
    fn malformed_current_rejected() {
        let bad = EcoreDocument::new("<ecore:EPackage");
        assert!(matches!(build_ecore_prompt("r", &bad), Err(PromptError::MalformedCurrent(_))));
    }

    #[test]
    fn slot_text_in_values_is_not_resubstituted() {
        let seed = emit_puml(&seed_metamodel()).unwrap();
        let p = build_puml_prompt("see [current plantuml] and [requirements]", &seed).unwrap();
        assert!(p.user.starts_with("Based on description see [current plantuml] and [requirements] update plantuml class diagram @startuml"));
    }

    #[test]
    fn hash_is_stable_and_separates_fields() {
        let a = PromptPair { system: "ab".into(), user: "c".into() };
        let b = PromptPair { system: "a".into(), user: "bc".into() };
        assert_ne!(prompt_hash(&a), prompt_hash(&b));
        assert_eq!(prompt_hash(&a), prompt_hash(&a.clone()));
        assert_eq!(prompt_hash(&a).len(), 64);
    }
}
