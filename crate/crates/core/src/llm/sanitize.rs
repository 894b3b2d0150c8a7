use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Puml,
    Ecore,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unusable LLM output: {detail}")]
pub struct UnusableOutput {
    pub kind: OutputKind,
    pub detail: String,
}

/// Cuts an LLM answer down to the artifact it contains.
///
/// Line endings become LF. For PlantUML everything before `@startuml` and
/// after `@enduml` is dropped; for Ecore everything before the first `<`
/// and after the last `>`. Markdown fences and surrounding prose go with it.
pub fn sanitize(text: &str, kind: OutputKind) -> Result<String, UnusableOutput> {
    let text = text.replace("\r\n", "\n").replace('\r', "\n");
    match kind {
        OutputKind::Puml => {
            let start = text.find("@startuml").ok_or_else(|| unusable(kind, "no @startuml marker"))?;
            let end = text
                .rfind("@enduml")
                .filter(|e| *e > start)
                .ok_or_else(|| unusable(kind, "no @enduml marker after @startuml"))?;
            Ok(text[start..end + "@enduml".len()].to_string())
        }
        OutputKind::Ecore => {
            let start = text.find('<').ok_or_else(|| unusable(kind, "no XML content"))?;
            let end = text.rfind('>').filter(|e| *e > start).ok_or_else(|| unusable(kind, "no XML content"))?;
            let xml = &text[start..=end];
            if !xml.contains("EPackage") {
                return Err(unusable(kind, "no EPackage element"));
            }
            Ok(xml.to_string())
        }
    }
}

fn unusable(kind: OutputKind, detail: &str) -> UnusableOutput {
    UnusableOutput {
        kind,
        detail: detail.to_string(),
    }
}
