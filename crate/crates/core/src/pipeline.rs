//! One construction iteration: requirements in, merged metamodel out.
//!
//! The requirements are chunked, sent to the LLM with the current metamodel,
//! the answer is cleaned and parsed into a partial metamodel, and the
//! partial is merged into the current one.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::diagnostics::ParseMode;
use crate::ecore::{emit_ecore, parse_ecore, EcoreDocument, EcoreOptions};
use crate::evaluation::compare;
use crate::llm::{
    build_ecore_prompt, build_puml_prompt, sanitize, ChatBackend, LlmError, LlmResponse, OutputKind, PromptError,
};
use crate::metamodel::{merge, seed_metamodel_with, MergeError, Metamodel, PackageInfo};
use crate::plantuml::{emit_puml, parse_puml, PumlDocument, PumlOptions};
use crate::requirements::{chunk, filter_by_aspect, RequirementsError, DEFAULT_MAX_CHUNK_CHARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Creation,
    Update,
    Feedback,
}

impl std::str::FromStr for Step {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "creation" => Ok(Step::Creation),
            "update" => Ok(Step::Update),
            "feedback" => Ok(Step::Feedback),
            other => Err(format!("unknown step `{other}` (expected update or feedback)")),
        }
    }
}

/// Which LLM answers feed the merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Track {
    /// Ask for both Ecore and PlantUML; the Ecore answer is merged and the
    /// PlantUML answer only checked for divergence.
    #[default]
    Dual,
    /// Ask for PlantUML only and derive Ecore through the codecs.
    PumlFirst,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PipelineConfig {
    pub track: Track,
    pub max_chunk_chars: usize,
    /// When set, only chunks mentioning one of these words are submitted.
    #[serde(default)]
    pub aspect_keywords: Option<Vec<String>>,
    pub package: PackageInfo,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            track: Track::Dual,
            max_chunk_chars: DEFAULT_MAX_CHUNK_CHARS,
            aspect_keywords: None,
            package: PackageInfo::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationRecord {
    pub step: Step,
    pub requirement_count: usize,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub wall_seconds: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub snapshot: Metamodel,
}

impl IterationRecord {
    pub fn tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }

    pub fn summary(&self) -> IterationSummary {
        IterationSummary {
            step: self.step,
            requirement_count: self.requirement_count,
            prompt_tokens: self.prompt_tokens,
            completion_tokens: self.completion_tokens,
            tokens: self.tokens(),
            wall_seconds: self.wall_seconds,
            warnings: self.warnings.clone(),
        }
    }
}

/// A history row without the snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IterationSummary {
    pub step: Step,
    pub requirement_count: usize,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub tokens: u64,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("requirements: {0}")]
    Requirements(#[from] RequirementsError),
    #[error("no requirements to submit")]
    EmptyRequirements,
    #[error("step `creation` is reserved for the first history record")]
    CreationStep,
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gateway(#[from] LlmError),
    #[error("unusable {kind} output: {detail}")]
    Unusable { kind: &'static str, detail: String },
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error("current metamodel cannot be serialized: {0}")]
    Current(String),
}

pub struct Pipeline {
    backend: Arc<dyn ChatBackend>,
    config: PipelineConfig,
}

/// Result of a successful iteration, not yet committed to any session.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub merged: Metamodel,
    pub record: IterationRecord,
}

impl Pipeline {
    pub fn new(backend: Arc<dyn ChatBackend>, config: PipelineConfig) -> Self {
        Pipeline { backend, config }
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn seed(&self) -> Metamodel {
        seed_metamodel_with(&self.config.package)
    }

    /// Runs one iteration against `current` without mutating anything.
    pub fn iterate(&self, current: &Metamodel, requirements: &str, step: Step) -> Result<Iteration, PipelineError> {
        if step == Step::Creation {
            return Err(PipelineError::CreationStep);
        }
        let chunked = chunk(requirements, self.config.max_chunk_chars)?;
        let mut warnings = chunked.warnings;
        let chunks = match &self.config.aspect_keywords {
            Some(keywords) => filter_by_aspect(&chunked.chunks, keywords),
            None => chunked.chunks,
        };
        if chunks.is_empty() {
            return Err(PipelineError::EmptyRequirements);
        }
        let text = chunks.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join("\n");

        let mut responses = Vec::new();
        let partial = match self.config.track {
            Track::Dual => {
                let (ecore_ir, r) = self.ecore_track(current, &text, &mut warnings)?;
                responses.push(r);
                match self.puml_track(current, &text, &mut warnings) {
                    Ok((puml_ir, r)) => {
                        responses.push(r);
                        if let Some(note) = divergence(&ecore_ir, &puml_ir) {
                            warnings.push(note);
                        }
                    }
                    Err(PipelineError::Unusable { detail, .. }) => {
                        warnings.push(format!("PlantUML answer ignored: {detail}"));
                    }
                    Err(e) => return Err(e),
                }
                ecore_ir
            }
            Track::PumlFirst => {
                let (puml_ir, r) = self.puml_track(current, &text, &mut warnings)?;
                responses.push(r);
                puml_ir
            }
        };

        let outcome = merge(current, &partial)?;
        warnings.extend(outcome.warnings);
        for r in &responses {
            warnings.extend(r.notes.iter().cloned());
        }

        let record = IterationRecord {
            step,
            requirement_count: chunks.len(),
            prompt_tokens: responses.iter().map(|r| r.prompt_tokens).sum(),
            completion_tokens: responses.iter().map(|r| r.completion_tokens).sum(),
            wall_seconds: responses.iter().map(|r| r.wall_seconds).sum(),
            warnings,
            snapshot: outcome.merged.clone(),
        };
        Ok(Iteration {
            merged: outcome.merged,
            record,
        })
    }

    fn ecore_track(
        &self,
        current: &Metamodel,
        requirements: &str,
        warnings: &mut Vec<String>,
    ) -> Result<(Metamodel, LlmResponse), PipelineError> {
        let current_doc = emit_ecore(current).map_err(|v| PipelineError::Current(format!("{v:?}")))?;
        let prompt = build_ecore_prompt(requirements, &current_doc)?;
        let response = self.backend.complete(&prompt)?;
        let clean = sanitize(&response.text, OutputKind::Ecore).map_err(|e| PipelineError::Unusable {
            kind: "Ecore",
            detail: e.detail,
        })?;
        let options = EcoreOptions {
            mode: ParseMode::Lenient,
            package: self.config.package.clone(),
        };
        let parsed = parse_ecore(&EcoreDocument::new(clean), &options).map_err(|e| PipelineError::Unusable {
            kind: "Ecore",
            detail: e.diagnostics().join("; "),
        })?;
        warnings.extend(parsed.warnings.iter().map(|d| format!("ecore answer {d}")));
        Ok((align_header(parsed.metamodel, current), response))
    }

    fn puml_track(
        &self,
        current: &Metamodel,
        requirements: &str,
        warnings: &mut Vec<String>,
    ) -> Result<(Metamodel, LlmResponse), PipelineError> {
        let current_doc = emit_puml(current).map_err(|v| PipelineError::Current(format!("{v:?}")))?;
        let prompt = build_puml_prompt(requirements, &current_doc)?;
        let response = self.backend.complete(&prompt)?;
        let clean = sanitize(&response.text, OutputKind::Puml).map_err(|e| PipelineError::Unusable {
            kind: "PlantUML",
            detail: e.detail,
        })?;
        let options = PumlOptions {
            mode: ParseMode::Lenient,
            package: current.package(),
        };
        let parsed = parse_puml(&PumlDocument::new(clean), &options).map_err(|e| PipelineError::Unusable {
            kind: "PlantUML",
            detail: e.diagnostics().join("; "),
        })?;
        warnings.extend(parsed.warnings.iter().map(|d| format!("plantuml answer {d}")));
        Ok((align_header(parsed.metamodel, current), response))
    }
}

/// The session keeps its own package header whatever the LLM answered.
fn align_header(mut partial: Metamodel, current: &Metamodel) -> Metamodel {
    partial.name = current.name.clone();
    partial.ns_uri = current.ns_uri.clone();
    partial.ns_prefix = current.ns_prefix.clone();
    partial
}

fn divergence(ecore_ir: &Metamodel, puml_ir: &Metamodel) -> Option<String> {
    let forward = compare(puml_ir, ecore_ir);
    let backward = compare(ecore_ir, puml_ir);
    let missing: usize = forward.categories().iter().map(|(_, s)| s.missing.len()).sum();
    let extra: usize = backward.categories().iter().map(|(_, s)| s.missing.len()).sum();
    if missing == 0 && extra == 0 {
        return None;
    }
    Some(format!(
        "PlantUML answer diverges from Ecore answer: {missing} element(s) only in Ecore, {extra} only in PlantUML (classes {}, attributes {}, compositions {}, subclass relations {})",
        forward.classes.cell(),
        forward.attributes.cell(),
        forward.compositions.cell(),
        forward.subclass_relations.cell()
    ))
}

/// A construction session: the current metamodel plus its append-only
/// history. The last history snapshot always equals `current`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub id: String,
    pub current: Metamodel,
    pub history: Vec<IterationRecord>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

impl Session {
    /// A fresh session on the seed metamodel with one zero-count creation
    /// record.
    pub fn new(id: impl Into<String>, seed: Metamodel) -> Self {
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Session {
            id: id.into(),
            history: vec![IterationRecord {
                step: Step::Creation,
                requirement_count: 0,
                prompt_tokens: 0,
                completion_tokens: 0,
                wall_seconds: 0.0,
                warnings: Vec::new(),
                snapshot: seed.clone(),
            }],
            current: seed,
            created_at,
        }
    }

    /// Runs an iteration and commits it. On error the session is untouched.
    pub fn apply(&mut self, pipeline: &Pipeline, requirements: &str, step: Step) -> Result<&IterationRecord, PipelineError> {
        let iteration = pipeline.iterate(&self.current, requirements, step)?;
        self.current = iteration.merged;
        self.history.push(iteration.record);
        Ok(self.history.last().unwrap())
    }

    pub fn summaries(&self) -> Vec<IterationSummary> {
        self.history.iter().map(IterationRecord::summary).collect()
    }

    pub fn ecore(&self) -> EcoreDocument {
        emit_ecore(&self.current).expect("session metamodel is always valid")
    }

    pub fn puml(&self) -> PumlDocument {
        emit_puml(&self.current).expect("session metamodel is always valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::{FixtureEntry, ScriptedBackend};
    use crate::metamodel::{seed_metamodel, validate, ClassDef, ReferenceDef};

    fn entry(text: &str, p: u64, c: u64) -> FixtureEntry {
        FixtureEntry {
            text: text.to_string(),
            prompt_tokens: p,
            completion_tokens: c,
        }
    }

    fn sensor_model() -> Metamodel {
        seed_metamodel()
            .with_class(ClassDef::new("Sensor"))
            .with_class(ClassDef::new("Camera").extends("Sensor"))
            .canonicalize()
            .unwrap()
    }

    fn with_vehicle_ref(m: Metamodel) -> Metamodel {
        let mut m = m;
        m.class_mut("Vehicle").unwrap().references.push(ReferenceDef::containment("sensors", "Sensor"));
        m
    }

    fn pipeline(entries: Vec<FixtureEntry>, track: Track) -> Pipeline {
        Pipeline::new(
            Arc::new(ScriptedBackend::new(entries)),
            PipelineConfig {
                track,
                ..Default::default()
            },
        )
    }

    #[test]
    fn dual_track_merges_ecore_answer() {
        let target = with_vehicle_ref(sensor_model());
        let ecore = format!("```xml\n{}```", emit_ecore(&target).unwrap().raw_xml);
        let puml = emit_puml(&target).unwrap().raw_text;
        let p = pipeline(vec![entry(&ecore, 100, 50), entry(&puml, 20, 10)], Track::Dual);
        let mut session = Session::new("s", seed_metamodel());
        let record = session.apply(&p, "- sensors\n- cameras", Step::Update).unwrap().clone();
        assert_eq!(record.requirement_count, 2);
        assert_eq!(record.tokens(), 180);
        assert_eq!(record.wall_seconds, 0.0);
        assert!(record.warnings.is_empty(), "{:?}", record.warnings);
        assert_eq!(session.current.canonicalize().unwrap(), target.canonicalize().unwrap());
        assert_eq!(session.history.len(), 2);
        assert!(validate(&session.current).is_empty());
    }

    #[test]
    fn divergent_plantuml_is_a_warning() {
        let target = with_vehicle_ref(sensor_model());
        let ecore = emit_ecore(&target).unwrap().raw_xml;
        let puml = emit_puml(&sensor_model()).unwrap().raw_text;
        let p = pipeline(vec![entry(&ecore, 1, 1), entry(&puml, 1, 1)], Track::Dual);
        let it = p.iterate(&seed_metamodel(), "sensors", Step::Update).unwrap();
        assert_eq!(it.merged.canonicalize().unwrap(), target.canonicalize().unwrap());
        assert!(it.record.warnings.iter().any(|w| w.contains("diverges")), "{:?}", it.record.warnings);
    }

    #[test]
    fn unusable_plantuml_in_dual_mode_only_warns() {
        let target = sensor_model();
        let ecore = emit_ecore(&target).unwrap().raw_xml;
        let p = pipeline(vec![entry(&ecore, 1, 1), entry("no diagram today", 1, 1)], Track::Dual);
        let it = p.iterate(&seed_metamodel(), "sensors", Step::Update).unwrap();
        assert!(it.record.warnings.iter().any(|w| w.contains("PlantUML answer ignored")));
    }

    #[test]
    fn puml_first_track() {
        let target = sensor_model();
        let puml = format!("Sure!\n```plantuml\n{}```", emit_puml(&target).unwrap().raw_text);
        let p = pipeline(vec![entry(&puml, 7, 3)], Track::PumlFirst);
        let it = p.iterate(&seed_metamodel(), "sensors", Step::Feedback).unwrap();
        assert_eq!(it.merged.canonicalize().unwrap(), target.canonicalize().unwrap());
        assert_eq!(it.record.step, Step::Feedback);
        assert_eq!(it.record.tokens(), 10);
    }

    #[test]
    fn failures_leave_session_untouched() {
        let mut session = Session::new("s", seed_metamodel());
        let before = session.clone();

        let p = pipeline(vec![entry("I cannot help with that.", 1, 1)], Track::Dual);
        assert!(matches!(session.apply(&p, "sensors", Step::Update), Err(PipelineError::Unusable { .. })));

        let cyclic = "@startuml\nclass Vehicle\nclass A\nclass B\nA --|> B\nB --|> A\n@enduml";
        let p = pipeline(vec![entry(cyclic, 1, 1)], Track::PumlFirst);
        assert!(matches!(session.apply(&p, "x", Step::Update), Err(PipelineError::Unusable { .. })));

        let p = pipeline(vec![], Track::Dual);
        assert!(matches!(session.apply(&p, "x", Step::Update), Err(PipelineError::Gateway(_))));
        assert!(matches!(session.apply(&p, "  ", Step::Update), Err(PipelineError::EmptyRequirements)));
        assert!(matches!(session.apply(&p, "x", Step::Creation), Err(PipelineError::CreationStep)));
        assert_eq!(session, before);
    }

    #[test]
    fn merge_conflicts_surface_as_merge_errors() {
        let mut current = seed_metamodel().with_class(ClassDef::new("A")).with_class(ClassDef::new("B").extends("A"));
        current = current.canonicalize().unwrap();
        let answer = "@startuml\nclass A\nclass B\nA --|> B\n@enduml";
        let p = pipeline(vec![entry(answer, 1, 1)], Track::PumlFirst);
        let err = p.iterate(&current, "x", Step::Feedback).unwrap_err();
        assert!(matches!(err, PipelineError::Merge(_)), "{err:?}");
    }

    #[test]
    fn aspect_filter_limits_submitted_chunks() {
        let p = Pipeline::new(
            Arc::new(ScriptedBackend::new([entry(&emit_puml(&seed_metamodel()).unwrap().raw_text, 0, 0)])),
            PipelineConfig {
                track: Track::PumlFirst,
                aspect_keywords: Some(vec!["radar".into()]),
                ..Default::default()
            },
        );
        let it = p.iterate(&seed_metamodel(), "- radar range\n- brake force\n- radar fov", Step::Update).unwrap();
        assert_eq!(it.record.requirement_count, 2);
    }

    #[test]
    fn new_session_history() {
        let s = Session::new("abc", seed_metamodel());
        assert_eq!(s.history.len(), 1);
        assert_eq!(s.history[0].step, Step::Creation);
        assert_eq!(s.history[0].requirement_count, 0);
        assert_eq!(s.current.classes.len(), 1);
    }
}
