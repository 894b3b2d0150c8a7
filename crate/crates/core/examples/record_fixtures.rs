//! Regenerates the recorded LLM fixtures under `fixtures/`.
//!
//! The hand-written answers in `fixtures/scenario/answers/*.puml` stand in
//! for the model. Each one is served twice per iteration (as Ecore and as
//! PlantUML) through a recording backend, so the resulting `llm/*.json`
//! files are keyed by the exact prompts the pipeline sends. The expected
//! final metamodel and the scoring references are derived from the same
//! answers.
//!
//!     cargo run -p metaforge-core --example record_fixtures [FIXTURES_DIR]

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use metaforge::ecore::emit_ecore;
use metaforge::llm::{FixtureEntry, RecordingBackend, ScriptedBackend};
use metaforge::pipeline::{Pipeline, PipelineConfig, Session, Track};
use metaforge::plantuml::{emit_puml, parse_puml, PumlDocument, PumlOptions};
use metaforge::scenario::{load_steps, EXPECTED_FILE};
use metaforge::Metamodel;

/// Usage per iteration: (Ecore prompt, Ecore completion, PlantUML prompt,
/// PlantUML completion).
const USAGE: [(u64, u64, u64, u64); 3] = [(212, 198, 131, 106), (361, 309, 237, 195), (402, 268, 270, 173)];

fn main() {
    let root = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    let scenario = root.join("scenario");

    let answers = read_answers(&scenario.join("answers"));
    assert_eq!(answers.len(), USAGE.len(), "one answer per iteration");

    let mut script = Vec::new();
    for (i, (answer, usage)) in answers.iter().zip(USAGE).enumerate() {
        let ecore = emit_ecore(answer).unwrap().raw_xml;
        let puml = emit_puml(answer).unwrap().raw_text;
        // Vary the wrapping the way chat models do.
        let (ecore_text, puml_text) = match i {
            0 => (format!("```xml\n{ecore}```\n"), puml),
            1 => (ecore, format!("Here is the updated class diagram:\n\n```plantuml\n{puml}```\n")),
            _ => (format!("```\n{ecore}```"), format!("```plantuml\n{puml}```")),
        };
        script.push(entry(ecore_text, usage.0, usage.1));
        script.push(entry(puml_text, usage.2, usage.3));
    }

    let llm_dir = scenario.join("llm");
    if llm_dir.exists() {
        fs::remove_dir_all(&llm_dir).unwrap();
    }
    let backend = RecordingBackend::new(ScriptedBackend::new(script), &llm_dir);
    let pipeline = Pipeline::new(
        Arc::new(backend),
        PipelineConfig {
            track: Track::Dual,
            ..Default::default()
        },
    );
    let mut session = Session::new("record", pipeline.seed());
    for step in load_steps(&scenario).unwrap() {
        let record = session.apply(&pipeline, &step.requirements, step.step).unwrap();
        println!(
            "{}: {} requirements, {} tokens, {} warnings",
            step.path.display(),
            record.requirement_count,
            record.tokens(),
            record.warnings.len()
        );
        for w in &record.warnings {
            println!("  {w}");
        }
    }
    fs::write(scenario.join(EXPECTED_FILE), session.ecore().raw_xml).unwrap();

    let sensors = answers[0].canonicalize().unwrap();
    let after_update = answers[1].canonicalize().unwrap();
    let actuators = without(&after_update, "PowerManagement");
    let sensors_context = Metamodel {
        classes: vec![
            sensors.class("Vehicle").unwrap().clone().without_features(),
            sensors.class("Component").unwrap().clone(),
        ],
        ..sensors.clone()
    };
    write_row(&root.join("scoring/sensors"), &sensors, &sensors_context);
    write_row(&root.join("scoring/actuators"), &actuators, &sensors);
    write_row(&root.join("scoring/power"), &after_update, &actuators);
    println!("fixtures written under {}", root.display());
}

trait WithoutFeatures {
    fn without_features(self) -> Self;
}

impl WithoutFeatures for metaforge::ClassDef {
    fn without_features(mut self) -> Self {
        self.attributes.clear();
        self.references.clear();
        self
    }
}

fn entry(text: String, prompt_tokens: u64, completion_tokens: u64) -> FixtureEntry {
    FixtureEntry {
        text,
        prompt_tokens,
        completion_tokens,
    }
}

fn read_answers(dir: &Path) -> Vec<Metamodel> {
    let mut paths: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
        .iter()
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("puml"))
        .map(|p| {
            let text = fs::read_to_string(p).unwrap();
            parse_puml(&PumlDocument::named(text, p.display().to_string()), &PumlOptions::strict())
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()))
                .metamodel
        })
        .collect()
}

/// Drops a class and every reference or super type pointing at it.
fn without(m: &Metamodel, class: &str) -> Metamodel {
    let mut out = m.clone();
    out.classes.retain(|c| c.name != class);
    for c in &mut out.classes {
        c.references.retain(|r| r.target != class);
        c.super_types.retain(|s| s != class);
    }
    out.canonicalize().unwrap()
}

fn write_row(dir: &Path, reference: &Metamodel, context: &Metamodel) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("reference.ecore"), emit_ecore(reference).unwrap().raw_xml).unwrap();
    fs::write(dir.join("context.ecore"), emit_ecore(context).unwrap().raw_xml).unwrap();
}
