//! Replaying a scenario directory: ordered requirement files applied to a
//! fresh session, then compared with `expected.ecore`.
//!
//! Step files are named `NN-<step>-<anything>.txt`, where `<step>` is
//! `update` or `feedback`, and are applied in file-name order.

use std::fs;
use std::path::{Path, PathBuf};

use crate::ecore::{emit_ecore, parse_ecore, EcoreDocument, EcoreError, EcoreOptions};
use crate::evaluation::{compare, ComparisonReport};
use crate::metamodel::Metamodel;
use crate::pipeline::{Pipeline, PipelineError, Session, Step};

pub const EXPECTED_FILE: &str = "expected.ecore";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioStep {
    pub path: PathBuf,
    pub step: Step,
    pub requirements: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}: file name must look like NN-update-name.txt or NN-feedback-name.txt")]
    StepName(PathBuf),
    #[error("{0}: no step files")]
    Empty(PathBuf),
    #[error("{path}: {source}")]
    Pipeline { path: PathBuf, source: PipelineError },
    #[error("{path}: {source}")]
    Expected { path: PathBuf, source: EcoreError },
}

impl ScenarioError {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
        move |source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Step parsed from a step file name, if it follows the naming scheme.
pub fn step_from_file_name(name: &str) -> Option<Step> {
    let stem = name.strip_suffix(".txt")?;
    let mut parts = stem.splitn(3, '-');
    let ordinal = parts.next()?;
    if ordinal.is_empty() || !ordinal.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    match parts.next()?.parse().ok()? {
        Step::Creation => None,
        step => Some(step),
    }
}

pub fn load_steps(dir: &Path) -> Result<Vec<ScenarioStep>, ScenarioError> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(ScenarioError::io(dir))? {
        let path = entry.map_err(ScenarioError::io(dir))?.path();
        if path.is_file() && path.extension().and_then(|e| e.to_str()) == Some("txt") {
            paths.push(path);
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(ScenarioError::Empty(dir.to_path_buf()));
    }
    paths
        .into_iter()
        .map(|path| {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let step = step_from_file_name(name).ok_or_else(|| ScenarioError::StepName(path.clone()))?;
            let requirements = fs::read_to_string(&path).map_err(ScenarioError::io(&path))?;
            Ok(ScenarioStep {
                path,
                step,
                requirements,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub session: Session,
    /// Canonical Ecore of the final metamodel.
    pub actual: EcoreDocument,
    /// Canonical Ecore of `expected.ecore`, when the directory has one.
    pub expected: Option<EcoreDocument>,
    /// Expected versus actual, filled when they differ.
    pub diff: Option<ComparisonReport>,
}

impl ScenarioRun {
    /// True when there is no expectation or it matches byte for byte.
    pub fn matches(&self) -> bool {
        self.expected.as_ref().is_none_or(|e| e.raw_xml == self.actual.raw_xml)
    }
}

/// Applies every step to a fresh session. Stops at the first failing step.
pub fn run_scenario(dir: &Path, pipeline: &Pipeline) -> Result<ScenarioRun, ScenarioError> {
    let steps = load_steps(dir)?;
    let mut session = Session::new("scenario", pipeline.seed());
    for s in &steps {
        session
            .apply(pipeline, &s.requirements, s.step)
            .map_err(|source| ScenarioError::Pipeline {
                path: s.path.clone(),
                source,
            })?;
    }
    let actual = session.ecore();

    let expected_path = dir.join(EXPECTED_FILE);
    let expected = if expected_path.exists() {
        let raw = fs::read_to_string(&expected_path).map_err(ScenarioError::io(&expected_path))?;
        let m = load_ecore_text(&raw, &pipeline.config().package).map_err(|source| ScenarioError::Expected {
            path: expected_path.clone(),
            source,
        })?;
        Some(emit_ecore(&m).expect("parsed metamodel is valid"))
    } else {
        None
    };

    let diff = match &expected {
        Some(e) if e.raw_xml != actual.raw_xml => {
            let expected_ir = load_ecore_text(&e.raw_xml, &pipeline.config().package).expect("canonical text parses");
            Some(compare(&session.current, &expected_ir))
        }
        _ => None,
    };
    Ok(ScenarioRun {
        session,
        actual,
        expected,
        diff,
    })
}

fn load_ecore_text(raw: &str, package: &crate::metamodel::PackageInfo) -> Result<Metamodel, EcoreError> {
    let options = EcoreOptions {
        package: package.clone(),
        ..Default::default()
    };
    parse_ecore(&EcoreDocument::new(raw), &options).map(|p| p.metamodel)
}
