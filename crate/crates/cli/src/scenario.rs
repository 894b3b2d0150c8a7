use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::Args;
use metaforge::evaluation::format_report;
use metaforge::llm::{BackendConfig, ChatBackend};
use metaforge::pipeline::{Pipeline, PipelineConfig, Step, Track};
use metaforge::scenario::{load_steps, run_scenario, ScenarioError, ScenarioRun, EXPECTED_FILE};

use crate::io::{write_output, Reported, EXIT_DIAGNOSTICS, EXIT_IO};

#[derive(Args)]
pub struct RunScenario {
    /// Directory with NN-<step>-<name>.txt files and expected.ecore.
    dir: PathBuf,
    /// Recorded LLM answers; defaults to <DIR>/llm.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Write the final Ecore document here (`-` for standard output).
    #[arg(long)]
    out: Option<String>,
    /// Ask for PlantUML only and derive Ecore locally.
    #[arg(long)]
    puml_first: bool,
    /// Call the live LLM configured by MF_LLM_* instead of fixtures.
    #[arg(long, conflicts_with = "fixtures")]
    live: bool,
}

fn backend(args: &RunScenario) -> Result<Arc<dyn ChatBackend>> {
    let config = if args.live {
        BackendConfig::from_lookup(|k| match k {
            metaforge::llm::ENV_MODE => Some("live".to_string()),
            _ => std::env::var(k).ok(),
        })?
    } else {
        BackendConfig::fixture(args.fixtures.clone().unwrap_or_else(|| args.dir.join("llm")))
    };
    Ok(Arc::from(config.build()?))
}

fn print_history(run: &ScenarioRun, files: &[String]) {
    println!("{:<10}{:<36}{:>6}{:>9}{:>10}", "step", "input", "req", "tokens", "exec [s]");
    for (i, r) in run.session.history.iter().enumerate() {
        let step = match r.step {
            Step::Creation => "creation",
            Step::Update => "update",
            Step::Feedback => "feedback",
        };
        let input = if i == 0 { "-" } else { files.get(i - 1).map(String::as_str).unwrap_or("?") };
        println!(
            "{step:<10}{input:<36}{:>6}{:>9}{:>10.2}",
            r.requirement_count,
            r.tokens(),
            r.wall_seconds
        );
    }
    for (i, r) in run.session.history.iter().enumerate() {
        for w in &r.warnings {
            eprintln!("warning: iteration {i}: {w}");
        }
    }
}

fn file_names(dir: &Path) -> Vec<String> {
    load_steps(dir)
        .map(|steps| {
            steps
                .iter()
                .map(|s| s.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
                .collect()
        })
        .unwrap_or_default()
}

pub fn run(args: &RunScenario) -> Result<()> {
    let pipeline = Pipeline::new(
        backend(args)?,
        PipelineConfig {
            track: if args.puml_first { Track::PumlFirst } else { Track::Dual },
            ..Default::default()
        },
    );
    let run = match run_scenario(&args.dir, &pipeline) {
        Ok(run) => run,
        Err(ScenarioError::Io { path, source }) => {
            return Err(anyhow::Error::new(source).context(format!("reading {}", path.display())));
        }
        Err(e @ ScenarioError::Expected { .. }) => {
            eprintln!("error: {e}");
            let xml = matches!(&e, ScenarioError::Expected { source: metaforge::ecore::EcoreError::Xml { .. }, .. });
            return Err(Reported(if xml { EXIT_IO } else { EXIT_DIAGNOSTICS }).into());
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Err(Reported(EXIT_DIAGNOSTICS).into());
        }
    };

    print_history(&run, &file_names(&args.dir));
    if let Some(out) = &args.out {
        write_output(out, &run.actual.raw_xml).context("writing the final metamodel")?;
    }
    match (&run.expected, run.matches()) {
        (None, _) => {
            println!("no {EXPECTED_FILE} in {}; nothing to compare", args.dir.display());
            Ok(())
        }
        (Some(_), true) => {
            println!("final metamodel matches {EXPECTED_FILE}");
            Ok(())
        }
        (Some(_), false) => {
            println!("final metamodel differs from {EXPECTED_FILE}");
            if let Some(diff) = &run.diff {
                println!("actual versus expected:");
                print!("{}", format_report(diff));
            }
            Err(Reported(EXIT_DIAGNOSTICS).into())
        }
    }
}
