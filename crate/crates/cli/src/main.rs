mod io;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use metaforge::ecore::emit_ecore;
use metaforge::evaluation::{compare_in_context, format_report};
use metaforge::plantuml::emit_puml;
use metaforge::{validate, ParseMode};
use metaforge_service::ServiceConfig;

use crate::io::{load_model, read_input, write_output, Format, Reported, EXIT_DIAGNOSTICS, EXIT_IO};

#[derive(Parser)]
#[command(name = "metaforge", version, about = "Metamodel conversion, scoring and LLM-assisted construction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a PlantUML class diagram to an Ecore metamodel.
    Puml2ecore(Convert),
    /// Convert an Ecore metamodel to a PlantUML class diagram.
    Ecore2puml(Convert),
    /// Score a candidate metamodel against a reference (.puml or .ecore).
    Score {
        candidate: String,
        reference: String,
        /// Metamodel whose elements are left out of the counts.
        #[arg(long)]
        context: Option<String>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check a .puml or .ecore file against the metamodel rules.
    Validate {
        file: String,
        /// Treat unsupported constructs as errors.
        #[arg(long)]
        strict: bool,
    },
    /// Replay a scenario directory through the pipeline.
    RunScenario(scenario::RunScenario),
    /// Start the HTTP service.
    Serve(Serve),
}

#[derive(Args)]
struct Convert {
    /// Input file, `-` for standard input.
    input: String,
    /// Output file, `-` for standard output.
    output: String,
    /// Fail on any unsupported construct instead of skipping it.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct Serve {
    #[arg(long, env = "MF_PORT")]
    port: Option<u16>,
    /// Directory for session snapshots.
    #[arg(long, env = "MF_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Directory of recorded LLM answers (fixture mode).
    #[arg(long, env = "MF_FIXTURE_DIR")]
    fixtures: Option<PathBuf>,
    /// Ask for PlantUML only and derive Ecore locally.
    #[arg(long)]
    puml_first: bool,
}

fn mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn convert(args: &Convert, from: Format) -> Result<()> {
    let text = read_input(&args.input)?;
    let m = io::parse_model(&args.input, &text, from, mode(args.strict))?;
    let out = match from {
        Format::Puml => emit_ecore(&m).map(|d| d.raw_xml),
        Format::Ecore => emit_puml(&m).map(|d| d.raw_text),
    }
    .map_err(|v| anyhow::anyhow!("cannot emit: {v:?}"))?;
    write_output(&args.output, &out)
}

fn score(candidate: &str, reference: &str, context: Option<&str>, json: bool) -> Result<()> {
    let c = load_model(candidate, ParseMode::Lenient)?;
    let r = load_model(reference, ParseMode::Lenient)?;
    let ctx = context.map(|p| load_model(p, ParseMode::Lenient)).transpose()?;
    let report = compare_in_context(&c, &r, ctx.as_ref());
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", format_report(&report));
    }
    Ok(())
}

fn validate_file(file: &str, strict: bool) -> Result<()> {
    let m = load_model(file, mode(strict))?;
    // Parsers already reject invalid models; this guards the contract.
    let violations = validate(&m);
    for v in &violations {
        eprintln!("{file}: error: {v}");
    }
    if !violations.is_empty() {
        return Err(Reported(EXIT_DIAGNOSTICS).into());
    }
    let features: usize = m.classes.iter().map(|c| c.attributes.len() + c.references.len()).sum();
    println!("{file}: valid ({} classes, {features} features)", m.classes.len());
    Ok(())
}

fn serve(args: &Serve) -> Result<()> {
    let mut config = ServiceConfig::from_lookup(|k| match k {
        "MF_FIXTURE_DIR" => args.fixtures.as_ref().map(|p| p.display().to_string()),
        _ => std::env::var(k).ok(),
    })?;
    if let Some(port) = args.port {
        config.port = port;
    }
    if args.data_dir.is_some() {
        config.data_dir = args.data_dir.clone();
    }
    if args.puml_first {
        config.pipeline.track = metaforge::pipeline::Track::PumlFirst;
    }
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();
    let runtime = tokio::runtime::Runtime::new().context("starting the async runtime")?;
    runtime.block_on(metaforge_service::serve(config))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Puml2ecore(args) => convert(&args, Format::Puml),
        Command::Ecore2puml(args) => convert(&args, Format::Ecore),
        Command::Score {
            candidate,
            reference,
            context,
            json,
        } => score(&candidate, &reference, context.as_deref(), json),
        Command::Validate { file, strict } => validate_file(&file, strict),
        Command::RunScenario(args) => scenario::run(&args),
        Command::Serve(args) => serve(&args),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Reported>() {
            Some(Reported(code)) => ExitCode::from(*code),
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_IO)
            }
        },
    }
}
