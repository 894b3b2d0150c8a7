//! Reading, parsing and writing metamodel files, with diagnostics on stderr.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use metaforge::ecore::{parse_ecore, EcoreDocument, EcoreError, EcoreOptions};
use metaforge::plantuml::{parse_puml, PumlDocument, PumlError, PumlOptions};
use metaforge::{Diagnostic, Metamodel, ParseMode};

/// A failure already reported on stderr; only the exit code is left.
#[derive(Debug)]
pub struct Reported(pub u8);

impl fmt::Display for Reported {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "failed with exit code {}", self.0)
    }
}

impl std::error::Error for Reported {}

/// Problems found in the input: exit 1.
pub const EXIT_DIAGNOSTICS: u8 = 1;
/// Unreadable input, unwritable output or malformed XML: exit 2.
pub const EXIT_IO: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Puml,
    Ecore,
}

impl Format {
    /// By extension, falling back to the first non-blank character.
    pub fn detect(path: &str, text: &str) -> Format {
        let ext = Path::new(path).extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("puml" | "plantuml" | "pu" | "iuml") => Format::Puml,
            Some("ecore" | "xml" | "xmi") => Format::Ecore,
            _ if text.trim_start().starts_with('<') => Format::Ecore,
            _ => Format::Puml,
        }
    }
}

/// Reads a file, or standard input for `-`.
pub fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {path}"))
}

/// Writes a file, or standard output for `-`.
pub fn write_output(path: &str, contents: &str) -> Result<()> {
    if path == "-" {
        std::io::stdout().write_all(contents.as_bytes()).context("writing standard output")?;
        return Ok(());
    }
    fs::write(path, contents).with_context(|| format!("writing {path}"))
}

fn report(path: &str, severity: &str, d: &Diagnostic) {
    eprintln!("{path}:{}:{}: {severity}: {}", d.line, d.column, d.message);
}

fn report_puml_error(path: &str, e: &PumlError) {
    match e {
        PumlError::Syntax(d) => report(path, "error", d),
        PumlError::Strict(ds) => ds.iter().for_each(|d| report(path, "error", d)),
        PumlError::DuplicateClass { name, line } => {
            report(path, "error", &Diagnostic::new(*line, 1, format!("class `{name}` declared twice")))
        }
        PumlError::Invalid(vs) => vs.iter().for_each(|v| eprintln!("{path}: error: {v}")),
    }
}

fn report_ecore_error(path: &str, e: &EcoreError) -> u8 {
    match e {
        EcoreError::Xml {
            line, column, message, ..
        } => {
            eprintln!("{path}:{line}:{column}: error: malformed XML: {message}");
            return EXIT_IO;
        }
        EcoreError::Structure(d) => report(path, "error", d),
        EcoreError::Strict(ds) => ds.iter().for_each(|d| report(path, "error", d)),
        EcoreError::Invalid(vs) => vs.iter().for_each(|v| eprintln!("{path}: error: {v}")),
    }
    EXIT_DIAGNOSTICS
}

/// Parses `text` in the given format. Warnings go to stderr; failures are
/// reported and returned as [`Reported`].
pub fn parse_model(path: &str, text: &str, format: Format, mode: ParseMode) -> Result<Metamodel> {
    let (metamodel, warnings) = match format {
        Format::Puml => {
            let options = PumlOptions {
                mode,
                ..Default::default()
            };
            match parse_puml(&PumlDocument::named(text, path), &options) {
                Ok(p) => (p.metamodel, p.warnings),
                Err(e) => {
                    report_puml_error(path, &e);
                    return Err(Reported(EXIT_DIAGNOSTICS).into());
                }
            }
        }
        Format::Ecore => {
            let options = EcoreOptions {
                mode,
                ..Default::default()
            };
            match parse_ecore(&EcoreDocument::new(text), &options) {
                Ok(p) => (p.metamodel, p.warnings),
                Err(e) => return Err(Reported(report_ecore_error(path, &e)).into()),
            }
        }
    };
    for w in &warnings {
        report(path, "warning", w);
    }
    Ok(metamodel)
}

/// Reads and parses a file, detecting its format.
pub fn load_model(path: &str, mode: ParseMode) -> Result<Metamodel> {
    let text = read_input(path)?;
    parse_model(path, &text, Format::detect(path, &text), mode)
}
