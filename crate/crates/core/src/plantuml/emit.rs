use std::fmt::Write;

use super::{PumlDocument, PACKAGE_PRAGMA};
use crate::metamodel::{Metamodel, PackageInfo, ReferenceDef, ValueType, Violation};

/// Renders a metamodel as a PlantUML class diagram.
///
/// Output is canonical: classes and features sorted by name, class blocks
/// first, then generalizations, then references. Every reference carries an
/// explicit label and multiplicity so the diagram parses back losslessly.
pub fn emit_puml(m: &Metamodel) -> Result<PumlDocument, Vec<Violation>> {
    let m = m.canonicalize()?;
    let mut out = String::from("@startuml\n");

    if m.package() != PackageInfo::default() {
        writeln!(
            out,
            "{PACKAGE_PRAGMA} name={} nsURI={} nsPrefix={}",
            m.name, m.ns_uri, m.ns_prefix
        )
        .unwrap();
    }

    for class in &m.classes {
        let keyword = if class.is_abstract { "abstract class" } else { "class" };
        if class.attributes.is_empty() {
            writeln!(out, "{keyword} {}", class.name).unwrap();
            continue;
        }
        writeln!(out, "{keyword} {} {{", class.name).unwrap();
        for attr in &class.attributes {
            write!(out, "  {} : {}", attr.name, attr.value_type).unwrap();
            if let Some(default) = &attr.default_value {
                if attr.value_type == ValueType::String {
                    write!(out, " = {}", quote(default)).unwrap();
                } else {
                    write!(out, " = {default}").unwrap();
                }
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }

    for class in &m.classes {
        for sup in &class.super_types {
            writeln!(out, "{sup} <|-- {}", class.name).unwrap();
        }
    }

    for class in &m.classes {
        for r in &class.references {
            let arrow = if r.containment { "\"1\" *--" } else { "-->" };
            writeln!(
                out,
                "{} {arrow} \"{}\" {} : {}",
                class.name,
                multiplicity(r),
                r.target,
                r.name
            )
            .unwrap();
        }
    }

    out.push_str("@enduml\n");
    Ok(PumlDocument::new(out))
}

fn multiplicity(r: &ReferenceDef) -> String {
    if r.is_unbounded() {
        format!("{}..*", r.lower_bound)
    } else {
        format!("{}..{}", r.lower_bound, r.upper_bound)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
