use std::fmt::Write;

use super::{EcoreDocument, ECORE_NS, XMI_NS, XSI_NS};
use crate::metamodel::{AttributeDef, ClassDef, Metamodel, ReferenceDef, ValueType, Violation};

/// Serializes a metamodel as an XMI 2.0 `.ecore` document.
///
/// Layout is fixed: UTF-8 declaration, LF line endings, two-space indent,
/// canonical element order and a fixed attribute order. Attributes equal to
/// their Ecore default (`containment="false"`, `lowerBound="0"`,
/// `upperBound="1"`) are omitted.
pub fn emit_ecore(m: &Metamodel) -> Result<EcoreDocument, Vec<Violation>> {
    let m = m.canonicalize()?;
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    write!(
        out,
        "<ecore:EPackage xmi:version=\"2.0\" xmlns:xmi=\"{XMI_NS}\" xmlns:xsi=\"{XSI_NS}\" xmlns:ecore=\"{ECORE_NS}\" name=\"{}\" nsURI=\"{}\" nsPrefix=\"{}\"",
        escape(&m.name),
        escape(&m.ns_uri),
        escape(&m.ns_prefix)
    )
    .unwrap();
    if m.classes.is_empty() {
        out.push_str("/>\n");
        return Ok(EcoreDocument::new(out));
    }
    out.push_str(">\n");
    for class in &m.classes {
        write_class(&mut out, class);
    }
    out.push_str("</ecore:EPackage>\n");
    Ok(EcoreDocument::new(out))
}

fn write_class(out: &mut String, class: &ClassDef) {
    write!(out, "  <eClassifiers xsi:type=\"ecore:EClass\" name=\"{}\"", escape(&class.name)).unwrap();
    if class.is_abstract {
        out.push_str(" abstract=\"true\"");
    }
    if !class.super_types.is_empty() {
        let refs: Vec<String> = class.super_types.iter().map(|s| format!("#//{s}")).collect();
        write!(out, " eSuperTypes=\"{}\"", escape(&refs.join(" "))).unwrap();
    }
    if class.attributes.is_empty() && class.references.is_empty() {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for attr in &class.attributes {
        write_attribute(out, attr);
    }
    for reference in &class.references {
        write_reference(out, reference);
    }
    out.push_str("  </eClassifiers>\n");
}

fn write_attribute(out: &mut String, attr: &AttributeDef) {
    write!(
        out,
        "    <eStructuralFeatures xsi:type=\"ecore:EAttribute\" name=\"{}\" eType=\"ecore:EDataType {ECORE_NS}#//{}\"",
        escape(&attr.name),
        ecore_type_name(attr.value_type)
    )
    .unwrap();
    if let Some(default) = &attr.default_value {
        write!(out, " defaultValueLiteral=\"{}\"", escape(default)).unwrap();
    }
    out.push_str("/>\n");
}

fn write_reference(out: &mut String, r: &ReferenceDef) {
    write!(
        out,
        "    <eStructuralFeatures xsi:type=\"ecore:EReference\" name=\"{}\" eType=\"#//{}\"",
        escape(&r.name),
        escape(&r.target)
    )
    .unwrap();
    if r.containment {
        out.push_str(" containment=\"true\"");
    }
    if r.lower_bound != 0 {
        write!(out, " lowerBound=\"{}\"", r.lower_bound).unwrap();
    }
    if r.upper_bound != 1 {
        write!(out, " upperBound=\"{}\"", r.upper_bound).unwrap();
    }
    out.push_str("/>\n");
}

pub(crate) fn ecore_type_name(t: ValueType) -> &'static str {
    match t {
        ValueType::String => "EString",
        ValueType::Int => "EInt",
        ValueType::Double => "EDouble",
        ValueType::Float => "EFloat",
        ValueType::Boolean => "EBoolean",
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#xA;"),
            '\r' => out.push_str("&#xD;"),
            '\t' => out.push_str("&#x9;"),
            c => out.push(c),
        }
    }
    out
}
