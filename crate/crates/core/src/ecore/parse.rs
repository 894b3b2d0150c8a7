use roxmltree::{Document, Node};

use super::{EcoreDocument, EcoreError, EcoreOptions, EcoreParse, ECORE_NS, XSI_NS};
use crate::diagnostics::{Diagnostic, ParseMode};
use crate::metamodel::{
    sanitize_identifier, validate, AttributeDef, ClassDef, Metamodel, ReferenceDef, ValueType,
};

/// EMF feature flags that carry no meaning in the IR.
const IGNORED_FEATURE_ATTRS: &[&str] = &[
    "ordered", "unique", "changeable", "volatile", "transient", "unsettable", "derived", "iD",
    "resolveProxies", "defaultValue",
];

/// Parses the supported `.ecore` subset into the IR.
pub fn parse_ecore(doc: &EcoreDocument, options: &EcoreOptions) -> Result<EcoreParse, EcoreError> {
    let xml = Document::parse(&doc.raw_xml).map_err(|e| xml_error(&doc.raw_xml, &e))?;
    let mut p = Parser {
        doc: &xml,
        warnings: Vec::new(),
    };
    let metamodel = p.package(xml.root_element(), options)?;

    let violations = validate(&metamodel);
    if !violations.is_empty() {
        return Err(EcoreError::Invalid(violations));
    }
    if options.mode == ParseMode::Strict && !p.warnings.is_empty() {
        return Err(EcoreError::Strict(p.warnings));
    }
    Ok(EcoreParse {
        metamodel,
        warnings: p.warnings,
    })
}

fn xml_error(text: &str, e: &roxmltree::Error) -> EcoreError {
    let pos = e.pos();
    EcoreError::Xml {
        offset: byte_offset(text, pos.row as usize, pos.col as usize),
        line: pos.row as usize,
        column: pos.col as usize,
        message: e.to_string(),
    }
}

/// Byte offset of a 1-based (row, char column) position, clamped to the text.
fn byte_offset(text: &str, row: usize, col: usize) -> usize {
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if i + 1 == row {
            let within: usize = line.chars().take(col.saturating_sub(1)).map(char::len_utf8).sum();
            return offset + within;
        }
        offset += line.len();
    }
    text.len()
}

struct Parser<'a, 'input> {
    doc: &'a Document<'input>,
    warnings: Vec<Diagnostic>,
}

impl<'a, 'input> Parser<'a, 'input> {
    fn locate(&self, node: Node) -> (usize, usize) {
        let pos = self.doc.text_pos_at(node.range().start);
        (pos.row as usize, pos.col as usize)
    }

    fn warn(&mut self, node: Node, message: impl Into<String>) {
        let (line, column) = self.locate(node);
        self.warnings.push(Diagnostic::new(line, column, message));
    }

    fn structure(&self, node: Node, message: impl Into<String>) -> EcoreError {
        let (line, column) = self.locate(node);
        EcoreError::Structure(Diagnostic::new(line, column, message))
    }

    fn identifier(&mut self, node: Node, raw: &str, what: &str) -> String {
        match sanitize_identifier(raw) {
            None => raw.to_string(),
            Some(clean) => {
                self.warn(node, format!("{what} `{raw}` sanitized to `{clean}`"));
                clean
            }
        }
    }

    fn package(&mut self, root: Node, options: &EcoreOptions) -> Result<Metamodel, EcoreError> {
        let tag = root.tag_name();
        if tag.name() != "EPackage" || tag.namespace() != Some(ECORE_NS) {
            return Err(self.structure(root, format!("root element is `{}`, expected ecore:EPackage", tag.name())));
        }
        let header = |attr: &str, default: &str, p: &mut Self| match root.attribute(attr) {
            Some(v) => v.to_string(),
            None => {
                p.warn(root, format!("EPackage has no `{attr}`; using `{default}`"));
                default.to_string()
            }
        };
        let name = header("name", &options.package.name, self);
        let ns_uri = header("nsURI", &options.package.ns_uri, self);
        let ns_prefix = header("nsPrefix", &options.package.ns_prefix, self);
        let name = self.identifier(root, &name, "package name");

        let mut m = Metamodel {
            name,
            ns_uri,
            ns_prefix,
            classes: Vec::new(),
        };
        for child in root.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "eClassifiers" => match xsi_type(child) {
                    Some("EClass") => m.classes.push(self.class(child)?),
                    Some(other) => self.warn(child, format!("unsupported classifier `{other}` skipped")),
                    None => return Err(self.structure(child, "eClassifiers without xsi:type")),
                },
                other => self.warn(child, format!("unsupported element `{other}` skipped")),
            }
        }
        Ok(m)
    }

    fn class(&mut self, node: Node) -> Result<ClassDef, EcoreError> {
        let Some(raw_name) = node.attribute("name") else {
            return Err(self.structure(node, "EClass without a name"));
        };
        let mut class = ClassDef::new(self.identifier(node, raw_name, "class name"));
        class.is_abstract = self.flag(node, "abstract")?;
        if self.flag(node, "interface")? {
            self.warn(node, format!("interface `{raw_name}` treated as abstract class"));
            class.is_abstract = true;
        }
        if let Some(supers) = node.attribute("eSuperTypes") {
            for token in supers.split_whitespace() {
                let name = self.fragment(node, token);
                if !class.super_types.contains(&name) {
                    class.super_types.push(name);
                }
            }
        }

        for child in node.children().filter(Node::is_element) {
            match (child.tag_name().name(), xsi_type(child)) {
                ("eStructuralFeatures", Some("EAttribute")) => {
                    let attr = self.attribute(child)?;
                    class.attributes.push(attr);
                }
                ("eStructuralFeatures", Some("EReference")) => {
                    let reference = self.reference(child)?;
                    class.references.push(reference);
                }
                ("eStructuralFeatures", other) => {
                    return Err(self.structure(child, format!("unknown structural feature type {other:?}")))
                }
                (other, _) => self.warn(child, format!("unsupported element `{other}` in `{raw_name}` skipped")),
            }
        }
        Ok(class)
    }

    fn attribute(&mut self, node: Node) -> Result<AttributeDef, EcoreError> {
        let Some(raw_name) = node.attribute("name") else {
            return Err(self.structure(node, "EAttribute without a name"));
        };
        let name = self.identifier(node, raw_name, "attribute name");
        let value_type = match node.attribute("eType") {
            None => {
                self.warn(node, format!("attribute `{name}` has no eType; defaulting to EString"));
                ValueType::String
            }
            Some(e_type) => {
                let type_name = e_type.rsplit("#//").next().unwrap_or(e_type);
                match type_name.parse::<ValueType>() {
                    Ok(t) if type_name.starts_with('E') => t,
                    _ => {
                        self.warn(node, format!("unknown eType `{e_type}` of `{name}` mapped to EString"));
                        ValueType::String
                    }
                }
            }
        };
        if let Some(upper) = node.attribute("upperBound") {
            if upper != "1" {
                self.warn(node, format!("many-valued attribute `{name}` flattened to a single value"));
            }
        }
        self.check_extras(node, &["xsi:type", "name", "eType", "defaultValueLiteral", "lowerBound", "upperBound"]);

        let mut attr = AttributeDef::new(name, value_type);
        if let Some(default) = node.attribute("defaultValueLiteral") {
            if value_type.accepts(default) {
                attr.default_value = Some(default.to_string());
            } else {
                self.warn(node, format!("default `{default}` of `{}` is not a valid {value_type}; dropped", attr.name));
            }
        }
        Ok(attr)
    }

    fn reference(&mut self, node: Node) -> Result<ReferenceDef, EcoreError> {
        let Some(raw_name) = node.attribute("name") else {
            return Err(self.structure(node, "EReference without a name"));
        };
        let name = self.identifier(node, raw_name, "reference name");
        let Some(e_type) = node.attribute("eType") else {
            return Err(self.structure(node, format!("reference `{name}` has no eType")));
        };
        let target = self.fragment(node, e_type);
        let containment = self.flag(node, "containment")?;
        let lower_bound = match node.attribute("lowerBound") {
            None => 0,
            Some(v) => v
                .parse::<u32>()
                .map_err(|_| self.structure(node, format!("lowerBound `{v}` is not a non-negative integer")))?,
        };
        let upper_bound = match node.attribute("upperBound") {
            None => 1,
            Some(v) => v
                .parse::<i64>()
                .map_err(|_| self.structure(node, format!("upperBound `{v}` is not an integer")))?,
        };
        if node.attribute("eOpposite").is_some() {
            self.warn(node, format!("eOpposite of `{name}` is not supported and was dropped"));
        }
        self.check_extras(node, &["xsi:type", "name", "eType", "containment", "lowerBound", "upperBound", "eOpposite"]);
        Ok(ReferenceDef {
            name,
            target,
            containment,
            lower_bound,
            upper_bound,
        })
    }

    fn flag(&self, node: Node, attr: &str) -> Result<bool, EcoreError> {
        match node.attribute(attr) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(other) => Err(self.structure(node, format!("`{attr}` must be true or false, found `{other}`"))),
        }
    }

    /// `#//Name`, also `ecore:EClass other.ecore#//Name`; bare names are
    /// accepted with a warning.
    fn fragment(&mut self, node: Node, token: &str) -> String {
        match token.rsplit_once("#//") {
            Some((prefix, name)) => {
                if !prefix.is_empty() && !prefix.ends_with(' ') {
                    self.warn(node, format!("cross-resource reference `{token}` resolved locally"));
                }
                self.identifier(node, name, "class reference")
            }
            None => {
                self.warn(node, format!("reference `{token}` is not a fragment URI"));
                self.identifier(node, token, "class reference")
            }
        }
    }

    fn check_extras(&mut self, node: Node, known: &[&str]) {
        let unknown: Vec<String> = node
            .attributes()
            .filter(|a| a.namespace() != Some(XSI_NS))
            .map(|a| a.name().to_string())
            .filter(|n| !known.contains(&n.as_str()) && !IGNORED_FEATURE_ATTRS.contains(&n.as_str()))
            .collect();
        for attr in unknown {
            self.warn(node, format!("unsupported attribute `{attr}` ignored"));
        }
    }
}

fn xsi_type<'a>(node: Node<'a, '_>) -> Option<&'a str> {
    let value = node.attribute((XSI_NS, "type"))?;
    Some(value.rsplit(':').next().unwrap_or(value))
}
