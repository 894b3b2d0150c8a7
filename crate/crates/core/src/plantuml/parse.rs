use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;

use super::{PumlDocument, PumlError, PumlOptions, PumlParse, PACKAGE_PRAGMA};
use crate::diagnostics::{Diagnostic, ParseMode};
use crate::metamodel::{
    sanitize_identifier, validate, AttributeDef, ClassDef, Metamodel, ReferenceDef, Rule,
    ValueType, Violation, UNBOUNDED,
};

static CLASS_DECL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r#"^(?P<kw>abstract\s+class|abstract|class)\s+(?P<name>"[^"]+"|[^\s{<"]+)(?:\s+as\s+(?P<alias>[^\s{<]+))?\s*(?P<stereo><<[^>]*>>)?\s*(?:extends\s+(?P<ext>[^{]+?))?\s*(?P<open>\{\s*(?P<close>\})?)?\s*$"#,
    )
    .unwrap()
});

static ARROW: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?P<head><\||\*|o|<)?(?P<body>[-.]+(?:(?:up|down|left|right|u|d|l|r)[-.]+)?)(?P<tail>\|>|\*|o|>)?")
        .unwrap()
});

static DIRECTION_WORD: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:up|down|left|right|u|d|l|r)").unwrap());

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "interface", "enum", "annotation", "entity", "struct", "protocol", "object", "circle",
    "diamond", "json", "map", "usecase", "actor", "component", "abstract_class",
];

const CONTAINER_KEYWORDS: &[&str] = &["package", "namespace", "together", "rectangle", "frame", "folder", "node"];

const DIRECTIVE_KEYWORDS: &[&str] = &[
    "skinparam", "hide", "show", "title", "left", "top", "scale", "caption", "header", "footer",
    "allowmixing", "set", "remove", "restrict", "newpage", "mainframe",
];

/// Parses a PlantUML class diagram into the metamodel IR.
///
/// Source order of classes and features is preserved; callers that need a
/// canonical form canonicalize the result.
pub fn parse_puml(doc: &PumlDocument, options: &PumlOptions) -> Result<PumlParse, PumlError> {
    let mut p = Parser::new(options);
    p.run(&doc.raw_text)?;
    p.finish()
}

#[derive(Debug)]
enum EdgeKind {
    Composition,
    Association,
    Generalization,
}

#[derive(Debug)]
struct PendingEdge {
    line: usize,
    column: usize,
    kind: EdgeKind,
    /// Owner of the reference, or the sub class of a generalization.
    source: String,
    /// Reference target, or the super class.
    target: String,
    multiplicity: Option<(String, usize)>,
    label: Option<String>,
}

enum EdgeLine {
    Edge(PendingEdge),
    /// Relation-shaped but outside the subset; already diagnosed.
    Skipped,
    NotAnEdge,
}

enum Frame {
    ClassBody(usize),
    Skip,
    Transparent,
}

enum Multiline {
    BlockComment,
    Note,
    Legend,
}

struct Parser<'o> {
    options: &'o PumlOptions,
    metamodel: Metamodel,
    class_lines: HashMap<String, usize>,
    aliases: HashMap<String, String>,
    edges: Vec<PendingEdge>,
    warnings: Vec<Diagnostic>,
    frames: Vec<(Frame, usize)>,
}

impl<'o> Parser<'o> {
    fn new(options: &'o PumlOptions) -> Self {
        Parser {
            options,
            metamodel: Metamodel::empty(&options.package),
            class_lines: HashMap::new(),
            aliases: HashMap::new(),
            edges: Vec::new(),
            warnings: Vec::new(),
            frames: Vec::new(),
        }
    }

    fn warn(&mut self, line: usize, column: usize, message: impl Into<String>) {
        self.warnings.push(Diagnostic::new(line, column, message));
    }

    fn run(&mut self, text: &str) -> Result<(), PumlError> {
        let lines: Vec<&str> = text.lines().collect();
        let is_marker = |l: &str, m: &str| l.trim_start().starts_with(m);

        let starts: Vec<usize> = (0..lines.len()).filter(|i| is_marker(lines[*i], "@startuml")).collect();
        let ends: Vec<usize> = (0..lines.len()).filter(|i| is_marker(lines[*i], "@enduml")).collect();
        let start = match starts.as_slice() {
            [] => return Err(PumlError::Syntax(Diagnostic::new(1, 1, "missing @startuml"))),
            [s] => *s,
            [_, second, ..] => {
                return Err(PumlError::Syntax(Diagnostic::new(
                    second + 1,
                    1,
                    "more than one @startuml block",
                )))
            }
        };
        let end = match ends.as_slice() {
            [] => {
                return Err(PumlError::Syntax(Diagnostic::new(
                    lines.len().max(1),
                    1,
                    "missing @enduml",
                )))
            }
            [e] if *e > start => *e,
            [e] => return Err(PumlError::Syntax(Diagnostic::new(e + 1, 1, "@enduml before @startuml"))),
            [_, second, ..] => {
                return Err(PumlError::Syntax(Diagnostic::new(second + 1, 1, "more than one @enduml")))
            }
        };

        for (i, line) in lines.iter().enumerate() {
            if (i < start || i > end) && !is_ignorable(line) {
                self.warn(i + 1, 1, "content outside the @startuml block ignored");
            }
        }

        let mut multiline: Option<(Multiline, usize)> = None;
        for (i, raw) in lines.iter().enumerate().take(end).skip(start + 1) {
            let n = i + 1;
            let line = raw.trim();
            let indent = raw.chars().count() - raw.trim_start().chars().count();
            let col = indent + 1;

            if let Some((kind, _)) = &multiline {
                let closed = match kind {
                    Multiline::BlockComment => line.ends_with("'/"),
                    Multiline::Note => line.eq_ignore_ascii_case("end note") || line.eq_ignore_ascii_case("endnote"),
                    Multiline::Legend => line.eq_ignore_ascii_case("endlegend") || line.eq_ignore_ascii_case("end legend"),
                };
                if closed {
                    multiline = None;
                }
                continue;
            }

            if line.is_empty() {
                continue;
            }
            if line.starts_with("/'") {
                if !line[2..].contains("'/") {
                    multiline = Some((Multiline::BlockComment, n));
                }
                continue;
            }
            if line.starts_with('\'') {
                if let Some(rest) = raw.trim_start().strip_prefix(PACKAGE_PRAGMA) {
                    self.package_pragma(rest, n, col)?;
                }
                continue;
            }

            if let Some(&(Frame::ClassBody(idx), _)) = self.frames.last() {
                if line == "}" {
                    self.frames.pop();
                } else {
                    self.feature(idx, line, n, col)?;
                }
                continue;
            }
            if line == "}" {
                match self.frames.pop() {
                    Some(_) => continue,
                    None => return Err(PumlError::Syntax(Diagnostic::new(n, col, "unbalanced `}`"))),
                }
            }
            if let Some((Frame::Skip, _)) = self.frames.last() {
                if line.ends_with('{') {
                    self.frames.push((Frame::Skip, n));
                }
                continue;
            }

            let first = line.split(|c: char| c.is_whitespace() || c == '{').next().unwrap_or("");
            let keyword = first.to_ascii_lowercase();
            if keyword == "class" || keyword == "abstract" {
                self.class_decl(line, n, col)?;
                continue;
            }
            // A class may be named like a keyword (`Component <|-- Sensor`).
            let edge = self.edge(line, n, col)?;
            if !matches!(edge, EdgeLine::NotAnEdge) {
                if let EdgeLine::Edge(edge) = edge {
                    self.edges.push(edge);
                }
            } else if keyword == "note" {
                let single = line.contains(':') || line.starts_with("note \"") || line.contains(" as ");
                if !single {
                    multiline = Some((Multiline::Note, n));
                }
                self.warn(n, col, "unsupported construct `note` skipped");
            } else if keyword == "legend" {
                multiline = Some((Multiline::Legend, n));
                self.warn(n, col, "unsupported construct `legend` skipped");
            } else if UNSUPPORTED_KEYWORDS.contains(&keyword.as_str()) {
                if line.ends_with('{') {
                    self.frames.push((Frame::Skip, n));
                }
                self.warn(n, col, format!("unsupported construct `{first}` skipped"));
            } else if CONTAINER_KEYWORDS.contains(&keyword.as_str()) {
                if line.ends_with('{') {
                    self.frames.push((Frame::Transparent, n));
                }
                self.warn(n, col, format!("unsupported construct `{first}`: contents parsed as top level"));
            } else if DIRECTIVE_KEYWORDS.contains(&keyword.as_str()) || first.starts_with('!') {
                if line.ends_with('{') {
                    self.frames.push((Frame::Skip, n));
                }
                self.warn(n, col, format!("presentation directive `{first}` ignored"));
            } else {
                self.warn(n, col, format!("unsupported line `{line}` skipped"));
            }
        }

        if let Some((kind, line)) = multiline {
            let what = match kind {
                Multiline::BlockComment => "block comment",
                Multiline::Note => "note",
                Multiline::Legend => "legend",
            };
            return Err(PumlError::Syntax(Diagnostic::new(line, 1, format!("unterminated {what}"))));
        }
        if let Some((_, line)) = self.frames.last() {
            return Err(PumlError::Syntax(Diagnostic::new(*line, 1, "unclosed `{`")));
        }
        Ok(())
    }

    fn package_pragma(&mut self, rest: &str, n: usize, col: usize) -> Result<(), PumlError> {
        for token in rest.split_whitespace() {
            let Some((key, value)) = token.split_once('=') else {
                return Err(PumlError::Syntax(Diagnostic::new(n, col, format!("malformed package pragma entry `{token}`"))));
            };
            let value = value.trim_matches('"').to_string();
            match key {
                "name" => self.metamodel.name = value,
                "nsURI" => self.metamodel.ns_uri = value,
                "nsPrefix" => self.metamodel.ns_prefix = value,
                _ => self.warn(n, col, format!("unknown package pragma key `{key}`")),
            }
        }
        Ok(())
    }

    fn identifier(&mut self, raw: &str, n: usize, col: usize, what: &str) -> String {
        let raw = raw.trim_matches('"');
        match sanitize_identifier(raw) {
            None => raw.to_string(),
            Some(clean) => {
                self.warn(n, col, format!("{what} `{raw}` sanitized to `{clean}`"));
                clean
            }
        }
    }

    fn class_decl(&mut self, line: &str, n: usize, col: usize) -> Result<(), PumlError> {
        let Some(caps) = CLASS_DECL.captures(line) else {
            return Err(PumlError::Syntax(Diagnostic::new(n, col, format!("malformed class declaration `{line}`"))));
        };
        let name_col = col + line[..caps.name("name").unwrap().start()].chars().count();
        let raw_name = caps.name("name").unwrap().as_str();
        let name = match caps.name("alias") {
            Some(alias) => {
                let alias_name = self.identifier(alias.as_str(), n, name_col, "class alias");
                self.aliases.insert(raw_name.trim_matches('"').to_string(), alias_name.clone());
                alias_name
            }
            None => self.identifier(raw_name, n, name_col, "class name"),
        };
        if self.class_lines.contains_key(&name) {
            return Err(PumlError::DuplicateClass { name, line: n });
        }
        if let Some(stereo) = caps.name("stereo") {
            self.warn(n, col, format!("stereotype `{}` ignored", stereo.as_str()));
        }

        let mut class = ClassDef::new(name.clone());
        class.is_abstract = caps.name("kw").unwrap().as_str().starts_with("abstract");
        self.class_lines.insert(name.clone(), n);

        if let Some(ext) = caps.name("ext") {
            let ext_col = col + line[..ext.start()].chars().count();
            for sup in ext.as_str().split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let target = self.identifier(sup, n, ext_col, "super type");
                self.edges.push(PendingEdge {
                    line: n,
                    column: ext_col,
                    kind: EdgeKind::Generalization,
                    source: name.clone(),
                    target,
                    multiplicity: None,
                    label: None,
                });
            }
        }

        self.metamodel.classes.push(class);
        if caps.name("open").is_some() && caps.name("close").is_none() {
            self.frames.push((Frame::ClassBody(self.metamodel.classes.len() - 1), n));
        }
        Ok(())
    }

    fn feature(&mut self, idx: usize, line: &str, n: usize, col: usize) -> Result<(), PumlError> {
        if line == "--" || line == ".." || line == "==" || line == "__" {
            self.warn(n, col, "body separator ignored");
            return Ok(());
        }
        let mut body = line;
        let mut offset = 0;
        if let Some(rest) = body.strip_prefix(['+', '-', '#', '~']) {
            offset += 1;
            body = rest.trim_start();
            offset += rest.len() - body.len();
        }
        if body.starts_with('{') {
            self.warn(n, col, format!("unsupported member modifier in `{line}`; member skipped"));
            return Ok(());
        }
        if body.contains('(') {
            self.warn(n, col, format!("operation `{body}` skipped"));
            return Ok(());
        }
        let col = col + offset;

        let (decl, default) = match body.split_once('=') {
            Some((d, v)) => (d.trim(), Some(v.trim())),
            None => (body.trim(), None),
        };
        let class_name = self.metamodel.classes[idx].name.clone();

        let (raw_name, raw_type) = if let Some((name, ty)) = decl.split_once(':') {
            (name.trim(), Some(ty.trim()))
        } else {
            let words: Vec<&str> = decl.split_whitespace().collect();
            match words.as_slice() {
                [name] => (*name, None),
                [ty, name] if ty.parse::<ValueType>().is_ok() => (*name, Some(*ty)),
                _ => {
                    self.warn(n, col, format!("unrecognized member `{line}` skipped"));
                    return Ok(());
                }
            }
        };
        if raw_name.is_empty() {
            return Err(PumlError::Syntax(Diagnostic::new(n, col, "field without a name")));
        }
        let name = self.identifier(raw_name, n, col, "field name");

        let value_type = match raw_type {
            None | Some("") => {
                self.warn(n, col, format!("field `{class_name}.{name}` has no type; defaulting to String"));
                ValueType::String
            }
            Some(ty) => {
                let bare = ty.trim_end_matches("[]").trim_end_matches("[*]");
                if bare.len() != ty.len() {
                    self.warn(n, col, format!("many-valued field `{class_name}.{name}` flattened to a single value"));
                }
                match bare.parse::<ValueType>() {
                    Ok(t) => t,
                    Err(_) => {
                        self.warn(n, col, format!("unknown type `{ty}` of `{class_name}.{name}` mapped to String"));
                        ValueType::String
                    }
                }
            }
        };

        let mut attr = AttributeDef::new(name.clone(), value_type);
        if let Some(raw_default) = default {
            let literal = unquote(raw_default);
            if value_type.accepts(&literal) {
                attr.default_value = Some(literal);
            } else if value_type == ValueType::Boolean && value_type.accepts(&literal.to_ascii_lowercase()) {
                attr.default_value = Some(literal.to_ascii_lowercase());
            } else {
                self.warn(
                    n,
                    col,
                    format!("default `{raw_default}` of `{class_name}.{name}` is not a valid {value_type}; dropped"),
                );
            }
        }
        self.metamodel.classes[idx].attributes.push(attr);
        Ok(())
    }

    /// Recognizes `A ["m"] <arrow> ["m"] B [: label]`.
    fn edge(&mut self, line: &str, n: usize, col: usize) -> Result<EdgeLine, PumlError> {
        let mut cur = Cursor { s: line, pos: 0 };
        let Some(left) = cur.name() else { return Ok(EdgeLine::NotAnEdge) };
        cur.ws();
        let left_mult = cur.quoted().map(|q| (q, col + cur.col()));
        cur.ws();
        let arrow_col = col + cur.col();
        let Some(caps) = ARROW.captures(cur.rest()) else { return Ok(EdgeLine::NotAnEdge) };
        let arrow = caps.get(0).unwrap().as_str().to_string();
        cur.pos += arrow.len();
        cur.ws();
        let right_mult = cur.quoted().map(|q| (q, col + cur.col()));
        cur.ws();
        let right_col = col + cur.col();
        let Some(right) = cur.name() else {
            return Err(PumlError::Syntax(Diagnostic::new(n, right_col, format!("expected class name after `{arrow}`"))));
        };
        cur.ws();
        let label = if cur.rest().is_empty() {
            None
        } else if let Some(rest) = cur.rest().strip_prefix(':') {
            Some(rest.trim().to_string())
        } else {
            return Err(PumlError::Syntax(Diagnostic::new(n, col + cur.col(), format!("unexpected `{}`", cur.rest()))));
        };

        let head = caps.name("head").map(|m| m.as_str());
        let tail = caps.name("tail").map(|m| m.as_str());
        let body = caps.name("body").unwrap().as_str();
        let dotted = DIRECTION_WORD.replace_all(body, "").contains('.');

        let left = self.resolve_alias(&left, n, col);
        let right = self.resolve_alias(&right, n, right_col);

        let labelled = label.is_some() || left_mult.is_some() || right_mult.is_some();
        let (kind, source, target, multiplicity) = match (head, tail, dotted) {
            (Some("*"), None, false) => (EdgeKind::Composition, left, right, right_mult),
            (None, Some("*"), false) => (EdgeKind::Composition, right, left, left_mult),
            (Some("<|"), None, false) => (EdgeKind::Generalization, right, left, None),
            (None, Some("|>"), false) => (EdgeKind::Generalization, left, right, None),
            (None, Some(">"), false) => (EdgeKind::Association, left, right, right_mult),
            (Some("<"), None, false) => (EdgeKind::Association, right, left, left_mult),
            _ => {
                self.warn(n, arrow_col, format!("unsupported relation `{arrow}` skipped"));
                return Ok(EdgeLine::Skipped);
            }
        };
        if matches!(kind, EdgeKind::Generalization) && labelled {
            self.warn(n, arrow_col, "labels on a generalization are ignored");
        }
        Ok(EdgeLine::Edge(PendingEdge {
            line: n,
            column: arrow_col,
            kind,
            source,
            target,
            multiplicity,
            label,
        }))
    }

    fn resolve_alias(&mut self, raw: &str, n: usize, col: usize) -> String {
        match self.aliases.get(raw.trim_matches('"')) {
            Some(alias) => alias.clone(),
            None => self.identifier(raw, n, col, "class name"),
        }
    }

    fn finish(mut self) -> Result<PumlParse, PumlError> {
        let mut unresolved = Vec::new();
        let edges = std::mem::take(&mut self.edges);
        for edge in edges {
            for name in [&edge.source, &edge.target] {
                if !self.class_lines.contains_key(name) {
                    let rule = match edge.kind {
                        EdgeKind::Generalization => Rule::UnresolvedSuperType,
                        _ => Rule::UnresolvedTarget,
                    };
                    unresolved.push(Violation {
                        rule,
                        element: name.clone(),
                        message: format!("line {}: class `{name}` is used but never declared", edge.line),
                    });
                }
            }
            if !unresolved.is_empty() {
                continue;
            }
            match edge.kind {
                EdgeKind::Generalization => {
                    let class = self.metamodel.class_mut(&edge.source).unwrap();
                    if class.super_types.contains(&edge.target) {
                        self.warnings.push(Diagnostic::new(
                            edge.line,
                            edge.column,
                            format!("duplicate generalization {} -> {}", edge.source, edge.target),
                        ));
                    } else {
                        class.super_types.push(edge.target);
                    }
                }
                EdgeKind::Composition | EdgeKind::Association => {
                    let containment = matches!(edge.kind, EdgeKind::Composition);
                    let (lower, upper) = match &edge.multiplicity {
                        None if containment => (0, UNBOUNDED),
                        None => (0, 1),
                        Some((text, mcol)) => match parse_multiplicity(text) {
                            Some(b) => b,
                            None => {
                                let d = Diagnostic::new(edge.line, *mcol, format!("invalid multiplicity `{text}`"));
                                if self.options.mode == ParseMode::Strict {
                                    return Err(PumlError::Syntax(d));
                                }
                                self.warnings.push(Diagnostic { message: format!("{}; default used", d.message), ..d });
                                if containment { (0, UNBOUNDED) } else { (0, 1) }
                            }
                        },
                    };
                    let name = match edge.label.as_deref().map(clean_label) {
                        Some(l) if !l.is_empty() => {
                            let label_col = edge.column;
                            self.identifier(&l, edge.line, label_col, "reference name")
                        }
                        _ => default_reference_name(&edge.target),
                    };
                    let reference = ReferenceDef {
                        name,
                        target: edge.target,
                        containment,
                        lower_bound: lower,
                        upper_bound: upper,
                    };
                    self.metamodel.class_mut(&edge.source).unwrap().references.push(reference);
                }
            }
        }
        if !unresolved.is_empty() {
            return Err(PumlError::Invalid(unresolved));
        }

        let violations = validate(&self.metamodel);
        if !violations.is_empty() {
            return Err(PumlError::Invalid(violations));
        }
        if self.options.mode == ParseMode::Strict && !self.warnings.is_empty() {
            return Err(PumlError::Strict(self.warnings));
        }
        Ok(PumlParse {
            metamodel: self.metamodel,
            warnings: self.warnings,
        })
    }
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn col(&self) -> usize {
        self.s[..self.pos].chars().count()
    }

    fn ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn quoted(&mut self) -> Option<String> {
        let rest = self.rest().strip_prefix('"')?;
        let end = rest.find('"')?;
        self.pos += end + 2;
        Some(rest[..end].to_string())
    }

    fn name(&mut self) -> Option<String> {
        if self.rest().starts_with('"') {
            return self.quoted();
        }
        let len = self
            .rest()
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '.'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return None;
        }
        let name = &self.rest()[..len];
        self.pos += len;
        Some(name.to_string())
    }
}

fn is_ignorable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('\'')
}

fn unquote(raw: &str) -> String {
    let Some(inner) = raw.strip_prefix('"').and_then(|r| r.strip_suffix('"')) else {
        return raw.to_string();
    };
    let mut out = String::with_capacity(inner.len());
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// `*`, `n`, `lo..hi` with `hi` a number or `*`.
pub(crate) fn parse_multiplicity(text: &str) -> Option<(u32, i64)> {
    let text = text.trim();
    let bound = |s: &str| -> Option<i64> {
        match s.trim() {
            "*" | "n" | "N" => Some(UNBOUNDED),
            s => s.parse::<u32>().ok().map(i64::from),
        }
    };
    let (lower, upper) = match text.split_once("..") {
        Some((lo, hi)) => (lo.trim().parse::<u32>().ok()?, bound(hi)?),
        None => match bound(text)? {
            UNBOUNDED => (0, UNBOUNDED),
            n => (n as u32, n),
        },
    };
    if upper == 0 || (upper != UNBOUNDED && upper < i64::from(lower)) {
        return None;
    }
    Some((lower, upper))
}

/// Strips reading-direction arrows PlantUML allows in labels (`: has >`).
fn clean_label(label: &str) -> String {
    label.trim().trim_matches(|c| c == '<' || c == '>' || c == '▶' || c == '◀').trim().to_string()
}

/// Reference name for an unlabeled edge: lower-cased target plus `s`.
pub(crate) fn default_reference_name(target: &str) -> String {
    format!("{}s", target.to_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamodel::seed_metamodel;

    fn parse(text: &str) -> Result<PumlParse, PumlError> {
        parse_puml(&PumlDocument::new(text), &PumlOptions::default())
    }

    fn parse_strict(text: &str) -> Result<PumlParse, PumlError> {
        parse_puml(&PumlDocument::new(text), &PumlOptions::strict())
    }

    #[test]
    fn keyword_named_classes_in_edges() {
        let p = parse("@startuml\nclass Component\nclass Sensor\nComponent <|-- Sensor\n@enduml").unwrap();
        assert!(p.warnings.is_empty(), "{:?}", p.warnings);
        assert_eq!(p.metamodel.class("Sensor").unwrap().super_types, ["Component"]);
    }

    #[test]
    fn minimal_diagram() {
        let p = parse("@startuml\nclass Vehicle\n@enduml").unwrap();
        assert_eq!(p.metamodel, seed_metamodel());
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn composition_defaults() {
        let p = parse("@startuml\nclass Vehicle\nclass Sensor\nVehicle *-- Sensor\n@enduml").unwrap();
        let v = p.metamodel.class("Vehicle").unwrap();
        assert_eq!(v.references, [ReferenceDef::containment("sensors", "Sensor")]);
    }

    #[test]
    fn reversed_composition_and_labels() {
        let p = parse("@startuml\nclass Vehicle\nclass Wheel\nWheel \"4\" --* \"1\" Vehicle : wheels >\n@enduml").unwrap();
        let r = &p.metamodel.class("Vehicle").unwrap().references[0];
        assert_eq!((r.name.as_str(), r.target.as_str(), r.containment), ("wheels", "Wheel", true));
        assert_eq!((r.lower_bound, r.upper_bound), (4, 4));
    }

    #[test]
    fn generalization_both_directions() {
        let p = parse("@startuml\nclass Sensor\nclass Camera\nclass Radar\nSensor <|-- Camera\nRadar --|> Sensor\n@enduml")
            .unwrap();
        assert_eq!(p.metamodel.class("Camera").unwrap().super_types, ["Sensor"]);
        assert_eq!(p.metamodel.class("Radar").unwrap().super_types, ["Sensor"]);
    }

    #[test]
    fn extends_clause_and_direction_hints() {
        let p = parse("@startuml\nabstract Sensor\nclass Camera extends Sensor\nclass Lidar\nLidar -up-|> Sensor\n@enduml")
            .unwrap();
        assert!(p.metamodel.class("Sensor").unwrap().is_abstract);
        assert_eq!(p.metamodel.class("Camera").unwrap().super_types, ["Sensor"]);
        assert_eq!(p.metamodel.class("Lidar").unwrap().super_types, ["Sensor"]);
    }

    #[test]
    fn typed_field_with_default() {
        let p = parse("@startuml\nclass Radar {\n  range : Double = 50.0\n}\n@enduml").unwrap();
        let attr = &p.metamodel.class("Radar").unwrap().attributes[0];
        assert_eq!(*attr, AttributeDef::new("range", ValueType::Double).with_default("50.0"));
    }

    #[test]
    fn field_spellings() {
        let text = "@startuml\nclass A {\n  +name : String = \"front cam\"\n  -int count\n  enabled : boolean = True\n  label\n  foo()\n}\n@enduml";
        let p = parse(text).unwrap();
        let a = p.metamodel.class("A").unwrap();
        assert_eq!(
            a.attributes,
            [
                AttributeDef::new("name", ValueType::String).with_default("front cam"),
                AttributeDef::new("count", ValueType::Int),
                AttributeDef::new("enabled", ValueType::Boolean).with_default("true"),
                AttributeDef::new("label", ValueType::String),
            ]
        );
        assert_eq!(p.warnings.len(), 2, "{:?}", p.warnings);
        assert_eq!((p.warnings[0].line, p.warnings[1].line), (6, 7));
    }

    #[test]
    fn untyped_field_is_a_strict_diagnostic() {
        let err = parse_strict("@startuml\nclass A {\n  range\n}\n@enduml").unwrap_err();
        let PumlError::Strict(ds) = err else { panic!("{err:?}") };
        assert_eq!((ds[0].line, ds[0].column), (3, 3));
    }

    #[test]
    fn unsupported_constructs_are_located() {
        let text = "@startuml\nclass A\nnote left of A\n  hello\nend note\nclass B\nA -- B\n@enduml";
        let lenient = parse(text).unwrap();
        assert_eq!(lenient.metamodel.classes.len(), 2);
        let lines: Vec<_> = lenient.warnings.iter().map(|d| d.line).collect();
        assert_eq!(lines, [3, 7]);
        assert!(matches!(parse_strict(text), Err(PumlError::Strict(_))));
    }

    #[test]
    fn enum_bodies_are_skipped_whole() {
        let text = "@startuml\nenum Mode {\n  ECO\n  SPORT\n}\nclass Vehicle\n@enduml";
        let p = parse(text).unwrap();
        assert_eq!(p.metamodel.classes.len(), 1);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn package_contents_are_kept() {
        let text = "@startuml\npackage vehicle {\n  class Vehicle\n}\n@enduml";
        let p = parse(text).unwrap();
        assert_eq!(p.metamodel.classes.len(), 1);
    }

    #[test]
    fn undeclared_edge_endpoint_is_a_violation() {
        let err = parse("@startuml\nclass Vehicle\nVehicle *-- Sensor\n@enduml").unwrap_err();
        let PumlError::Invalid(v) = err else { panic!("{err:?}") };
        assert_eq!(v[0].rule, Rule::UnresolvedTarget);
        assert_eq!(v[0].element, "Sensor");
    }

    #[test]
    fn duplicate_class_is_rejected() {
        let err = parse("@startuml\nclass A\nclass A\n@enduml").unwrap_err();
        assert_eq!(err, PumlError::DuplicateClass { name: "A".into(), line: 3 });
    }

    #[test]
    fn block_markers() {
        assert!(matches!(parse("class A"), Err(PumlError::Syntax(_))));
        assert!(matches!(parse("@startuml\nclass A"), Err(PumlError::Syntax(_))));
        let err = parse("@startuml\n@enduml\n@startuml\n@enduml").unwrap_err();
        assert!(matches!(err, PumlError::Syntax(ref d) if d.line == 3), "{err:?}");
    }

    #[test]
    fn syntax_errors_carry_columns() {
        let err = parse("@startuml\nclass A\nclass B\n  A *-- B extra\n@enduml").unwrap_err();
        let PumlError::Syntax(d) = err else { panic!("{err:?}") };
        assert_eq!((d.line, d.column), (4, 11));
        let err = parse("@startuml\nclass A {\n@enduml").unwrap_err();
        assert!(matches!(err, PumlError::Syntax(ref d) if d.line == 2), "{err:?}");
    }

    #[test]
    fn sanitized_names_warn() {
        let p = parse("@startuml\nclass \"Front Camera\"\n@enduml").unwrap();
        assert_eq!(p.metamodel.classes[0].name, "Front_Camera");
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn multiplicities() {
        assert_eq!(parse_multiplicity("0..*"), Some((0, -1)));
        assert_eq!(parse_multiplicity("1..*"), Some((1, -1)));
        assert_eq!(parse_multiplicity("*"), Some((0, -1)));
        assert_eq!(parse_multiplicity("1"), Some((1, 1)));
        assert_eq!(parse_multiplicity("2..4"), Some((2, 4)));
        assert_eq!(parse_multiplicity("0"), None);
        assert_eq!(parse_multiplicity("3..1"), None);
        assert_eq!(parse_multiplicity("many"), None);
    }

    #[test]
    fn package_pragma() {
        let p = parse("@startuml\n' metaforge:package name=car nsURI=http://x/car nsPrefix=car\nclass Car\n@enduml").unwrap();
        assert_eq!((p.metamodel.name.as_str(), p.metamodel.ns_uri.as_str()), ("car", "http://x/car"));
    }

    #[test]
    fn default_names() {
        assert_eq!(default_reference_name("Sensor"), "sensors");
        assert_eq!(default_reference_name("PowerManagement"), "powermanagements");
    }
}
