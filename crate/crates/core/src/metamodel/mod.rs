//! The metamodel IR shared by the PlantUML and Ecore codecs.
//!
//! A [`Metamodel`] is a single package of classes. Classes carry typed
//! attributes, references to other classes (containment or plain) and an
//! ordered set of super types. All operations over the IR are pure.

mod ident;
mod merge;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ident::{is_identifier, sanitize_identifier};
pub use merge::{merge, MergeError, MergeOutcome};
pub use validate::{validate, Rule, Violation};

/// Default package name used when a source format carries none.
pub const DEFAULT_PACKAGE_NAME: &str = "vehicle";
pub const DEFAULT_NS_URI: &str = "http://www.example.org/vehicle";
pub const DEFAULT_NS_PREFIX: &str = "vehicle";

/// Name of the single class in the seed metamodel.
pub const ROOT_CLASS: &str = "Vehicle";

/// Package header of a metamodel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PackageInfo {
    pub name: String,
    pub ns_uri: String,
    pub ns_prefix: String,
}

impl Default for PackageInfo {
    fn default() -> Self {
        PackageInfo {
            name: DEFAULT_PACKAGE_NAME.to_string(),
            ns_uri: DEFAULT_NS_URI.to_string(),
            ns_prefix: DEFAULT_NS_PREFIX.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Metamodel {
    pub name: String,
    pub ns_uri: String,
    pub ns_prefix: String,
    #[serde(default)]
    pub classes: Vec<ClassDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassDef {
    pub name: String,
    #[serde(default)]
    pub is_abstract: bool,
    #[serde(default)]
    pub super_types: Vec<String>,
    #[serde(default)]
    pub attributes: Vec<AttributeDef>,
    #[serde(default)]
    pub references: Vec<ReferenceDef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ValueType {
    String,
    Int,
    Double,
    Float,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttributeDef {
    pub name: String,
    pub value_type: ValueType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_value: Option<String>,
}

/// Upper bound value denoting "unbounded".
pub const UNBOUNDED: i64 = -1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReferenceDef {
    pub name: String,
    pub target: String,
    #[serde(default)]
    pub containment: bool,
    #[serde(default)]
    pub lower_bound: u32,
    pub upper_bound: i64,
}

impl Metamodel {
    /// A metamodel with the given header and no classes.
    pub fn empty(package: &PackageInfo) -> Self {
        Metamodel {
            name: package.name.clone(),
            ns_uri: package.ns_uri.clone(),
            ns_prefix: package.ns_prefix.clone(),
            classes: Vec::new(),
        }
    }

    pub fn package(&self) -> PackageInfo {
        PackageInfo {
            name: self.name.clone(),
            ns_uri: self.ns_uri.clone(),
            ns_prefix: self.ns_prefix.clone(),
        }
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_mut(&mut self, name: &str) -> Option<&mut ClassDef> {
        self.classes.iter_mut().find(|c| c.name == name)
    }

    pub fn with_class(mut self, class: ClassDef) -> Self {
        self.classes.push(class);
        self
    }

    /// Sorted copy: classes by name, then within each class super types,
    /// attributes and references by name.
    ///
    /// Rejects invalid input with the full violation list.
    pub fn canonicalize(&self) -> Result<Metamodel, Vec<Violation>> {
        let violations = validate(self);
        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(self.sorted())
    }

    /// Sorting half of [`canonicalize`](Self::canonicalize), without validation.
    pub(crate) fn sorted(&self) -> Metamodel {
        let mut m = self.clone();
        m.classes.sort_by(|a, b| a.name.cmp(&b.name));
        for class in &mut m.classes {
            class.super_types.sort();
            class.attributes.sort_by(|a, b| a.name.cmp(&b.name));
            class.references.sort_by(|a, b| a.name.cmp(&b.name));
        }
        m
    }
}

/// The starting point of every construction session: one `Vehicle` class.
pub fn seed_metamodel() -> Metamodel {
    seed_metamodel_with(&PackageInfo::default())
}

pub fn seed_metamodel_with(package: &PackageInfo) -> Metamodel {
    Metamodel::empty(package).with_class(ClassDef::new(ROOT_CLASS))
}

impl ClassDef {
    pub fn new(name: impl Into<String>) -> Self {
        ClassDef {
            name: name.into(),
            is_abstract: false,
            super_types: Vec::new(),
            attributes: Vec::new(),
            references: Vec::new(),
        }
    }

    pub fn abstract_class(name: impl Into<String>) -> Self {
        ClassDef {
            is_abstract: true,
            ..ClassDef::new(name)
        }
    }

    pub fn extends(mut self, super_type: impl Into<String>) -> Self {
        self.super_types.push(super_type.into());
        self
    }

    pub fn attr(mut self, attribute: AttributeDef) -> Self {
        self.attributes.push(attribute);
        self
    }

    pub fn reference(mut self, reference: ReferenceDef) -> Self {
        self.references.push(reference);
        self
    }

    /// Whether the class declares an attribute or reference with this name.
    pub fn has_feature(&self, name: &str) -> bool {
        self.attributes.iter().any(|a| a.name == name)
            || self.references.iter().any(|r| r.name == name)
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.attributes
            .iter()
            .map(|a| a.name.as_str())
            .chain(self.references.iter().map(|r| r.name.as_str()))
    }
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, value_type: ValueType) -> Self {
        AttributeDef {
            name: name.into(),
            value_type,
            default_value: None,
        }
    }

    pub fn with_default(mut self, literal: impl Into<String>) -> Self {
        self.default_value = Some(literal.into());
        self
    }
}

impl ReferenceDef {
    /// A containment reference `0..*`.
    pub fn containment(name: impl Into<String>, target: impl Into<String>) -> Self {
        ReferenceDef {
            name: name.into(),
            target: target.into(),
            containment: true,
            lower_bound: 0,
            upper_bound: UNBOUNDED,
        }
    }

    /// A plain reference `0..1`.
    pub fn plain(name: impl Into<String>, target: impl Into<String>) -> Self {
        ReferenceDef {
            name: name.into(),
            target: target.into(),
            containment: false,
            lower_bound: 0,
            upper_bound: 1,
        }
    }

    pub fn bounds(mut self, lower: u32, upper: i64) -> Self {
        self.lower_bound = lower;
        self.upper_bound = upper;
        self
    }

    pub fn is_unbounded(&self) -> bool {
        self.upper_bound == UNBOUNDED
    }
}

impl ValueType {
    pub const ALL: [ValueType; 5] = [
        ValueType::String,
        ValueType::Int,
        ValueType::Double,
        ValueType::Float,
        ValueType::Boolean,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::String => "String",
            ValueType::Int => "Int",
            ValueType::Double => "Double",
            ValueType::Float => "Float",
            ValueType::Boolean => "Boolean",
        }
    }

    /// Whether `literal` is a valid default value for this type.
    pub fn accepts(self, literal: &str) -> bool {
        match self {
            ValueType::String => true,
            ValueType::Boolean => literal == "true" || literal == "false",
            ValueType::Int => {
                let digits = literal.strip_prefix(['-', '+']).unwrap_or(literal);
                !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
            }
            ValueType::Double | ValueType::Float => is_decimal_literal(literal),
        }
    }
}

/// `[+-]? digits ( . digits? )? ( [eE] [+-]? digits )?`, also `.5`.
fn is_decimal_literal(s: &str) -> bool {
    let s = s.strip_prefix(['-', '+']).unwrap_or(s);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    if int_part.is_empty() && frac_part.is_empty() {
        return false;
    }
    if !all_digits(int_part) || !all_digits(frac_part) {
        return false;
    }
    match exponent {
        None => true,
        Some(e) => {
            let e = e.strip_prefix(['-', '+']).unwrap_or(e);
            !e.is_empty() && all_digits(e)
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown value type `{0}`")]
pub struct UnknownValueType(pub String);

impl FromStr for ValueType {
    type Err = UnknownValueType;

    /// Accepts the IR names plus common spellings (`string`, `Integer`,
    /// `EInt`, `bool`, ...).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = match s.to_ascii_lowercase().as_str() {
            "string" | "estring" | "str" | "text" | "char" | "echar" => ValueType::String,
            "int" | "integer" | "eint" | "eintegerobject" | "long" | "elong" | "short"
            | "eshort" | "byte" | "ebyte" | "ebiginteger" => ValueType::Int,
            "double" | "edouble" | "edoubleobject" | "ebigdecimal" | "real" | "number" => {
                ValueType::Double
            }
            "float" | "efloat" | "efloatobject" => ValueType::Float,
            "boolean" | "bool" | "eboolean" | "ebooleanobject" => ValueType::Boolean,
            _ => return Err(UnknownValueType(s.to_string())),
        };
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_has_single_vehicle_class() {
        let seed = seed_metamodel();
        assert_eq!(seed.classes.len(), 1);
        assert_eq!(seed.classes[0].name, "Vehicle");
        assert!(seed.classes[0].attributes.is_empty());
        assert!(seed.classes[0].references.is_empty());
        assert!(validate(&seed).is_empty());
    }

    #[test]
    fn canonicalize_sorts_classes() {
        let m = Metamodel::empty(&PackageInfo::default())
            .with_class(ClassDef::new("B"))
            .with_class(ClassDef::new("A"));
        let c = m.canonicalize().unwrap();
        let names: Vec<_> = c.classes.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["A", "B"]);
        assert_eq!(c.canonicalize().unwrap(), c);
    }

    #[test]
    fn canonicalize_rejects_invalid() {
        let m = Metamodel::empty(&PackageInfo::default())
            .with_class(ClassDef::new("A").extends("Missing"));
        assert!(m.canonicalize().is_err());
    }

    #[test]
    fn default_literals() {
        assert!(ValueType::Boolean.accepts("true"));
        assert!(!ValueType::Boolean.accepts("True"));
        assert!(ValueType::Int.accepts("-42"));
        assert!(!ValueType::Int.accepts("4.2"));
        assert!(ValueType::Double.accepts("50.0"));
        assert!(ValueType::Double.accepts("1e-3"));
        assert!(ValueType::Float.accepts(".5"));
        assert!(!ValueType::Double.accepts("."));
        assert!(!ValueType::Double.accepts("abc"));
        assert!(!ValueType::Double.accepts("1e"));
        assert!(ValueType::String.accepts("anything at all"));
    }

    #[test]
    fn value_type_spellings() {
        assert_eq!("EDouble".parse::<ValueType>().unwrap(), ValueType::Double);
        assert_eq!("integer".parse::<ValueType>().unwrap(), ValueType::Int);
        assert_eq!("bool".parse::<ValueType>().unwrap(), ValueType::Boolean);
        assert!("EDate".parse::<ValueType>().is_err());
    }
}
