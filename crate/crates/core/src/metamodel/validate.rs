use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{is_identifier, Metamodel};

/// The invariant a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    InvalidIdentifier,
    InvalidPackage,
    DuplicateClass,
    DuplicateSuperType,
    SelfSuperType,
    UnresolvedSuperType,
    UnresolvedTarget,
    InheritanceCycle,
    DuplicateFeature,
    InheritedFeatureClash,
    InvalidDefault,
    InvalidBounds,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::InvalidIdentifier => "invalid-identifier",
            Rule::InvalidPackage => "invalid-package",
            Rule::DuplicateClass => "duplicate-class",
            Rule::DuplicateSuperType => "duplicate-super-type",
            Rule::SelfSuperType => "self-super-type",
            Rule::UnresolvedSuperType => "unresolved-super-type",
            Rule::UnresolvedTarget => "unresolved-target",
            Rule::InheritanceCycle => "inheritance-cycle",
            Rule::DuplicateFeature => "duplicate-feature",
            Rule::InheritedFeatureClash => "inherited-feature-clash",
            Rule::InvalidDefault => "invalid-default",
            Rule::InvalidBounds => "invalid-bounds",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    /// Offending element, e.g. `Sensor` or `Sensor.range`.
    pub element: String,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, element: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            rule,
            element: element.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.rule.as_str(), self.element, self.message)
    }
}

/// Checks every structural invariant of the IR. An empty result means the
/// metamodel is valid.
pub fn validate(m: &Metamodel) -> Vec<Violation> {
    let mut out = Vec::new();

    if !is_identifier(&m.name) {
        out.push(Violation::new(Rule::InvalidPackage, &m.name, "package name is not an identifier"));
    }
    if !is_identifier(&m.ns_prefix) {
        out.push(Violation::new(Rule::InvalidPackage, &m.ns_prefix, "nsPrefix is not an identifier"));
    }
    if m.ns_uri.trim().is_empty() {
        out.push(Violation::new(Rule::InvalidPackage, &m.name, "nsURI is empty"));
    }

    let mut seen = HashSet::new();
    for class in &m.classes {
        if !seen.insert(class.name.as_str()) {
            out.push(Violation::new(Rule::DuplicateClass, &class.name, "class declared more than once"));
        }
    }
    let declared = seen;

    for class in &m.classes {
        if !is_identifier(&class.name) {
            out.push(Violation::new(Rule::InvalidIdentifier, &class.name, "class name is not an identifier"));
        }

        let mut supers = HashSet::new();
        for sup in &class.super_types {
            if !supers.insert(sup.as_str()) {
                out.push(Violation::new(
                    Rule::DuplicateSuperType,
                    &class.name,
                    format!("super type `{sup}` listed more than once"),
                ));
            }
            if *sup == class.name {
                out.push(Violation::new(Rule::SelfSuperType, &class.name, "class extends itself"));
            } else if !declared.contains(sup.as_str()) {
                out.push(Violation::new(
                    Rule::UnresolvedSuperType,
                    &class.name,
                    format!("super type `{sup}` is not declared"),
                ));
            }
        }

        let mut features = HashSet::new();
        for name in class.feature_names() {
            let element = format!("{}.{}", class.name, name);
            if !is_identifier(name) {
                out.push(Violation::new(Rule::InvalidIdentifier, &element, "feature name is not an identifier"));
            }
            if !features.insert(name) {
                out.push(Violation::new(Rule::DuplicateFeature, &element, "feature declared more than once"));
            }
        }

        for attr in &class.attributes {
            if let Some(default) = &attr.default_value {
                if !attr.value_type.accepts(default) {
                    out.push(Violation::new(
                        Rule::InvalidDefault,
                        format!("{}.{}", class.name, attr.name),
                        format!("default `{default}` is not a valid {}", attr.value_type),
                    ));
                }
            }
        }

        for r in &class.references {
            let element = format!("{}.{}", class.name, r.name);
            if !declared.contains(r.target.as_str()) {
                out.push(Violation::new(
                    Rule::UnresolvedTarget,
                    &element,
                    format!("target class `{}` is not declared", r.target),
                ));
            }
            if r.upper_bound == 0 {
                out.push(Violation::new(Rule::InvalidBounds, &element, "upper bound must not be 0"));
            } else if r.upper_bound < -1 {
                out.push(Violation::new(
                    Rule::InvalidBounds,
                    &element,
                    format!("upper bound {} is negative", r.upper_bound),
                ));
            } else if r.upper_bound != -1 && r.upper_bound < i64::from(r.lower_bound) {
                out.push(Violation::new(
                    Rule::InvalidBounds,
                    &element,
                    format!("upper bound {} is below lower bound {}", r.upper_bound, r.lower_bound),
                ));
            }
        }
    }

    if let Some(cycle) = inheritance_cycle(m) {
        out.push(Violation::new(
            Rule::InheritanceCycle,
            cycle.join(", "),
            format!("generalization cycle among {}", cycle.join(", ")),
        ));
    }

    out.extend(inherited_clashes(m));
    out
}

/// Kahn's algorithm over resolved, non-self generalization edges. Returns
/// the sorted names of the classes left over, which all lie on or behind a
/// cycle.
pub(crate) fn inheritance_cycle(m: &Metamodel) -> Option<Vec<String>> {
    let names: BTreeSet<&str> = m.classes.iter().map(|c| c.name.as_str()).collect();
    let mut indegree: BTreeMap<&str, usize> = names.iter().map(|n| (*n, 0)).collect();
    let mut subs: HashMap<&str, Vec<&str>> = HashMap::new();
    for class in &m.classes {
        let supers: BTreeSet<&str> = class
            .super_types
            .iter()
            .map(String::as_str)
            .filter(|s| *s != class.name && names.contains(s))
            .collect();
        for sup in supers {
            *indegree.get_mut(class.name.as_str()).unwrap() += 1;
            subs.entry(sup).or_default().push(class.name.as_str());
        }
    }
    let mut ready: Vec<&str> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut visited = 0;
    while let Some(n) = ready.pop() {
        visited += 1;
        for sub in subs.get(n).into_iter().flatten() {
            let d = indegree.get_mut(sub).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.push(sub);
            }
        }
    }
    if visited == indegree.len() {
        return None;
    }
    Some(
        indegree
            .into_iter()
            .filter(|(_, d)| *d > 0)
            .map(|(n, _)| n.to_string())
            .collect(),
    )
}

/// All transitive super types of `class`, excluding itself. Tolerates cycles.
pub(crate) fn ancestors<'a>(m: &'a Metamodel, class: &str) -> BTreeSet<&'a str> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<&str> = m
        .class(class)
        .map(|c| c.super_types.iter().map(String::as_str).collect())
        .unwrap_or_default();
    while let Some(name) = stack.pop() {
        if name == class || !out.insert(name) {
            continue;
        }
        if let Some(c) = m.class(name) {
            stack.extend(c.super_types.iter().map(|s| s.as_str()));
        }
    }
    out.retain(|n| m.class(n).is_some());
    out
}

fn inherited_clashes(m: &Metamodel) -> Vec<Violation> {
    let mut out = Vec::new();
    for class in &m.classes {
        let own: BTreeSet<&str> = class.feature_names().collect();
        for ancestor in ancestors(m, &class.name) {
            let Some(sup) = m.class(ancestor) else { continue };
            for name in sup.feature_names() {
                if own.contains(name) {
                    out.push(Violation::new(
                        Rule::InheritedFeatureClash,
                        format!("{}.{}", class.name, name),
                        format!("feature also declared by ancestor `{ancestor}`"),
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamodel::{
        seed_metamodel, AttributeDef, ClassDef, PackageInfo, ReferenceDef, ValueType,
    };

    fn base() -> Metamodel {
        Metamodel::empty(&PackageInfo::default())
    }

    #[test]
    fn single_class_is_valid() {
        assert!(validate(&seed_metamodel()).is_empty());
    }

    #[test]
    fn two_class_cycle() {
        let m = base()
            .with_class(ClassDef::new("A").extends("B"))
            .with_class(ClassDef::new("B").extends("A"));
        let v = validate(&m);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, Rule::InheritanceCycle);
        assert!(v[0].element.contains('A') && v[0].element.contains('B'));
    }

    #[test]
    fn unresolved_reference_target() {
        let m = base()
            .with_class(ClassDef::new("Vehicle"))
            .with_class(ClassDef::new("Sensor").reference(ReferenceDef::plain("position", "GPS")));
        let v = validate(&m);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, Rule::UnresolvedTarget);
        assert_eq!(v[0].element, "Sensor.position");
    }

    #[test]
    fn self_and_duplicate_super_types() {
        let m = base()
            .with_class(ClassDef::new("B"))
            .with_class(ClassDef::new("A").extends("A").extends("B").extends("B"));
        let rules: Vec<_> = validate(&m).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&Rule::SelfSuperType));
        assert!(rules.contains(&Rule::DuplicateSuperType));
    }

    #[test]
    fn inherited_feature_clash_is_detected_transitively() {
        let m = base()
            .with_class(ClassDef::new("Sensor").attr(AttributeDef::new("range", ValueType::Double)))
            .with_class(ClassDef::new("RangeSensor").extends("Sensor"))
            .with_class(
                ClassDef::new("Radar")
                    .extends("RangeSensor")
                    .attr(AttributeDef::new("range", ValueType::Double)),
            );
        let v = validate(&m);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].rule, Rule::InheritedFeatureClash);
        assert_eq!(v[0].element, "Radar.range");
    }

    #[test]
    fn attribute_and_reference_share_namespace() {
        let m = base().with_class(
            ClassDef::new("A")
                .attr(AttributeDef::new("x", ValueType::Int))
                .reference(ReferenceDef::plain("x", "A")),
        );
        assert_eq!(validate(&m)[0].rule, Rule::DuplicateFeature);
    }

    #[test]
    fn bounds_and_defaults() {
        let m = base().with_class(
            ClassDef::new("A")
                .attr(AttributeDef::new("n", ValueType::Int).with_default("many"))
                .reference(ReferenceDef::plain("zero", "A").bounds(0, 0))
                .reference(ReferenceDef::plain("inverted", "A").bounds(3, 2))
                .reference(ReferenceDef::plain("neg", "A").bounds(0, -5))
                .reference(ReferenceDef::plain("ok", "A").bounds(2, -1)),
        );
        let v = validate(&m);
        let rules: Vec<_> = v.iter().map(|v| (v.rule, v.element.as_str())).collect();
        assert_eq!(
            rules,
            [
                (Rule::InvalidDefault, "A.n"),
                (Rule::InvalidBounds, "A.zero"),
                (Rule::InvalidBounds, "A.inverted"),
                (Rule::InvalidBounds, "A.neg"),
            ]
        );
    }

    #[test]
    fn duplicate_and_badly_named_classes() {
        let m = base()
            .with_class(ClassDef::new("A"))
            .with_class(ClassDef::new("A"))
            .with_class(ClassDef::new("front camera"));
        let rules: Vec<_> = validate(&m).into_iter().map(|v| v.rule).collect();
        assert_eq!(rules, [Rule::DuplicateClass, Rule::InvalidIdentifier]);
    }
}
