//! Proptest strategies producing valid metamodels.
//!
//! Class names come from a small pool so that independently generated
//! metamodels overlap, which is what merge properties need. Super types only
//! point at classes earlier in the generated order, so every output is
//! acyclic; two outputs merged together may still form a cycle.

use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::sample::subsequence;

use crate::metamodel::{AttributeDef, ClassDef, Metamodel, PackageInfo, ReferenceDef, ValueType};

pub const CLASS_POOL: &[&str] = &[
    "Vehicle", "Component", "Sensor", "Camera", "Radar", "Lidar", "Actuator", "Brake", "Battery",
    "PowerManagement", "Gnss_Receiver", "HardwareAccelerator",
];

const FEATURE_POOL: &[&str] = &["id", "name", "rate", "range", "enabled", "mode", "parts", "owner", "level", "unit"];

fn feature_name(class: &str, suffix: &str) -> String {
    let mut c = class.chars();
    let head: String = c.next().map(|h| h.to_lowercase().collect()).unwrap_or_default();
    format!("{head}{}_{suffix}", c.as_str())
}

pub fn value_type() -> impl Strategy<Value = ValueType> {
    prop::sample::select(ValueType::ALL.to_vec())
}

/// A default literal accepted by `ty`.
pub fn default_literal(ty: ValueType) -> BoxedStrategy<String> {
    match ty {
        ValueType::String => prop_oneof![
            "[a-zA-Z0-9 ]{0,12}",
            Just("say \"hi\" & <bye>".to_string()),
            Just("back\\slash 'quote'".to_string()),
            Just("größe µs".to_string()),
        ]
        .boxed(),
        ValueType::Int => prop_oneof![any::<i32>().prop_map(|i| i.to_string()), Just("0".to_string())].boxed(),
        ValueType::Double | ValueType::Float => prop_oneof![
            (-1000i32..1000, 0u32..100).prop_map(|(i, f)| format!("{i}.{f}")),
            Just("1e-3".to_string()),
            Just("0.5".to_string()),
        ]
        .boxed(),
        ValueType::Boolean => prop_oneof![Just("true".to_string()), Just("false".to_string())].boxed(),
    }
}

fn attribute(class: String) -> impl Strategy<Value = AttributeDef> {
    (prop::sample::select(FEATURE_POOL), value_type()).prop_flat_map(move |(suffix, ty)| {
        let name = feature_name(&class, suffix);
        prop::option::of(default_literal(ty)).prop_map(move |default| AttributeDef {
            name: name.clone(),
            value_type: ty,
            default_value: default,
        })
    })
}

fn bounds(containment: bool) -> impl Strategy<Value = (u32, i64)> {
    let defaults = if containment { (0, -1) } else { (0, 1) };
    prop_oneof![
        3 => Just(defaults),
        1 => (0u32..3, prop_oneof![Just(-1i64), 3i64..6]),
        1 => (0u32..3).prop_map(|lo| (lo, i64::from(lo.max(1)))),
    ]
}

fn reference(class: String, targets: Vec<String>) -> impl Strategy<Value = ReferenceDef> {
    (prop::sample::select(FEATURE_POOL), prop::sample::select(targets), any::<bool>()).prop_flat_map(
        move |(suffix, target, containment)| {
            let name = feature_name(&class, suffix);
            bounds(containment).prop_map(move |(lower_bound, upper_bound)| ReferenceDef {
                name: name.clone(),
                target: target.clone(),
                containment,
                lower_bound,
                upper_bound,
            })
        },
    )
}

fn class_def(name: String, earlier: Vec<String>, all: Vec<String>) -> impl Strategy<Value = ClassDef> {
    let supers = if earlier.is_empty() {
        Just(Vec::new()).boxed()
    } else {
        subsequence(earlier.clone(), 0..=earlier.len().min(2)).boxed()
    };
    (
        any::<bool>(),
        supers,
        vec(attribute(name.clone()), 0..4),
        vec(reference(name.clone(), all), 0..3),
    )
        .prop_map(move |(is_abstract, super_types, attributes, references)| {
            let mut class = ClassDef {
                name: name.clone(),
                is_abstract,
                super_types,
                attributes: Vec::new(),
                references: Vec::new(),
            };
            // Feature names are prefixed by their class, so only duplicates
            // within this class need removing.
            for a in attributes {
                if !class.has_feature(&a.name) {
                    class.attributes.push(a);
                }
            }
            for r in references {
                if !class.has_feature(&r.name) {
                    class.references.push(r);
                }
            }
            class
        })
}

pub fn package() -> impl Strategy<Value = PackageInfo> {
    prop_oneof![
        4 => Just(PackageInfo::default()),
        1 => Just(PackageInfo {
            name: "automotive".into(),
            ns_uri: "urn:example:automotive".into(),
            ns_prefix: "auto".into(),
        }),
    ]
}

/// Valid metamodels with up to `max_classes` classes.
pub fn metamodel(max_classes: usize) -> impl Strategy<Value = Metamodel> {
    let max = max_classes.clamp(1, CLASS_POOL.len());
    (package(), btree_set(prop::sample::select(CLASS_POOL), 1..=max))
        .prop_flat_map(|(package, names)| {
            let names: Vec<String> = names.into_iter().map(str::to_string).collect();
            Just(names).prop_shuffle().prop_map(move |names| (package.clone(), names))
        })
        .prop_flat_map(|(package, names)| {
            let classes: Vec<_> = names
                .iter()
                .enumerate()
                .map(|(i, n)| class_def(n.clone(), names[..i].to_vec(), names.clone()))
                .collect();
            classes.prop_map(move |classes| Metamodel {
                name: package.name.clone(),
                ns_uri: package.ns_uri.clone(),
                ns_prefix: package.ns_prefix.clone(),
                classes,
            })
        })
}
