use serde::{Deserialize, Serialize};

use super::{validate, AttributeDef, ClassDef, Metamodel, ReferenceDef, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeOutcome {
    pub merged: Metamodel,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MergeError {
    #[error("current metamodel is invalid: {}", join(.0))]
    InvalidCurrent(Vec<Violation>),
    #[error("partial metamodel is invalid: {}", join(.0))]
    InvalidPartial(Vec<Violation>),
    #[error("merge result would be invalid: {}", join(.0))]
    Conflict(Vec<Violation>),
}

impl MergeError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            MergeError::InvalidCurrent(v) | MergeError::InvalidPartial(v) | MergeError::Conflict(v) => v,
        }
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Folds `partial` into `current`.
///
/// Classes are unioned by name. For a class present in both, super types
/// and features are unioned by name; when both sides define the same
/// feature differently the partial definition replaces the current one in
/// place and a warning is recorded. Nothing present in `current` is ever
/// removed by name. The package header of `current` is kept.
pub fn merge(current: &Metamodel, partial: &Metamodel) -> Result<MergeOutcome, MergeError> {
    let v = validate(current);
    if !v.is_empty() {
        return Err(MergeError::InvalidCurrent(v));
    }
    let v = validate(partial);
    if !v.is_empty() {
        return Err(MergeError::InvalidPartial(v));
    }

    let mut merged = current.clone();
    let mut warnings = Vec::new();

    for incoming in &partial.classes {
        match merged.class_mut(&incoming.name) {
            None => merged.classes.push(incoming.clone()),
            Some(existing) => merge_class(existing, incoming, &mut warnings),
        }
    }

    let v = validate(&merged);
    if !v.is_empty() {
        return Err(MergeError::Conflict(v));
    }
    Ok(MergeOutcome { merged, warnings })
}

fn merge_class(existing: &mut ClassDef, incoming: &ClassDef, warnings: &mut Vec<String>) {
    if existing.is_abstract != incoming.is_abstract {
        warnings.push(format!(
            "class `{}`: abstract changed from {} to {}",
            existing.name, existing.is_abstract, incoming.is_abstract
        ));
        existing.is_abstract = incoming.is_abstract;
    }

    for sup in &incoming.super_types {
        if !existing.super_types.contains(sup) {
            existing.super_types.push(sup.clone());
        }
    }

    for attr in &incoming.attributes {
        merge_attribute(existing, attr, warnings);
    }
    for reference in &incoming.references {
        merge_reference(existing, reference, warnings);
    }
}

fn merge_attribute(class: &mut ClassDef, attr: &AttributeDef, warnings: &mut Vec<String>) {
    if let Some(pos) = class.references.iter().position(|r| r.name == attr.name) {
        warnings.push(format!(
            "`{}.{}`: reference replaced by attribute of type {}",
            class.name, attr.name, attr.value_type
        ));
        class.references.remove(pos);
        class.attributes.push(attr.clone());
        return;
    }
    match class.attributes.iter_mut().find(|a| a.name == attr.name) {
        None => class.attributes.push(attr.clone()),
        Some(old) if old != attr => {
            warnings.push(format!(
                "`{}.{}`: redefined from {} to {}",
                class.name,
                attr.name,
                describe_attribute(old),
                describe_attribute(attr)
            ));
            *old = attr.clone();
        }
        Some(_) => {}
    }
}

fn merge_reference(class: &mut ClassDef, reference: &ReferenceDef, warnings: &mut Vec<String>) {
    if let Some(pos) = class.attributes.iter().position(|a| a.name == reference.name) {
        warnings.push(format!(
            "`{}.{}`: attribute replaced by reference to {}",
            class.name, reference.name, reference.target
        ));
        class.attributes.remove(pos);
        class.references.push(reference.clone());
        return;
    }
    match class.references.iter_mut().find(|r| r.name == reference.name) {
        None => class.references.push(reference.clone()),
        Some(old) if old != reference => {
            warnings.push(format!(
                "`{}.{}`: redefined from {} to {}",
                class.name,
                reference.name,
                describe_reference(old),
                describe_reference(reference)
            ));
            *old = reference.clone();
        }
        Some(_) => {}
    }
}

fn describe_attribute(a: &AttributeDef) -> String {
    match &a.default_value {
        Some(d) => format!("{} = {d}", a.value_type),
        None => a.value_type.to_string(),
    }
}

fn describe_reference(r: &ReferenceDef) -> String {
    let upper = if r.is_unbounded() { "*".to_string() } else { r.upper_bound.to_string() };
    let kind = if r.containment { "containment" } else { "reference" };
    format!("{kind} {}[{}..{upper}]", r.target, r.lower_bound)
}
