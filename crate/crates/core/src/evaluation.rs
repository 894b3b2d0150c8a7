//! Scores a candidate metamodel against a reference, per element category.
//!
//! Matching is by normalized name: lower-cased with `_` and `-` removed.
//! Totals always count the reference; candidate elements absent from the
//! reference are listed as extras but never counted.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::metamodel::Metamodel;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub matched: usize,
    pub total: usize,
    pub missing: Vec<String>,
    pub extra: Vec<String>,
}

impl CategoryScore {
    /// `matched/total`
    pub fn cell(&self) -> String {
        format!("{}/{}", self.matched, self.total)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonReport {
    pub classes: CategoryScore,
    pub attributes: CategoryScore,
    pub compositions: CategoryScore,
    pub subclass_relations: CategoryScore,
    /// Matched attributes whose types differ.
    #[serde(default)]
    pub type_mismatches: Vec<String>,
}

impl ComparisonReport {
    pub fn categories(&self) -> [(&'static str, &CategoryScore); 4] {
        [
            ("classes", &self.classes),
            ("attributes", &self.attributes),
            ("compositions", &self.compositions),
            ("subclass relations", &self.subclass_relations),
        ]
    }

    /// The four `matched/total` cells in category order.
    pub fn cells(&self) -> [String; 4] {
        self.categories().map(|(_, s)| s.cell())
    }
}

fn normalize(name: &str) -> String {
    name.chars().filter(|c| *c != '_' && *c != '-').flat_map(char::to_lowercase).collect()
}

/// One countable element: its matching key and a readable label.
type Element = (String, String);

struct Elements {
    classes: Vec<Element>,
    attributes: Vec<Element>,
    compositions: Vec<Element>,
    subclass_relations: Vec<Element>,
}

fn elements(m: &Metamodel) -> Elements {
    let mut e = Elements {
        classes: Vec::new(),
        attributes: Vec::new(),
        compositions: Vec::new(),
        subclass_relations: Vec::new(),
    };
    for class in &m.classes {
        let owner = normalize(&class.name);
        e.classes.push((owner.clone(), class.name.clone()));
        for a in &class.attributes {
            e.attributes.push((format!("{owner}.{}", normalize(&a.name)), format!("{}.{}", class.name, a.name)));
        }
        for r in class.references.iter().filter(|r| r.containment) {
            e.compositions.push((
                format!("{owner}>{}", normalize(&r.target)),
                format!("{} *-- {}", class.name, r.target),
            ));
        }
        for sup in &class.super_types {
            e.subclass_relations.push((
                format!("{owner}<{}", normalize(sup)),
                format!("{} --|> {sup}", class.name),
            ));
        }
    }
    e
}

/// Multiset matching of reference against candidate, skipping keys in
/// `excluded`.
fn score(candidate: &[Element], reference: &[Element], excluded: &BTreeSet<String>) -> CategoryScore {
    let mut available: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (key, label) in candidate.iter().filter(|(k, _)| !excluded.contains(k)) {
        available.entry(key).or_default().push(label);
    }
    let mut s = CategoryScore::default();
    for (key, label) in reference.iter().filter(|(k, _)| !excluded.contains(k)) {
        s.total += 1;
        match available.get_mut(key.as_str()).and_then(|v| (!v.is_empty()).then(|| v.remove(0))) {
            Some(_) => s.matched += 1,
            None => s.missing.push(label.clone()),
        }
    }
    s.extra = available.into_values().flatten().map(str::to_string).collect();
    s.extra.sort();
    s
}

/// Compares `candidate` against `reference` over the whole reference.
pub fn compare(candidate: &Metamodel, reference: &Metamodel) -> ComparisonReport {
    compare_in_context(candidate, reference, None)
}

/// Like [`compare`], but elements also present in `context` are left out of
/// totals, matches and extras. Use it to score what one iteration added on
/// top of an earlier metamodel.
pub fn compare_in_context(candidate: &Metamodel, reference: &Metamodel, context: Option<&Metamodel>) -> ComparisonReport {
    let cand = elements(candidate);
    let refs = elements(reference);
    let ctx = context.map(elements);
    let keys = |pick: fn(&Elements) -> &Vec<Element>| -> BTreeSet<String> {
        ctx.as_ref().map(|c| pick(c).iter().map(|(k, _)| k.clone()).collect()).unwrap_or_default()
    };

    let mut report = ComparisonReport {
        classes: score(&cand.classes, &refs.classes, &keys(|e| &e.classes)),
        attributes: score(&cand.attributes, &refs.attributes, &keys(|e| &e.attributes)),
        compositions: score(&cand.compositions, &refs.compositions, &keys(|e| &e.compositions)),
        subclass_relations: score(&cand.subclass_relations, &refs.subclass_relations, &keys(|e| &e.subclass_relations)),
        type_mismatches: Vec::new(),
    };

    let candidate_types: BTreeMap<String, _> = candidate
        .classes
        .iter()
        .flat_map(|c| c.attributes.iter().map(move |a| (format!("{}.{}", normalize(&c.name), normalize(&a.name)), a.value_type)))
        .collect();
    let excluded = keys(|e| &e.attributes);
    for class in &reference.classes {
        for a in &class.attributes {
            let key = format!("{}.{}", normalize(&class.name), normalize(&a.name));
            if excluded.contains(&key) {
                continue;
            }
            if let Some(t) = candidate_types.get(&key) {
                if *t != a.value_type {
                    report
                        .type_mismatches
                        .push(format!("{}.{}: candidate {t}, reference {}", class.name, a.name, a.value_type));
                }
            }
        }
    }
    report
}

/// Aligned text table of the four cells followed by missing/extra listings.
pub fn format_report(r: &ComparisonReport) -> String {
    let mut out = String::new();
    let cells = r.cells();
    let width = cells.iter().map(String::len).max().unwrap_or(0).max("matched/total".len());
    writeln!(out, "{:<20}{:>width$}", "category", "matched/total").unwrap();
    for ((name, _), cell) in r.categories().iter().zip(&cells) {
        writeln!(out, "{name:<20}{cell:>width$}").unwrap();
    }
    for (name, s) in r.categories() {
        if !s.missing.is_empty() {
            writeln!(out, "missing {name}: {}", s.missing.join(", ")).unwrap();
        }
        if !s.extra.is_empty() {
            writeln!(out, "extra {name}: {}", s.extra.join(", ")).unwrap();
        }
    }
    for note in &r.type_mismatches {
        writeln!(out, "type mismatch {note}").unwrap();
    }
    out
}
