use metaforge::ecore::{emit_ecore, parse_ecore, EcoreOptions};
use metaforge::evaluation::{compare, compare_in_context};
use metaforge::metamodel::{merge, validate, MergeError, Metamodel, Rule};
use metaforge::plantuml::{emit_puml, parse_puml, PumlOptions};
use metaforge::testing::metamodel;
use proptest::prelude::*;

fn puml_round_trip(m: &Metamodel) -> Metamodel {
    let doc = emit_puml(m).unwrap();
    parse_puml(&doc, &PumlOptions::strict()).unwrap_or_else(|e| panic!("{e}\n{}", doc.raw_text)).metamodel
}

fn ecore_round_trip(m: &Metamodel) -> Metamodel {
    let doc = emit_ecore(m).unwrap();
    parse_ecore(&doc, &EcoreOptions::strict()).unwrap_or_else(|e| panic!("{e}\n{}", doc.raw_xml)).metamodel
}

fn names(m: &Metamodel) -> Vec<String> {
    let mut out = Vec::new();
    for c in &m.classes {
        out.push(c.name.clone());
        out.extend(c.feature_names().map(|f| format!("{}.{f}", c.name)));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn canonicalize_is_idempotent(m in metamodel(8)) {
        let c = m.canonicalize().unwrap();
        prop_assert!(validate(&c).is_empty());
        prop_assert_eq!(c.canonicalize().unwrap(), c);
    }

    #[test]
    fn plantuml_round_trip(m in metamodel(8)) {
        prop_assert_eq!(puml_round_trip(&m), m.canonicalize().unwrap());
    }

    #[test]
    fn ecore_round_trip_and_well_formed(m in metamodel(8)) {
        let doc = emit_ecore(&m).unwrap();
        prop_assert!(roxmltree::Document::parse(&doc.raw_xml).is_ok());
        prop_assert_eq!(ecore_round_trip(&m), m.canonicalize().unwrap());
    }

    #[test]
    fn codecs_commute(m in metamodel(8)) {
        let puml = emit_puml(&m).unwrap();
        let via_ecore = emit_puml(&ecore_round_trip(&puml_round_trip(&m))).unwrap();
        prop_assert_eq!(via_ecore.raw_text, puml.raw_text);
        prop_assert_eq!(emit_ecore(&puml_round_trip(&m)).unwrap().raw_xml, emit_ecore(&m).unwrap().raw_xml);
    }

    #[test]
    fn emission_is_deterministic(m in metamodel(8)) {
        let mut shuffled = m.clone();
        shuffled.classes.reverse();
        for c in &mut shuffled.classes {
            c.attributes.reverse();
            c.references.reverse();
            c.super_types.reverse();
        }
        prop_assert_eq!(emit_puml(&m).unwrap().raw_text, emit_puml(&shuffled).unwrap().raw_text);
        prop_assert_eq!(emit_ecore(&m).unwrap().raw_xml, emit_ecore(&shuffled).unwrap().raw_xml);
    }

    #[test]
    fn self_comparison_is_complete(m in metamodel(8)) {
        let r = compare(&m, &m);
        for (_, s) in r.categories() {
            prop_assert_eq!(s.matched, s.total);
            prop_assert!(s.missing.is_empty() && s.extra.is_empty());
        }
    }

    #[test]
    fn scoring_totals_and_monotonicity(a in metamodel(6), b in metamodel(6), drop in any::<prop::sample::Index>()) {
        let r = compare(&a, &b);
        let own = compare(&b, &b);
        for ((_, s), (_, t)) in r.categories().iter().zip(own.categories()) {
            prop_assert!(s.matched <= s.total);
            prop_assert_eq!(s.total, t.total);
        }
        // Removing a class (and what points at it) never raises a count.
        let victim = a.classes[drop.index(a.classes.len())].name.clone();
        let mut smaller = a.clone();
        smaller.classes.retain(|c| c.name != victim);
        for c in &mut smaller.classes {
            c.references.retain(|r| r.target != victim);
            c.super_types.retain(|s| *s != victim);
        }
        let r2 = compare(&smaller, &b);
        for ((_, before), (_, after)) in r.categories().iter().zip(r2.categories()) {
            prop_assert!(after.matched <= before.matched);
        }
        let ctx = compare_in_context(&a, &b, Some(&a));
        prop_assert_eq!(ctx.classes.matched, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn merge_properties(current in metamodel(6), partial in metamodel(6)) {
        // Right identity.
        let empty = Metamodel { classes: Vec::new(), ..current.clone() };
        let same = merge(&current, &empty).unwrap();
        prop_assert_eq!(same.merged.canonicalize().unwrap(), current.canonicalize().unwrap());
        prop_assert!(same.warnings.is_empty());
        let itself = merge(&current, &current).unwrap();
        prop_assert_eq!(itself.merged.canonicalize().unwrap(), current.canonicalize().unwrap());

        match merge(&current, &partial) {
            Ok(once) => {
                prop_assert!(validate(&once.merged).is_empty());
                // Non-deletion.
                let kept = names(&once.merged);
                for n in names(&current) {
                    prop_assert!(kept.contains(&n), "{} lost", n);
                }
                // Header of the current metamodel wins.
                prop_assert_eq!(once.merged.package(), current.package());
                // Idempotence.
                let twice = merge(&once.merged, &partial).unwrap();
                prop_assert_eq!(twice.merged.canonicalize().unwrap(), once.merged.canonicalize().unwrap());
            }
            Err(MergeError::Conflict(v)) => {
                // Only structural clashes between the two inputs may reject.
                prop_assert!(v.iter().all(|v| matches!(v.rule, Rule::InheritanceCycle | Rule::InheritedFeatureClash)), "{:?}", v);
            }
            Err(e) => prop_assert!(false, "inputs are valid: {e}"),
        }
    }
}
