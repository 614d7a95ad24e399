mod support;

use framedx_core::kb::{
    export_rules, load_kb, parse_kb_unchecked, traverse, validate_kb, validate_kb_with, FrameRef, KbDocument,
    KbError, TraverseError, ValidateOptions, ViolationKind, WeightedSlot, WeightedValue,
};
use framedx_core::Phase;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

fn wv(token: &str, weight: u32) -> WeightedValue {
    WeightedValue { token: token.into(), weight }
}

#[test]
fn sija_history_slot_loads_with_weights() {
    let kb = sija_kb();
    let d1 = kb.disease("d1").unwrap();
    let site = d1.frame(Phase::History).slot("site_of_pain").unwrap();
    assert_eq!(site.significance, 3);
    assert_eq!(site.values, vec![wv("buttock", 3), wv("low_back", 2), wv("leg", 1)]);
    assert_eq!(kb.link_count(), 3 * kb.diseases.len() + 3);
}

#[test]
fn loading_is_deterministic() {
    let text = fixture("conflict_kb.json");
    assert_eq!(load_kb(&text).unwrap(), load_kb(&text).unwrap());
}

#[test]
fn fixtures_validate_clean() {
    for name in ["sija_kb.json", "conflict_kb.json"] {
        let report = validate_kb(&fixture_kb(name));
        assert!(report.is_clean(), "{name}: {:?}", report.violations);
    }
}

#[test]
fn zero_diseases_is_a_schema_error() {
    let mut doc: serde_json::Value = serde_json::from_str(&fixture("sija_kb.json")).unwrap();
    doc["diseases"] = serde_json::json!([]);
    assert!(matches!(load_kb(&doc.to_string()), Err(KbError::Schema(_))));
}

#[test]
fn malformed_and_incomplete_documents() {
    assert!(matches!(load_kb("{ not json"), Err(KbError::Parse(_))));
    assert!(matches!(load_kb(r#"{"catalog": {"attributes": []}}"#), Err(KbError::Schema(_))));
}

#[test]
fn uncataloged_token_names_the_slot() {
    let mut doc: serde_json::Value = serde_json::from_str(&fixture("sija_kb.json")).unwrap();
    doc["diseases"][0]["frames"]["history"][0]["values"][2]["token"] = "knee".into();
    let Err(KbError::Invariant(report)) = load_kb(&doc.to_string()) else {
        panic!("expected invariant violation")
    };
    assert!(report.has(ViolationKind::UnknownValue));
    assert!(report.violations.iter().any(|v| v.path.contains("diseases[d1].frames.history[site_of_pain]")));
}

#[test]
fn weight_beyond_slot_size_is_one_violation() {
    let kb = parse_kb_unchecked(&fixture("bad_weight_kb.json")).unwrap();
    let report = validate_kb(&kb);
    assert_eq!(report.violations.len(), 1, "{:?}", report.violations);
    assert_eq!(report.violations[0].kind, ViolationKind::WeightOutOfRange);
    assert!(matches!(load_kb(&fixture("bad_weight_kb.json")), Err(KbError::Invariant(_))));
}

#[test]
fn sub_root_missing_a_disease_breaks_link_count() {
    let mut kb = conflict_kb();
    kb.sub_roots[1].slots.pop();
    let report = validate_kb(&kb);
    let link = report
        .violations
        .iter()
        .find(|v| v.kind == ViolationKind::LinkCount)
        .expect("link count violation");
    assert!(link.message.contains("15") && link.message.contains("14"), "{}", link.message);
}

#[test]
fn strict_mode_warns_about_unused_values() {
    let kb = sija_kb();
    let lenient = validate_kb(&kb);
    let strict = validate_kb_with(&kb, ValidateOptions { strict: true });
    assert!(lenient.warnings.is_empty());
    assert!(strict.is_clean());
    assert!(strict.warnings.iter().any(|w| w.kind == ViolationKind::UnusedCatalogValue));
}

#[test]
fn traverse_reaches_the_instance_frame() {
    let kb = sija_kb();
    let t = traverse(&kb, Phase::History, "d1").unwrap();
    assert_eq!(t.frame.slots.len(), 3);
    assert_eq!(t.frame, kb.disease("d1").unwrap().frame(Phase::History));
    assert_eq!(
        t.path,
        vec![FrameRef::Root, FrameRef::SubRoot(Phase::History), FrameRef::Instance { phase: Phase::History, disease: "d1".into() }]
    );

    let inv = traverse(&kb, Phase::Investigation, "d1").unwrap();
    assert_eq!(inv.frame.slots.len(), kb.catalog.count(Phase::Investigation));
    assert!(inv.frame.slots.iter().all(WeightedSlot::is_empty));

    assert_eq!(traverse(&kb, Phase::History, "d9").unwrap_err(), TraverseError::UnknownDisease("d9".into()));
}

#[test]
fn traverse_agrees_with_profiles() {
    let kb = conflict_kb();
    for d in &kb.diseases {
        for phase in Phase::ALL {
            assert_eq!(traverse(&kb, phase, &d.id).unwrap().frame, d.frame(phase));
        }
    }
}

#[test]
fn sija_rules() {
    let kb = sija_kb();
    let rules = export_rules(&kb, "d1").unwrap();
    assert_eq!(rules.len(), 3);
    assert_eq!(rules[0].attribute, "site_of_pain");
    assert_eq!(rules[0].values, vec![wv("buttock", 3), wv("low_back", 2), wv("leg", 1)]);
    assert_eq!(rules[0].significance, 3);
    assert_eq!(rules[0].consequent, "d1");
    assert_eq!(rules, export_rules(&kb, "d1").unwrap());
    assert!(matches!(export_rules(&kb, "nope"), Err(KbError::UnknownDisease(_))));
}

#[test]
fn all_empty_disease_has_no_rules() {
    let mut kb = sija_kb();
    for phase in Phase::ALL {
        for slot in &mut kb.diseases[0].frames.get_mut(phase).slots {
            *slot = WeightedSlot::empty(slot.attribute.clone());
        }
    }
    assert!(export_rules(&kb, "d1").unwrap().is_empty());
}

#[test]
fn document_round_trip() {
    let kb = conflict_kb();
    let text = serde_json::to_string(&KbDocument::from_kb(&kb)).unwrap();
    assert_eq!(load_kb(&text).unwrap(), kb);
}

proptest! {
    #[test]
    fn random_kbs_are_valid(seed in any::<u64>()) {
        let kb = random_kb(&mut ChaCha8Rng::seed_from_u64(seed), 5, 6, 4);
        let report = validate_kb(&kb);
        prop_assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn rules_rebuild_non_empty_slots(seed in any::<u64>()) {
        let kb = random_kb(&mut ChaCha8Rng::seed_from_u64(seed), 5, 6, 4);
        for d in &kb.diseases {
            let rules = export_rules(&kb, &d.id).unwrap();
            let original: Vec<WeightedSlot> = Phase::ALL
                .into_iter()
                .flat_map(|p| d.frame(p).non_empty_slots().cloned())
                .collect();
            let rebuilt: Vec<WeightedSlot> = rules.iter().map(|r| r.to_slot()).collect();
            prop_assert_eq!(rebuilt, original);
        }
    }
}
