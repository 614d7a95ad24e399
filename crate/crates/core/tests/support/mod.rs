//! Shared helpers for integration tests: fixture loading, random knowledge
//! bases and an independent match-strength scorer.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use framedx_core::bayes::{
    Assignment, ConditionalTables, DiseaseGivenHistoryEntry, FindingEntry, HistoryContext, PriorEntry,
};
use framedx_core::inference::PatientInput;
use framedx_core::kb::{
    AttributeCatalog, AttributeDef, DiseaseProfile, PhaseFrame, PhaseFrames, WeightedSlot, WeightedValue,
};
use framedx_core::{load_kb, KnowledgeBase, Phase};
use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture_path(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture_kb(name: &str) -> KnowledgeBase {
    load_kb(&fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn sija_kb() -> KnowledgeBase {
    fixture_kb("sija_kb.json")
}

pub fn conflict_kb() -> KnowledgeBase {
    fixture_kb("conflict_kb.json")
}

pub fn conflict_case() -> PatientInput {
    PatientInput::from_json(&fixture("conflict_case.json")).unwrap()
}

/// Random KB within the given bounds: every phase has 1..=max_attrs
/// attributes with 1..=max_values allowed tokens; slots are empty about a
/// third of the time. No CPTs.
pub fn random_kb<R: Rng>(rng: &mut R, max_diseases: usize, max_attrs: usize, max_values: usize) -> KnowledgeBase {
    let mut attributes = Vec::new();
    for phase in Phase::ALL {
        for i in 0..rng.gen_range(1..=max_attrs) {
            let n = rng.gen_range(1..=max_values);
            attributes.push(AttributeDef {
                id: format!("{}_{i}", phase.as_str()),
                phase,
                multi_valued: rng.gen_bool(0.5),
                allowed_values: (0..n).map(|k| format!("v{k}")).collect(),
            });
        }
    }
    let catalog = AttributeCatalog { attributes };

    let diseases = (0..rng.gen_range(1..=max_diseases))
        .map(|k| {
            let mut frames = PhaseFrames::default();
            for phase in Phase::ALL {
                let defs: Vec<&AttributeDef> = catalog.phase_attributes(phase).collect();
                let slots = defs
                    .iter()
                    .map(|def| {
                        if rng.gen_bool(0.3) {
                            return WeightedSlot::empty(def.id.clone());
                        }
                        let mut tokens = def.allowed_values.clone();
                        tokens.shuffle(rng);
                        tokens.truncate(rng.gen_range(1..=tokens.len()));
                        let m = tokens.len() as u32;
                        WeightedSlot {
                            attribute: def.id.clone(),
                            significance: rng.gen_range(1..=defs.len() as u32),
                            values: tokens
                                .into_iter()
                                .map(|token| WeightedValue { token, weight: rng.gen_range(1..=m) })
                                .collect(),
                        }
                    })
                    .collect();
                *frames.get_mut(phase) = PhaseFrame { slots };
            }
            DiseaseProfile { id: format!("d{k}"), display_name: String::new(), frames }
        })
        .collect();
    KnowledgeBase::assemble(catalog, diseases, ConditionalTables::default())
}

/// Random catalog-legal patient over every phase of `kb`.
pub fn random_patient<R: Rng>(rng: &mut R, kb: &KnowledgeBase, id: &str) -> PatientInput {
    let mut patient = PatientInput::new(id);
    for phase in Phase::ALL {
        let mut findings: Vec<(String, Vec<String>)> = Vec::new();
        for def in kb.catalog.phase_attributes(phase) {
            if !rng.gen_bool(0.7) {
                continue;
            }
            let max = if def.multi_valued { def.allowed_values.len() } else { 1 };
            let mut tokens = def.allowed_values.clone();
            tokens.shuffle(rng);
            tokens.truncate(rng.gen_range(0..=max));
            findings.push((def.id.clone(), tokens));
        }
        patient = patient.with_phase(phase, findings);
    }
    patient
}

/// Scores every disease straight from its raw frame, without the match
/// matrix: for each non-empty slot, the heaviest weight counts toward the
/// total and the heaviest weight among the patient's tokens toward the
/// matched sum. Diseases with nothing matched are left out.
pub fn brute_force_strengths(kb: &KnowledgeBase, patient: &PatientInput, phase: Phase) -> BTreeMap<String, Ratio<u64>> {
    let mut out = BTreeMap::new();
    let Some(findings) = patient.findings(phase) else { return out };
    for disease in &kb.diseases {
        let mut total = 0u64;
        let mut matched = 0u64;
        let mut any = false;
        for slot in &disease.frame(phase).slots {
            let mut best_all = 0u64;
            let mut best_hit = 0u64;
            for v in &slot.values {
                best_all = best_all.max(v.weight as u64);
                if findings.get(&slot.attribute).is_some_and(|t| t.contains(&v.token)) {
                    best_hit = best_hit.max(v.weight as u64);
                    any = true;
                }
            }
            total += best_all * slot.significance as u64;
            matched += best_hit * slot.significance as u64;
        }
        if any && total > 0 {
            out.insert(disease.id.clone(), Ratio::new(matched, total));
        }
    }
    out
}

/// Small fully-binary KB for network checks: `h` history attributes, `y`
/// diseases and `g` examination attributes, each attribute with tokens
/// `t`/`f`, with complete CPTs drawn at random. The returned patient
/// observes `t` for every attribute.
pub fn binary_network_kb<R: Rng>(rng: &mut R, h: usize, y: usize, g: usize) -> (KnowledgeBase, PatientInput) {
    let tf = || vec!["t".to_string(), "f".to_string()];
    let mut attributes: Vec<AttributeDef> = (0..h)
        .map(|i| AttributeDef { id: format!("h{i}"), phase: Phase::History, multi_valued: false, allowed_values: tf() })
        .collect();
    attributes.extend((0..g).map(|i| AttributeDef {
        id: format!("g{i}"),
        phase: Phase::Examination,
        multi_valued: false,
        allowed_values: tf(),
    }));
    attributes.push(AttributeDef {
        id: "i0".into(),
        phase: Phase::Investigation,
        multi_valued: false,
        allowed_values: tf(),
    });
    let catalog = AttributeCatalog { attributes };

    let diseases: Vec<DiseaseProfile> = (0..y)
        .map(|k| {
            let mut frames = PhaseFrames::default();
            for phase in Phase::ALL {
                let slots = catalog
                    .phase_attributes(phase)
                    .map(|def| WeightedSlot {
                        attribute: def.id.clone(),
                        significance: 1,
                        values: vec![WeightedValue { token: "t".into(), weight: 1 }],
                    })
                    .collect();
                *frames.get_mut(phase) = PhaseFrame { slots };
            }
            DiseaseProfile { id: format!("d{k}"), display_name: String::new(), frames }
        })
        .collect();

    let mut priors = Vec::new();
    for i in 0..h {
        let p: f64 = rng.gen_range(0.05..0.95);
        priors.push(PriorEntry { attribute: format!("h{i}"), assignment: Assignment::token("t"), p });
        priors.push(PriorEntry { attribute: format!("h{i}"), assignment: Assignment::token("f"), p: 1.0 - p });
    }
    let mut contexts: Vec<HistoryContext> = vec![HistoryContext::new()];
    for i in 0..h {
        contexts = contexts
            .into_iter()
            .flat_map(|c| {
                ["t", "f"].map(|v| {
                    let mut c = c.clone();
                    c.insert(format!("h{i}"), Assignment::token(v));
                    c
                })
            })
            .collect();
    }
    let mut dgh = Vec::new();
    let mut findings = Vec::new();
    for d in &diseases {
        for ctx in &contexts {
            dgh.push(DiseaseGivenHistoryEntry {
                disease: d.id.clone(),
                history_assignment: ctx.clone(),
                p: rng.gen_range(0.05..0.95),
            });
        }
        for i in 0..g {
            for state in [true, false] {
                let p: f64 = rng.gen_range(0.05..0.95);
                for (v, q) in [("t", p), ("f", 1.0 - p)] {
                    findings.push(FindingEntry {
                        attribute: format!("g{i}"),
                        assignment: Assignment::token(v),
                        disease: d.id.clone(),
                        disease_state: state,
                        p: q,
                    });
                }
            }
        }
    }
    let kb = KnowledgeBase::assemble(catalog, diseases, ConditionalTables::new(priors, dgh, findings));

    let mut patient = PatientInput::new("binary")
        .with_phase(Phase::History, (0..h).map(|i| (format!("h{i}"), vec!["t"])))
        .with_phase(Phase::Examination, (0..g).map(|i| (format!("g{i}"), vec!["t"])));
    patient.phases.retain(|_, f| !f.is_empty());
    (kb, patient)
}

pub fn tokens(ts: &[&str]) -> BTreeSet<String> {
    ts.iter().map(|t| t.to_string()).collect()
}
