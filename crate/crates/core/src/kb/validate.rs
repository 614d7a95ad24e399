use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{KnowledgeBase, Phase, WeightedSlot};
use crate::bayes::tables::{Assignment, ABSENT};

/// Tolerance on the sum of a conditional distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    DuplicateAttribute,
    EmptyAllowedValues,
    DuplicateAllowedValue,
    ReservedToken,
    EmptyPhase,
    DuplicateDisease,
    SlotCount,
    MissingSlot,
    DuplicateSlot,
    ForeignSlot,
    UnknownValue,
    DuplicateValue,
    WeightOutOfRange,
    SignificanceOutOfRange,
    EmptySlotSignificance,
    RootSlots,
    SubRootSlots,
    DanglingReference,
    ReferenceOrder,
    LinkCount,
    CptUnknownAttribute,
    CptWrongPhase,
    CptUnknownDisease,
    CptIllegalValue,
    CptDuplicateEntry,
    ProbabilityOutOfRange,
    NotNormalized,
    UnusedCatalogValue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, path: impl Into<String>, kind: ViolationKind, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), kind, message: message.into() });
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidateOptions {
    /// Report catalog values that no disease uses as warnings.
    pub strict: bool,
}

pub fn validate_kb(kb: &KnowledgeBase) -> ValidationReport {
    validate_kb_with(kb, ValidateOptions::default())
}

pub fn validate_kb_with(kb: &KnowledgeBase, options: ValidateOptions) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_catalog(kb, &mut report);
    check_diseases(kb, &mut report);
    check_references(kb, &mut report);
    check_cpts(kb, &mut report);
    if options.strict {
        check_union(kb, &mut report);
    }
    report
}

fn check_catalog(kb: &KnowledgeBase, report: &mut ValidationReport) {
    let mut seen = BTreeSet::new();
    for attr in &kb.catalog.attributes {
        let path = format!("catalog.attributes[{}]", attr.id);
        if !seen.insert(attr.id.as_str()) {
            report.push(&path, ViolationKind::DuplicateAttribute, "attribute id is not unique");
        }
        if attr.allowed_values.is_empty() {
            report.push(&path, ViolationKind::EmptyAllowedValues, "allowed_values is empty");
        }
        let mut values = BTreeSet::new();
        for v in &attr.allowed_values {
            if !values.insert(v.as_str()) {
                report.push(
                    format!("{path}.allowed_values[{v}]"),
                    ViolationKind::DuplicateAllowedValue,
                    "value listed twice",
                );
            }
            if v == ABSENT {
                report.push(
                    format!("{path}.allowed_values[{v}]"),
                    ViolationKind::ReservedToken,
                    format!("`{ABSENT}` is reserved for the empty assignment"),
                );
            }
        }
    }
    for phase in Phase::ALL {
        if kb.catalog.count(phase) == 0 {
            report.push(
                "catalog",
                ViolationKind::EmptyPhase,
                format!("no {phase} attributes; every phase needs at least one"),
            );
        }
    }
}

fn check_diseases(kb: &KnowledgeBase, report: &mut ValidationReport) {
    let mut seen = BTreeSet::new();
    for disease in &kb.diseases {
        if !seen.insert(disease.id.as_str()) {
            report.push(
                format!("diseases[{}]", disease.id),
                ViolationKind::DuplicateDisease,
                "disease id is not unique",
            );
        }
        for phase in Phase::ALL {
            let frame = disease.frame(phase);
            let frame_path = format!("diseases[{}].frames.{phase}", disease.id);
            let expected = kb.catalog.count(phase);
            if frame.slots.len() != expected {
                report.push(
                    &frame_path,
                    ViolationKind::SlotCount,
                    format!("frame has {} slots, catalog has {expected} {phase} attributes", frame.slots.len()),
                );
            }
            let mut slot_ids = BTreeSet::new();
            for slot in &frame.slots {
                let slot_path = format!("{frame_path}[{}]", slot.attribute);
                if !slot_ids.insert(slot.attribute.as_str()) {
                    report.push(&slot_path, ViolationKind::DuplicateSlot, "attribute has two slots");
                }
                match kb.catalog.get(&slot.attribute) {
                    None => report.push(
                        &slot_path,
                        ViolationKind::ForeignSlot,
                        "attribute is not in the catalog",
                    ),
                    Some(def) if def.phase != phase => report.push(
                        &slot_path,
                        ViolationKind::ForeignSlot,
                        format!("attribute belongs to the {} phase", def.phase),
                    ),
                    Some(def) => check_slot(slot, &slot_path, frame.slots.len(), |t| def.allows(t), report),
                }
            }
            for def in kb.catalog.phase_attributes(phase) {
                if !slot_ids.contains(def.id.as_str()) {
                    report.push(
                        format!("{frame_path}[{}]", def.id),
                        ViolationKind::MissingSlot,
                        "catalog attribute has no slot (encode empty slots explicitly)",
                    );
                }
            }
        }
    }
}

fn check_slot(
    slot: &WeightedSlot,
    path: &str,
    slot_count: usize,
    allows: impl Fn(&str) -> bool,
    report: &mut ValidationReport,
) {
    if slot.is_empty() {
        if slot.significance != 0 {
            report.push(
                path,
                ViolationKind::EmptySlotSignificance,
                format!("empty slot must have significance 0, found {}", slot.significance),
            );
        }
        return;
    }
    let m = slot.values.len() as u32;
    if slot.significance < 1 || slot.significance as usize > slot_count {
        report.push(
            path,
            ViolationKind::SignificanceOutOfRange,
            format!("significance {} outside 1..={slot_count}", slot.significance),
        );
    }
    let mut tokens = BTreeSet::new();
    for v in &slot.values {
        let value_path = format!("{path}.values[{}]", v.token);
        if !tokens.insert(v.token.as_str()) {
            report.push(&value_path, ViolationKind::DuplicateValue, "value listed twice in slot");
        }
        if !allows(&v.token) {
            report.push(
                &value_path,
                ViolationKind::UnknownValue,
                format!("`{}` is not an allowed value of `{}`", v.token, slot.attribute),
            );
        }
        if v.weight < 1 || v.weight > m {
            report.push(
                &value_path,
                ViolationKind::WeightOutOfRange,
                format!("weightage {} outside 1..={m}", v.weight),
            );
        }
    }
}

fn check_references(kb: &KnowledgeBase, report: &mut ValidationReport) {
    let x = kb.diseases.len();
    let root_phases: BTreeSet<Phase> = kb.root.slots.iter().copied().collect();
    if kb.root.slots.len() != 3 || root_phases.len() != 3 {
        report.push(
            "root",
            ViolationKind::RootSlots,
            format!("root must hold exactly one slot per phase, found {:?}", kb.root.slots),
        );
    }
    for phase in &kb.root.slots {
        if kb.sub_root(*phase).is_none() {
            report.push(
                format!("root[{phase}]"),
                ViolationKind::DanglingReference,
                "root slot links a sub-root that does not exist",
            );
        }
    }
    for sub in &kb.sub_roots {
        let path = format!("sub_root[{}]", sub.phase);
        if sub.slots.len() != x {
            report.push(
                &path,
                ViolationKind::SubRootSlots,
                format!("sub-root has {} slots for {x} diseases", sub.slots.len()),
            );
        }
        for (j, id) in sub.slots.iter().enumerate() {
            if kb.disease(id).is_none() {
                report.push(
                    format!("{path}[{j}]"),
                    ViolationKind::DanglingReference,
                    format!("slot links unknown disease `{id}`"),
                );
            } else if kb.diseases.get(j).map(|d| d.id.as_str()) != Some(id.as_str()) {
                report.push(
                    format!("{path}[{j}]"),
                    ViolationKind::ReferenceOrder,
                    format!("slot {j} links `{id}` instead of disease {j}"),
                );
            }
        }
    }
    let expected = 3 * x + 3;
    let actual = kb.link_count();
    if actual != expected {
        report.push(
            "links",
            ViolationKind::LinkCount,
            format!("expected {expected} reference links (3x+3 with x={x}), found {actual}"),
        );
    }
}

fn check_assignment(
    kb: &KnowledgeBase,
    attribute: &str,
    assignment: &Assignment,
    path: &str,
    report: &mut ValidationReport,
) {
    let Some(def) = kb.catalog.get(attribute) else {
        return;
    };
    for t in assignment.tokens() {
        if !def.allows(t) {
            report.push(
                path,
                ViolationKind::CptIllegalValue,
                format!("`{t}` is not an allowed value of `{attribute}`"),
            );
        }
    }
    if !def.multi_valued && assignment.len() > 1 {
        report.push(
            path,
            ViolationKind::CptIllegalValue,
            format!("`{attribute}` is single-valued but assignment is `{assignment}`"),
        );
    }
}

fn check_probability(p: f64, path: &str, report: &mut ValidationReport) {
    if !(0.0..=1.0).contains(&p) {
        report.push(path, ViolationKind::ProbabilityOutOfRange, format!("probability {p} outside [0,1]"));
    }
}

fn check_cpts(kb: &KnowledgeBase, report: &mut ValidationReport) {
    let cpts = &kb.cpts;
    let attr_phase = |id: &str| kb.catalog.get(id).map(|a| a.phase);

    let mut seen = BTreeSet::new();
    for e in cpts.priors() {
        let path = format!("cpts.priors[{}={}]", e.attribute, e.assignment);
        match attr_phase(&e.attribute) {
            None => report.push(&path, ViolationKind::CptUnknownAttribute, "attribute is not in the catalog"),
            Some(Phase::History) => {}
            Some(p) => report.push(&path, ViolationKind::CptWrongPhase, format!("priors cover history attributes, not {p}")),
        }
        check_assignment(kb, &e.attribute, &e.assignment, &path, report);
        check_probability(e.p, &path, report);
        if !seen.insert((e.attribute.clone(), e.assignment.clone())) {
            report.push(&path, ViolationKind::CptDuplicateEntry, "entry listed twice");
        }
    }
    for (attribute, row) in cpts.prior_rows() {
        check_normalized(row.values().sum(), &format!("cpts.priors[{attribute}]"), report);
    }

    let mut seen = BTreeSet::new();
    for e in cpts.disease_given_history() {
        let ctx: Vec<String> =
            e.history_assignment.iter().map(|(a, v)| format!("{a}={v}")).collect();
        let path = format!("cpts.disease_given_history[{}|{}]", e.disease, ctx.join(","));
        if kb.disease(&e.disease).is_none() {
            report.push(&path, ViolationKind::CptUnknownDisease, format!("unknown disease `{}`", e.disease));
        }
        for (attribute, value) in &e.history_assignment {
            match attr_phase(attribute) {
                None => report.push(&path, ViolationKind::CptUnknownAttribute, format!("`{attribute}` is not in the catalog")),
                Some(Phase::History) => {}
                Some(p) => report.push(&path, ViolationKind::CptWrongPhase, format!("`{attribute}` is a {p} attribute")),
            }
            check_assignment(kb, attribute, value, &path, report);
        }
        check_probability(e.p, &path, report);
        if !seen.insert((e.disease.clone(), e.history_assignment.clone())) {
            report.push(&path, ViolationKind::CptDuplicateEntry, "entry listed twice");
        }
    }

    let mut seen = BTreeSet::new();
    let mut sums: BTreeMap<(String, String, bool), f64> = BTreeMap::new();
    for e in cpts.finding_given_disease() {
        let path = format!(
            "cpts.finding_given_disease[{}={}|{}={}]",
            e.attribute, e.assignment, e.disease, e.disease_state
        );
        match attr_phase(&e.attribute) {
            None => report.push(&path, ViolationKind::CptUnknownAttribute, "attribute is not in the catalog"),
            Some(Phase::History) => report.push(&path, ViolationKind::CptWrongPhase, "findings cover examination and investigation attributes"),
            Some(_) => {}
        }
        if kb.disease(&e.disease).is_none() {
            report.push(&path, ViolationKind::CptUnknownDisease, format!("unknown disease `{}`", e.disease));
        }
        check_assignment(kb, &e.attribute, &e.assignment, &path, report);
        check_probability(e.p, &path, report);
        let key = (e.attribute.clone(), e.disease.clone(), e.disease_state);
        if !seen.insert((key.clone(), e.assignment.clone())) {
            report.push(&path, ViolationKind::CptDuplicateEntry, "entry listed twice");
        }
        *sums.entry(key).or_default() += e.p;
    }
    for ((attribute, disease, state), sum) in sums {
        check_normalized(
            sum,
            &format!("cpts.finding_given_disease[{attribute}|{disease}={state}]"),
            report,
        );
    }
}

fn check_normalized(sum: f64, path: &str, report: &mut ValidationReport) {
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        report.push(path, ViolationKind::NotNormalized, format!("probabilities sum to {sum}, not 1"));
    }
}

fn check_union(kb: &KnowledgeBase, report: &mut ValidationReport) {
    let used: BTreeSet<(&str, &str)> = kb
        .diseases
        .iter()
        .flat_map(|d| Phase::ALL.into_iter().map(move |p| d.frame(p)))
        .flat_map(|f| f.slots.iter())
        .flat_map(|s| s.values.iter().map(move |v| (s.attribute.as_str(), v.token.as_str())))
        .collect();
    for attr in &kb.catalog.attributes {
        for v in &attr.allowed_values {
            if !used.contains(&(attr.id.as_str(), v.as_str())) {
                report.warnings.push(Violation {
                    path: format!("catalog.attributes[{}].allowed_values[{v}]", attr.id),
                    kind: ViolationKind::UnusedCatalogValue,
                    message: "value is used by no disease frame".into(),
                });
            }
        }
    }
}
