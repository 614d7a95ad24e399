//! End-to-end diagnosis: match every performed phase, fuse the phase lists,
//! detect near-ties and resolve them with the network built per group.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{
    self, construct_bn, detect_conflicts, evidence_from_patient, BayesError, ConflictSet,
    DEFAULT_EPSILON,
};
use crate::inference::{
    match_phase, match_strength, provisional_diagnosis, strength_f64, InferenceError,
    MatchClass, PatientInput,
};
use crate::kb::{KnowledgeBase, Phase};
use crate::round4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosisOptions {
    pub epsilon: f64,
}

impl Default for DiagnosisOptions {
    fn default() -> Self {
        DiagnosisOptions { epsilon: DEFAULT_EPSILON }
    }
}

#[derive(Debug, Error)]
pub enum DiagnosisError {
    #[error(transparent)]
    Input(#[from] InferenceError),
    #[error(transparent)]
    Conflict(#[from] BayesError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub disease: String,
    pub display_name: String,
    pub chance: f64,
    pub match_class_per_phase: BTreeMap<Phase, MatchClass>,
    pub match_strength_per_phase: BTreeMap<Phase, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConflictStatus {
    Resolved,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictAudit {
    pub group: Vec<String>,
    pub status: ConflictStatus,
    pub joints: BTreeMap<String, f64>,
    pub order: Vec<String>,
    pub tie: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Everything a consultation shows: the ranked differential after conflict
/// resolution, the per-phase match classes and the resolution audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub patient_id: String,
    pub phases_performed: Vec<Phase>,
    pub divisor_used: u64,
    pub epsilon: f64,
    pub differential: Vec<ReportEntry>,
    /// Order before conflict resolution (chance descending, ties by id).
    pub provisional_order: Vec<String>,
    pub conflicts: Vec<ConflictAudit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DiagnosisReport {
    pub fn order(&self) -> Vec<&str> {
        self.differential.iter().map(|e| e.disease.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn diagnose(
    kb: &KnowledgeBase,
    patient: &PatientInput,
    options: DiagnosisOptions,
) -> Result<DiagnosisReport, DiagnosisError> {
    patient.validate(&kb.catalog)?;
    let performed = patient.phases_performed();
    if performed.is_empty() {
        return Err(InferenceError::NoPhasesPerformed.into());
    }

    let mut lists = BTreeMap::new();
    let mut warnings = Vec::new();
    for &phase in &performed {
        let matrix = match_phase(patient, kb, phase)?;
        let scoring = match_strength(&matrix, kb);
        warnings.extend(scoring.warnings);
        lists.insert(phase, scoring.list);
    }
    let provisional = provisional_diagnosis(&lists, &performed)?;
    let conflicts = detect_conflicts(&provisional, options.epsilon)?;

    let evidence = evidence_from_patient(patient);
    let mut resolvable = ConflictSet { groups: Vec::new(), epsilon: conflicts.epsilon };
    let mut networks = Vec::new();
    let mut unresolved = Vec::new();
    for group in &conflicts.groups {
        match construct_bn(patient, group, kb) {
            Ok(bn) => {
                resolvable.groups.push(group.clone());
                networks.push(bn);
            }
            Err(e) => unresolved.push(ConflictAudit {
                group: group.clone(),
                status: ConflictStatus::Unresolved,
                joints: BTreeMap::new(),
                order: group.clone(),
                tie: false,
                reason: Some(e.to_string()),
            }),
        }
    }
    let resolution = bayes::resolve(&provisional, &resolvable, &networks, &evidence)?;

    let mut audits: Vec<ConflictAudit> = resolution
        .audits
        .into_iter()
        .map(|a| ConflictAudit {
            group: a.group,
            status: ConflictStatus::Resolved,
            joints: a.joints,
            order: a.order,
            tie: a.tie,
            reason: None,
        })
        .chain(unresolved)
        .collect();
    // keep audits in differential order
    let position = |d: &str| provisional.entries.iter().position(|e| e.disease_id == d);
    audits.sort_by_key(|a| a.group.first().and_then(|d| position(d)));

    let differential = resolution
        .differential
        .entries
        .iter()
        .map(|e| ReportEntry {
            disease: e.disease_id.clone(),
            display_name: kb.disease(&e.disease_id).map(|d| d.display_name.clone()).unwrap_or_default(),
            chance: round4(e.chance_f64()),
            match_class_per_phase: performed.iter().map(|&p| (p, e.match_class(p))).collect(),
            match_strength_per_phase: e
                .strengths
                .iter()
                .map(|(&p, &s)| (p, round4(strength_f64(s))))
                .collect(),
        })
        .collect();

    Ok(DiagnosisReport {
        patient_id: patient.patient_id.clone(),
        phases_performed: performed.into_iter().collect(),
        divisor_used: provisional.divisor_used,
        epsilon: options.epsilon,
        differential,
        provisional_order: provisional.order().into_iter().map(str::to_string).collect(),
        conflicts: audits,
        warnings,
    })
}
