use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{InferenceError, PatientInput};
use crate::kb::{KnowledgeBase, Phase};

/// Exact match strength.
pub type Strength = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchEntry {
    /// Patient tokens ∩ disease slot tokens.
    pub matched_values: BTreeSet<String>,
    /// Clinical significance of the disease slot.
    pub significance: u32,
}

/// Match information of one phase: attributes are rows, diseases columns.
/// A cell is present only where the disease slot is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchMatrix {
    pub phase: Phase,
    pub attributes: Vec<String>,
    pub diseases: Vec<String>,
    cells: Vec<Option<MatchEntry>>,
}

impl MatchMatrix {
    pub fn rows(&self) -> usize {
        self.attributes.len()
    }

    pub fn columns(&self) -> usize {
        self.diseases.len()
    }

    pub fn entry(&self, row: usize, column: usize) -> Option<&MatchEntry> {
        self.cells[row * self.diseases.len() + column].as_ref()
    }

    /// `(attribute, entry)` pairs present in one disease column.
    pub fn column(&self, column: usize) -> impl Iterator<Item = (&str, &MatchEntry)> {
        (0..self.rows())
            .filter_map(move |row| self.entry(row, column).map(|e| (self.attributes[row].as_str(), e)))
    }
}

/// Matches the patient's findings of `phase` against every disease frame.
pub fn match_phase(
    patient: &PatientInput,
    kb: &KnowledgeBase,
    phase: Phase,
) -> Result<MatchMatrix, InferenceError> {
    let findings = patient
        .findings(phase)
        .ok_or(InferenceError::PhaseNotPerformed(phase))?;
    let attributes: Vec<String> = kb.catalog.phase_attributes(phase).map(|a| a.id.clone()).collect();
    let diseases: Vec<String> = kb.disease_ids().map(str::to_string).collect();

    let empty = BTreeSet::new();
    let mut cells = Vec::with_capacity(attributes.len() * diseases.len());
    for attribute in &attributes {
        let patient_tokens = findings.get(attribute).unwrap_or(&empty);
        for disease in &kb.diseases {
            let cell = disease
                .frame(phase)
                .slot(attribute)
                .filter(|slot| !slot.is_empty())
                .map(|slot| MatchEntry {
                    matched_values: slot
                        .values
                        .iter()
                        .filter(|v| patient_tokens.contains(&v.token))
                        .map(|v| v.token.clone())
                        .collect(),
                    significance: slot.significance,
                });
            cells.push(cell);
        }
    }
    Ok(MatchMatrix { phase, attributes, diseases, cells })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseScore {
    pub disease_id: String,
    pub strength: Strength,
}

/// Probable diseases of one phase with non-zero match strength.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseDiseaseList {
    pub phase: Phase,
    pub entries: Vec<PhaseScore>,
}

impl PhaseDiseaseList {
    pub fn new(phase: Phase, entries: Vec<PhaseScore>) -> Self {
        PhaseDiseaseList { phase, entries }
    }

    pub fn get(&self, disease_id: &str) -> Option<Strength> {
        self.entries.iter().find(|e| e.disease_id == disease_id).map(|e| e.strength)
    }
}

/// A phase list together with non-fatal diagnostics raised while scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseScoring {
    pub list: PhaseDiseaseList,
    pub warnings: Vec<String>,
}

/// Weighted match strength per disease column: `ls / ts`, where `ts` sums
/// `max weight × significance` over the disease's non-empty slots and `ls`
/// sums `max matched weight × significance` over slots with a match.
pub fn match_strength(matrix: &MatchMatrix, kb: &KnowledgeBase) -> PhaseScoring {
    let mut entries = Vec::new();
    let mut warnings = Vec::new();

    for (column, disease_id) in matrix.diseases.iter().enumerate() {
        let is_candidate = matrix.column(column).any(|(_, e)| !e.matched_values.is_empty());
        if !is_candidate {
            continue;
        }
        let Some(disease) = kb.disease(disease_id) else {
            warnings.push(format!("{}: disease `{disease_id}` missing from knowledge base", matrix.phase));
            continue;
        };
        let frame = disease.frame(matrix.phase);

        let ts: u64 = frame
            .non_empty_slots()
            .map(|s| u64::from(s.max_weight()) * u64::from(s.significance))
            .sum();
        if ts == 0 {
            warnings.push(format!(
                "{}: disease `{disease_id}` has no weighted slots; skipped",
                matrix.phase
            ));
            continue;
        }

        let ls: u64 = matrix
            .column(column)
            .filter(|(_, e)| !e.matched_values.is_empty())
            .map(|(attribute, e)| {
                let slot = frame.slot(attribute);
                let best = e
                    .matched_values
                    .iter()
                    .filter_map(|t| slot.and_then(|s| s.weight_of(t)))
                    .max()
                    .unwrap_or(0);
                u64::from(best) * u64::from(e.significance)
            })
            .sum();

        let strength = Ratio::new(ls, ts);
        if !strength.is_zero() {
            entries.push(PhaseScore { disease_id: disease_id.clone(), strength });
        }
    }

    PhaseScoring { list: PhaseDiseaseList::new(matrix.phase, entries), warnings }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchClass {
    Full,
    Partial,
    Zero,
}

impl MatchClass {
    pub fn of(strength: Strength) -> Self {
        if strength.is_one() {
            MatchClass::Full
        } else if strength.is_zero() {
            MatchClass::Zero
        } else {
            MatchClass::Partial
        }
    }
}

pub fn classify_match(ms: f64) -> Result<MatchClass, InferenceError> {
    if !(0.0..=1.0).contains(&ms) {
        return Err(InferenceError::StrengthOutOfRange(ms));
    }
    Ok(if ms == 1.0 {
        MatchClass::Full
    } else if ms == 0.0 {
        MatchClass::Zero
    } else {
        MatchClass::Partial
    })
}

pub fn strength_f64(strength: Strength) -> f64 {
    strength.to_f64().unwrap_or(f64::NAN)
}
