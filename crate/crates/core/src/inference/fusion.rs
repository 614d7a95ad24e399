use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use num_traits::Zero;

use super::matching::{strength_f64, MatchClass, PhaseDiseaseList, Strength};
use super::InferenceError;
use crate::kb::Phase;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferentialEntry {
    pub disease_id: String,
    /// Exact chance of occurrence in `[0, 1]`.
    pub chance: Ratio<u64>,
    /// Match strength per performed phase; 0 where the disease was not listed.
    pub strengths: BTreeMap<Phase, Strength>,
}

impl DifferentialEntry {
    pub fn chance_f64(&self) -> f64 {
        strength_f64(self.chance)
    }

    pub fn match_class(&self, phase: Phase) -> MatchClass {
        MatchClass::of(self.strengths.get(&phase).copied().unwrap_or_else(Ratio::zero))
    }
}

/// Ranked list of probable diseases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Differential {
    pub entries: Vec<DifferentialEntry>,
    pub divisor_used: u64,
    pub phases_performed: BTreeSet<Phase>,
}

impl Differential {
    /// Sorts by chance descending, ties by disease id.
    pub fn new(mut entries: Vec<DifferentialEntry>, divisor_used: u64, phases_performed: BTreeSet<Phase>) -> Self {
        entries.sort_by(|a, b| b.chance.cmp(&a.chance).then_with(|| a.disease_id.cmp(&b.disease_id)));
        Differential { entries, divisor_used, phases_performed }
    }

    pub fn order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.disease_id.as_str()).collect()
    }

    pub fn get(&self, disease_id: &str) -> Option<&DifferentialEntry> {
        self.entries.iter().find(|e| e.disease_id == disease_id)
    }
}

/// Fuses per-phase lists with priorities history 1, examination 2,
/// investigation 3. The divisor is the sum of the performed phases'
/// priorities, 6 when all three were performed.
pub fn provisional_diagnosis(
    lists: &BTreeMap<Phase, PhaseDiseaseList>,
    phases_performed: &BTreeSet<Phase>,
) -> Result<Differential, InferenceError> {
    if phases_performed.is_empty() {
        return Err(InferenceError::NoPhasesPerformed);
    }
    let listed: BTreeSet<Phase> = lists.keys().copied().collect();
    if &listed != phases_performed {
        return Err(InferenceError::PhaseListMismatch {
            performed: phases_performed.iter().copied().collect(),
            listed: listed.into_iter().collect(),
        });
    }

    let divisor: u64 = phases_performed.iter().map(|p| p.priority()).sum();

    let mut strengths: BTreeMap<&str, BTreeMap<Phase, Strength>> = BTreeMap::new();
    for (&phase, list) in lists {
        for score in &list.entries {
            strengths.entry(score.disease_id.as_str()).or_default().insert(phase, score.strength);
        }
    }

    let entries = strengths
        .into_iter()
        .map(|(disease, mut per_phase)| {
            for &phase in phases_performed {
                per_phase.entry(phase).or_insert_with(Ratio::zero);
            }
            let combined = per_phase
                .iter()
                .fold(Ratio::zero(), |acc: Ratio<u64>, (phase, ms)| acc + *ms * phase.priority());
            DifferentialEntry {
                disease_id: disease.to_string(),
                chance: combined / divisor,
                strengths: per_phase,
            }
        })
        .collect();

    Ok(Differential::new(entries, divisor, phases_performed.clone()))
}
