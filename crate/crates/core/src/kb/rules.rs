use serde::Serialize;

use super::{KbError, KnowledgeBase, Phase, WeightedSlot, WeightedValue};

/// Production-rule view of one non-empty slot:
/// `<attribute, {(value, weight)...}, significance> -> disease`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductionRule {
    pub phase: Phase,
    pub attribute: String,
    pub values: Vec<WeightedValue>,
    pub significance: u32,
    pub consequent: String,
}

impl ProductionRule {
    pub fn to_slot(&self) -> WeightedSlot {
        WeightedSlot {
            attribute: self.attribute.clone(),
            significance: self.significance,
            values: self.values.clone(),
        }
    }
}

/// One rule per non-empty slot across the disease's phase frames, in
/// phase order then slot order.
pub fn export_rules(kb: &KnowledgeBase, disease_id: &str) -> Result<Vec<ProductionRule>, KbError> {
    let disease = kb
        .disease(disease_id)
        .ok_or_else(|| KbError::UnknownDisease(disease_id.to_string()))?;
    Ok(Phase::ALL
        .into_iter()
        .flat_map(|phase| {
            disease.frame(phase).non_empty_slots().map(move |slot| ProductionRule {
                phase,
                attribute: slot.attribute.clone(),
                values: slot.values.clone(),
                significance: slot.significance,
                consequent: disease.id.clone(),
            })
        })
        .collect())
}
