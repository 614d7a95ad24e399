use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::kb::{AttributeCatalog, Phase};

/// Findings of one phase: attribute id → observed tokens.
pub type Findings = BTreeMap<String, BTreeSet<String>>;

/// One patient's findings, grouped by the phases actually performed.
/// A phase key that is absent means the phase was not performed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatientInput {
    pub patient_id: String,
    #[serde(default)]
    pub phases: BTreeMap<Phase, Findings>,
}

impl PatientInput {
    pub fn new(patient_id: impl Into<String>) -> Self {
        PatientInput { patient_id: patient_id.into(), phases: BTreeMap::new() }
    }

    /// Parses a case file and drops attributes with no tokens.
    pub fn from_json(text: &str) -> Result<Self, InferenceError> {
        let input: PatientInput =
            serde_json::from_str(text).map_err(|e| InferenceError::MalformedCase(e.to_string()))?;
        Ok(input.normalized())
    }

    pub fn normalized(mut self) -> Self {
        for findings in self.phases.values_mut() {
            findings.retain(|_, tokens| !tokens.is_empty());
        }
        self
    }

    pub fn with_phase<I, A, T>(mut self, phase: Phase, findings: I) -> Self
    where
        I: IntoIterator<Item = (A, Vec<T>)>,
        A: Into<String>,
        T: Into<String>,
    {
        let findings: Findings = findings
            .into_iter()
            .map(|(a, ts)| (a.into(), ts.into_iter().map(Into::into).collect::<BTreeSet<_>>()))
            .filter(|(_, ts)| !ts.is_empty())
            .collect();
        self.phases.insert(phase, findings);
        self
    }

    pub fn phases_performed(&self) -> BTreeSet<Phase> {
        self.phases.keys().copied().collect()
    }

    pub fn findings(&self, phase: Phase) -> Option<&Findings> {
        self.phases.get(&phase)
    }

    pub fn tokens(&self, phase: Phase, attribute: &str) -> Option<&BTreeSet<String>> {
        self.phases.get(&phase)?.get(attribute)
    }

    /// Closed-world check: every attribute belongs to its phase and every
    /// token is legal for the attribute.
    pub fn validate(&self, catalog: &AttributeCatalog) -> Result<(), InferenceError> {
        for (&phase, findings) in &self.phases {
            validate_findings(catalog, phase, findings)?;
        }
        Ok(())
    }
}

pub fn validate_findings(
    catalog: &AttributeCatalog,
    phase: Phase,
    findings: &Findings,
) -> Result<(), InferenceError> {
    for (attribute, tokens) in findings {
        let def = catalog
            .get(attribute)
            .ok_or_else(|| InferenceError::UnknownAttribute { phase, attribute: attribute.clone() })?;
        if def.phase != phase {
            return Err(InferenceError::WrongPhase {
                attribute: attribute.clone(),
                expected: def.phase,
                found: phase,
            });
        }
        if let Some(bad) = tokens.iter().find(|t| !def.allows(t)) {
            return Err(InferenceError::IllegalValue {
                attribute: attribute.clone(),
                value: bad.clone(),
                allowed: def.allowed_values.clone(),
            });
        }
        if !def.multi_valued && tokens.len() > 1 {
            return Err(InferenceError::TooManyValues {
                attribute: attribute.clone(),
                count: tokens.len(),
            });
        }
    }
    Ok(())
}
