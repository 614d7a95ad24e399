//! Validation statistics for comparing software outcomes with expert
//! diagnoses: deviation from the acceptance level, contingency tables with a
//! Pearson chi-square homogeneity check, and precision/recall/accuracy.

mod contingency;
mod metrics;
mod stats;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use contingency::{
    build_contingency, chi_square, expected_frequencies, homogeneity_verdict, AgeBands,
    ChiSquare, ContingencyTable, ExpectedTable,
};
pub use metrics::{harmonic_accuracy, prf_metrics, PatientPrf, PrfReport};
pub use stats::{observed_chances, standard_deviation, SdMode};

/// Chance an expert diagnosis is assumed to carry at minimum.
pub const ACCEPTANCE_LEVEL: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no data points")]
    Empty,
    #[error("contingency table has grand total 0")]
    ZeroTotal,
    #[error("table shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("negative age {0}")]
    NegativeAge(f64),
    #[error("age band edges must be strictly increasing")]
    BadBandEdges,
    #[error("patient `{0}` has no expert diagnosis")]
    NoExpertDiagnosis(String),
    #[error("invalid outcome pair `{patient}`: {reason}")]
    InvalidPair { patient: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisOutcome {
    pub disease: String,
    pub chance: f64,
}

/// Expert and software outcomes for one patient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomePair {
    pub patient_id: String,
    pub expert: Vec<DiagnosisOutcome>,
    #[serde(default)]
    pub software: Vec<DiagnosisOutcome>,
    /// Patient age, used to build age-band contingency tables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<f64>,
}

impl OutcomePair {
    pub fn validate(&self) -> Result<(), EvalError> {
        let invalid = |reason: String| EvalError::InvalidPair { patient: self.patient_id.clone(), reason };
        for e in &self.expert {
            if !(ACCEPTANCE_LEVEL..=1.0).contains(&e.chance) {
                return Err(invalid(format!("expert chance {} for `{}` outside [0.75, 1]", e.chance, e.disease)));
            }
        }
        for s in &self.software {
            if !(0.0..=1.0).contains(&s.chance) {
                return Err(invalid(format!("software chance {} for `{}` outside [0, 1]", s.chance, s.disease)));
            }
        }
        for (label, set) in [("expert", &self.expert), ("software", &self.software)] {
            let mut seen = BTreeSet::new();
            if let Some(dup) = set.iter().find(|o| !seen.insert(o.disease.as_str())) {
                return Err(invalid(format!("{label} lists `{}` twice", dup.disease)));
            }
        }
        Ok(())
    }

    pub fn software_chance(&self, disease: &str) -> Option<f64> {
        self.software.iter().find(|s| s.disease == disease).map(|s| s.chance)
    }
}
