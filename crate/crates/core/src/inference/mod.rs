//! Phase-wise matching of patient findings and fusion into a differential.

mod fusion;
mod matching;
mod patient;

use thiserror::Error;

use crate::kb::Phase;

pub use fusion::{provisional_diagnosis, Differential, DifferentialEntry};
pub use matching::{
    classify_match, match_phase, match_strength, strength_f64, MatchClass, MatchEntry,
    MatchMatrix, PhaseDiseaseList, PhaseScore, PhaseScoring, Strength,
};
pub use patient::{validate_findings, Findings, PatientInput};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("phase {0} was not performed for this patient")]
    PhaseNotPerformed(Phase),
    #[error("match strength {0} outside [0, 1]")]
    StrengthOutOfRange(f64),
    #[error("no phases performed")]
    NoPhasesPerformed,
    #[error("phase lists {listed:?} do not cover the performed phases {performed:?}")]
    PhaseListMismatch { performed: Vec<Phase>, listed: Vec<Phase> },
    #[error("malformed case: {0}")]
    MalformedCase(String),
    #[error("unknown {phase} attribute `{attribute}`")]
    UnknownAttribute { phase: Phase, attribute: String },
    #[error("attribute `{attribute}` belongs to the {expected} phase, not {found}")]
    WrongPhase { attribute: String, expected: Phase, found: Phase },
    #[error("`{value}` is not an allowed value of `{attribute}` (allowed: {})", .allowed.join(", "))]
    IllegalValue { attribute: String, value: String, allowed: Vec<String> },
    #[error("`{attribute}` is single-valued but {count} values were given")]
    TooManyValues { attribute: String, count: usize },
}
