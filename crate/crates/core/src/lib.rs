//! Frame-structured diagnostic inference.
//!
//! Domain knowledge lives in a [`kb::KnowledgeBase`]: a closed attribute
//! catalog plus one weighted frame per disease and clinical phase. Patient
//! findings are matched phase by phase ([`inference`]), fused into a ranked
//! differential, and near-ties are broken by exact inference over a small
//! layered Bayesian network ([`bayes`]). [`evaluation`] carries the
//! statistics used to validate outcomes against expert opinion.

pub mod bayes;
pub mod engine;
pub mod evaluation;
pub mod inference;
pub mod kb;

pub use engine::{diagnose, DiagnosisError, DiagnosisOptions, DiagnosisReport};
pub use kb::{load_kb, KnowledgeBase, Phase};

/// Rounds to four decimal places, the precision used at every output surface.
pub fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}
