use serde::{Deserialize, Serialize};

use super::{EvalError, OutcomePair};

/// Placement of the radical in the deviation formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SdMode {
    /// `sqrt(Σ (x - μ)²) / N`
    #[default]
    Outer,
    /// `sqrt(Σ (x - μ)² / N)`
    Population,
}

pub fn standard_deviation(observed: &[f64], mu: f64, mode: SdMode) -> Result<f64, EvalError> {
    if observed.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = observed.len() as f64;
    let ss: f64 = observed.iter().map(|x| (x - mu).powi(2)).sum();
    Ok(match mode {
        SdMode::Outer => ss.sqrt() / n,
        SdMode::Population => (ss / n).sqrt(),
    })
}

/// One data point per expert diagnosis: the software's chance for that
/// disease, or 0 when the software did not list it.
pub fn observed_chances(pairs: &[OutcomePair]) -> Vec<f64> {
    pairs
        .iter()
        .flat_map(|p| p.expert.iter().map(move |e| p.software_chance(&e.disease).unwrap_or(0.0)))
        .collect()
}
