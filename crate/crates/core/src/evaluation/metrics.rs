use std::collections::BTreeSet;

use serde::Serialize;

use super::{EvalError, OutcomePair};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatientPrf {
    pub patient_id: String,
    pub recall: f64,
    pub precision: f64,
    pub accuracy: f64,
}

/// Means over patients of per-patient recall, precision and accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrfReport {
    pub recall: f64,
    pub precision: f64,
    pub accuracy: f64,
    pub per_patient: Vec<PatientPrf>,
}

/// Harmonic combination `2PR / (P + R)`; 0 when both are 0.
pub fn harmonic_accuracy(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Software predictions are the diseases with chance ≥ `threshold`.
/// Accuracy is computed per patient and then averaged.
pub fn prf_metrics(pairs: &[OutcomePair], threshold: f64) -> Result<PrfReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut per_patient = Vec::with_capacity(pairs.len());
    for pair in pairs {
        if pair.expert.is_empty() {
            return Err(EvalError::NoExpertDiagnosis(pair.patient_id.clone()));
        }
        let expert: BTreeSet<&str> = pair.expert.iter().map(|e| e.disease.as_str()).collect();
        let software: BTreeSet<&str> = pair
            .software
            .iter()
            .filter(|s| s.chance >= threshold)
            .map(|s| s.disease.as_str())
            .collect();
        let hits = expert.intersection(&software).count() as f64;
        let recall = hits / expert.len() as f64;
        let precision = if software.is_empty() { 0.0 } else { hits / software.len() as f64 };
        per_patient.push(PatientPrf {
            patient_id: pair.patient_id.clone(),
            recall,
            precision,
            accuracy: harmonic_accuracy(precision, recall),
        });
    }
    let n = per_patient.len() as f64;
    let mean = |f: fn(&PatientPrf) -> f64| per_patient.iter().map(f).sum::<f64>() / n;
    Ok(PrfReport {
        recall: mean(|p| p.recall),
        precision: mean(|p| p.precision),
        accuracy: mean(|p| p.accuracy),
        per_patient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::DiagnosisOutcome;

    fn outcomes(ids: &[&str], chance: f64) -> Vec<DiagnosisOutcome> {
        ids.iter().map(|d| DiagnosisOutcome { disease: d.to_string(), chance }).collect()
    }

    fn pair(expert: &[&str], software: &[&str]) -> OutcomePair {
        OutcomePair {
            patient_id: "p".into(),
            expert: outcomes(expert, 0.9),
            software: outcomes(software, 0.8),
            age: None,
        }
    }

    #[test]
    fn two_of_three_found() {
        let r = prf_metrics(&[pair(&["d1", "d2", "d3"], &["d1", "d2"])], 0.75).unwrap();
        assert!((r.recall - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.precision, 1.0);
        assert!((r.accuracy - 0.8).abs() < 1e-12);
    }

    #[test]
    fn identical_sets_score_one() {
        let r = prf_metrics(&[pair(&["d1", "d2"], &["d2", "d1"])], 0.75).unwrap();
        assert_eq!((r.recall, r.precision, r.accuracy), (1.0, 1.0, 1.0));
    }

    #[test]
    fn below_threshold_predictions_are_ignored() {
        let mut p = pair(&["d1"], &["d1"]);
        p.software[0].chance = 0.74;
        let r = prf_metrics(&[p], 0.75).unwrap();
        assert_eq!((r.recall, r.precision, r.accuracy), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(prf_metrics(&[], 0.75), Err(EvalError::Empty));
        assert!(matches!(prf_metrics(&[pair(&[], &["d1"])], 0.75), Err(EvalError::NoExpertDiagnosis(_))));
    }
}
