mod support;

use framedx_core::engine::ConflictStatus;
use framedx_core::inference::{InferenceError, MatchClass, PatientInput};
use framedx_core::{diagnose, DiagnosisError, DiagnosisOptions, Phase};
use support::*;

#[test]
fn conflict_resolved_in_favour_of_larger_joint() {
    let report = diagnose(&conflict_kb(), &conflict_case(), DiagnosisOptions::default()).unwrap();
    assert_eq!(report.order(), vec!["d2", "d1", "d3", "d4"]);
    assert_eq!(report.conflicts.len(), 1);
    let audit = &report.conflicts[0];
    assert_eq!(audit.status, ConflictStatus::Resolved);
    assert_eq!(audit.group, vec!["d1", "d2"]);
    assert_eq!(audit.order, vec!["d2", "d1"]);
    assert!(audit.joints["d2"] > audit.joints["d1"]);
    // chances are reported untouched
    assert_eq!(report.differential[0].chance, report.differential[1].chance);
    assert_eq!(report.differential[1].match_class_per_phase[&Phase::Examination], MatchClass::Full);
}

#[test]
fn wider_epsilon_pulls_in_a_group_without_tables() {
    let opts = DiagnosisOptions { epsilon: 0.3 };
    let report = diagnose(&conflict_kb(), &conflict_case(), opts).unwrap();
    // d3 has no conditional tables, so the whole chain stays unresolved
    assert_eq!(report.conflicts.len(), 1);
    assert_eq!(report.conflicts[0].status, ConflictStatus::Unresolved);
    assert!(report.conflicts[0].reason.is_some());
    assert_eq!(report.order(), report.provisional_order);
}

#[test]
fn no_phases_is_an_error() {
    let err = diagnose(&conflict_kb(), &PatientInput::new("x"), DiagnosisOptions::default()).unwrap_err();
    assert!(matches!(err, DiagnosisError::Input(InferenceError::NoPhasesPerformed)));
    assert!(diagnose(&conflict_kb(), &conflict_case(), DiagnosisOptions { epsilon: -1.0 }).is_err());
}

#[test]
fn report_json_is_stable() {
    let a = diagnose(&conflict_kb(), &conflict_case(), DiagnosisOptions::default()).unwrap();
    let text = a.to_json();
    assert_eq!(text, diagnose(&conflict_kb(), &conflict_case(), DiagnosisOptions::default()).unwrap().to_json());
    let back: framedx_core::DiagnosisReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, a);
}
