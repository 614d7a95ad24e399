//! Live consultations. Each session accumulates phase findings in
//! history → examination → investigation order and recomputes the
//! differential after every submission.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use framedx_core::inference::{validate_findings, Findings, InferenceError, PatientInput};
use framedx_core::{diagnose, DiagnosisError, DiagnosisOptions, DiagnosisReport, KnowledgeBase, Phase};
use serde::Serialize;
use thiserror::Error;
use uuid::Uuid;

use crate::store::{CaseRecord, CaseStore, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseStatus {
    Pending,
    Submitted,
}

#[derive(Debug, Clone, Serialize)]
pub struct Session {
    pub session_id: String,
    pub patient: PatientInput,
    pub phase_status: BTreeMap<Phase, PhaseStatus>,
    pub report: Option<DiagnosisReport>,
    pub record_id: Option<String>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl Session {
    fn new(patient_id: String) -> Self {
        let now = Utc::now();
        Session {
            session_id: Uuid::new_v4().to_string(),
            patient: PatientInput::new(patient_id),
            phase_status: Phase::ALL.into_iter().map(|p| (p, PhaseStatus::Pending)).collect(),
            report: None,
            record_id: None,
            created_at: now,
            updated_at: now,
        }
    }

    fn submitted(&self, phase: Phase) -> bool {
        self.phase_status[&phase] == PhaseStatus::Submitted
    }

    /// History must come first. A later phase may be skipped, but once a
    /// phase is submitted no earlier phase may be submitted for the first
    /// time. Resubmitting a phase is always allowed.
    fn check_order(&self, phase: Phase) -> Result<(), SessionError> {
        if phase == Phase::History || self.submitted(phase) {
            return Ok(());
        }
        if !self.submitted(Phase::History) {
            return Err(SessionError::OutOfOrder { phase, reason: "history has not been submitted".into() });
        }
        if let Some(later) = Phase::ALL.into_iter().find(|&p| p > phase && self.submitted(p)) {
            return Err(SessionError::OutOfOrder { phase, reason: format!("{later} was already submitted") });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no session `{0}`")]
    NotFound(String),
    #[error("{phase} cannot be submitted now: {reason}")]
    OutOfOrder { phase: Phase, reason: String },
    #[error("session `{0}` is finalized")]
    Finalized(String),
    #[error("session `{0}` has no submitted phase")]
    NothingSubmitted(String),
    #[error(transparent)]
    Input(#[from] InferenceError),
    #[error(transparent)]
    Diagnosis(DiagnosisError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Owns the live sessions. Each session sits behind its own lock, so work
/// on one session never blocks or interleaves with another.
pub struct SessionManager {
    kb: Arc<KnowledgeBase>,
    store: CaseStore,
    options: DiagnosisOptions,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionManager {
    pub fn new(kb: Arc<KnowledgeBase>, store: CaseStore, options: DiagnosisOptions) -> Self {
        SessionManager { kb, store, options, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn store(&self) -> &CaseStore {
        &self.store
    }

    pub fn create(&self, patient_id: impl Into<String>) -> Session {
        let session = Session::new(patient_id.into());
        self.sessions
            .lock()
            .expect("session table lock")
            .insert(session.session_id.clone(), Arc::new(Mutex::new(session.clone())));
        session
    }

    fn handle(&self, id: &str) -> Result<Arc<Mutex<Session>>, SessionError> {
        self.sessions
            .lock()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::NotFound(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<Session, SessionError> {
        Ok(self.handle(id)?.lock().expect("session lock").clone())
    }

    /// Stores (or replaces) one phase's findings and returns the recomputed
    /// differential over every phase submitted so far.
    pub fn submit(&self, id: &str, phase: Phase, findings: Findings) -> Result<DiagnosisReport, SessionError> {
        let handle = self.handle(id)?;
        let mut session = handle.lock().expect("session lock");
        if session.record_id.is_some() {
            return Err(SessionError::Finalized(id.to_string()));
        }
        session.check_order(phase)?;
        let findings: Findings = findings.into_iter().filter(|(_, t)| !t.is_empty()).collect();
        validate_findings(&self.kb.catalog, phase, &findings)?;

        let mut patient = session.patient.clone();
        patient.phases.insert(phase, findings);
        let report = diagnose(&self.kb, &patient, self.options).map_err(SessionError::Diagnosis)?;

        session.patient = patient;
        session.phase_status.insert(phase, PhaseStatus::Submitted);
        session.report = Some(report.clone());
        session.updated_at = Utc::now();
        Ok(report)
    }

    pub fn differential(&self, id: &str) -> Result<DiagnosisReport, SessionError> {
        self.get(id)?.report.ok_or_else(|| SessionError::NothingSubmitted(id.to_string()))
    }

    /// Writes the session's findings and current differential to the case
    /// store and closes the session to further submissions.
    pub fn finalize(&self, id: &str) -> Result<CaseRecord, SessionError> {
        let handle = self.handle(id)?;
        let mut session = handle.lock().expect("session lock");
        if session.record_id.is_some() {
            return Err(SessionError::Finalized(id.to_string()));
        }
        let report = session.report.clone().ok_or_else(|| SessionError::NothingSubmitted(id.to_string()))?;
        let record = CaseRecord {
            record_id: Uuid::new_v4().to_string(),
            session_id: session.session_id.clone(),
            patient_id: session.patient.patient_id.clone(),
            finalized_at: Utc::now(),
            epsilon: self.options.epsilon,
            findings: session.patient.clone(),
            report,
        };
        self.store.append(record.clone())?;
        session.record_id = Some(record.record_id.clone());
        session.updated_at = record.finalized_at;
        Ok(record)
    }
}
