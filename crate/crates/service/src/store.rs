//! Append-only store of finalized consultations, one JSON record per line
//! in `<dir>/cases.jsonl`.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use framedx_core::inference::PatientInput;
use framedx_core::DiagnosisReport;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STORE_FILE: &str = "cases.jsonl";

/// A finalized consultation. Never modified once written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub record_id: String,
    pub session_id: String,
    pub patient_id: String,
    pub finalized_at: DateTime<Utc>,
    pub epsilon: f64,
    pub findings: PatientInput,
    pub report: DiagnosisReport,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("case store i/o: {0}")]
    Io(#[from] io::Error),
    #[error("{path}:{line}: unreadable case record: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

#[derive(Debug)]
pub struct CaseStore {
    path: PathBuf,
    records: Mutex<Vec<CaseRecord>>,
}

impl CaseStore {
    /// Opens the store under `dir`, creating the directory if needed and
    /// reading back every record already on disk.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        fs::create_dir_all(dir.as_ref())?;
        let path = dir.as_ref().join(STORE_FILE);
        let records = if path.exists() { read_records(&path)? } else { Vec::new() };
        Ok(CaseStore { path, records: Mutex::new(records) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes the record as a single line and syncs before it becomes
    /// visible to lookups.
    pub fn append(&self, record: CaseRecord) -> Result<(), StoreError> {
        let mut line = serde_json::to_string(&record).expect("case record serializes");
        line.push('\n');
        let mut records = self.records.lock().expect("store lock");
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        file.write_all(line.as_bytes())?;
        file.sync_data()?;
        records.push(record);
        Ok(())
    }

    pub fn get(&self, record_id: &str) -> Option<CaseRecord> {
        self.find(|r| r.record_id == record_id).into_iter().next()
    }

    pub fn by_session(&self, session_id: &str) -> Option<CaseRecord> {
        self.find(|r| r.session_id == session_id).into_iter().next()
    }

    pub fn by_patient(&self, patient_id: &str) -> Vec<CaseRecord> {
        self.find(|r| r.patient_id == patient_id)
    }

    pub fn all(&self) -> Vec<CaseRecord> {
        self.find(|_| true)
    }

    fn find(&self, pred: impl Fn(&CaseRecord) -> bool) -> Vec<CaseRecord> {
        self.records.lock().expect("store lock").iter().filter(|r| pred(r)).cloned().collect()
    }
}

pub fn read_records(path: &Path) -> Result<Vec<CaseRecord>, StoreError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}
