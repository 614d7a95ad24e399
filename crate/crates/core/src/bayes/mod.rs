//! Conflict resolution with a three-layer Bayesian network.
//!
//! When several diseases end up with equal or near-equal chances, a network
//! is built over those diseases and the patient's reported attributes:
//! history nodes are roots, each conflicted disease depends on all history
//! nodes, and each examination or investigation finding depends on the
//! diseases. The candidate with the largest joint probability of the
//! evidence is ranked first within its group.

mod conflict;
mod joint;
mod network;
pub mod tables;

use thiserror::Error;

pub use conflict::{detect_conflicts, resolve, ConflictSet, GroupAudit, Resolution, DEFAULT_EPSILON};
pub use joint::{
    brute_force_joint, brute_force_joint_clamped, enumerate_assignments, evidence_from_patient,
    joint_probability, Evidence, FullAssignment,
};
pub use network::{construct_bn, BayesianNetwork, Layer, Node, NodeCpt, NodeValue};
pub use tables::{
    Assignment, ConditionalTables, DiseaseGivenHistoryEntry, FindingEntry, HistoryContext,
    OutcomeRow, PriorEntry,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesError {
    #[error("conflict resolution needs at least 2 diseases, got {0}")]
    TooFewDiseases(usize),
    #[error("unknown disease `{0}`")]
    UnknownDisease(String),
    #[error("disease `{0}` listed twice")]
    DuplicateDisease(String),
    #[error("`{0}` names both a disease and an attribute")]
    NameClash(String),
    #[error("patient has no findings to use as evidence")]
    NoEvidence,
    #[error("missing CPT entry for node `{node}`: {context}")]
    MissingCpt { node: String, context: String },
    #[error("evidence is missing node `{0}`")]
    IncompleteEvidence(String),
    #[error("evidence names `{0}`, which is not a finding node")]
    UnexpectedEvidence(String),
    #[error("`{0}` is not a disease node")]
    NotADisease(String),
    #[error("assignment is missing node `{0}`")]
    IncompleteAssignment(String),
    #[error("value of node `{0}` has the wrong kind")]
    ValueKind(String),
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("{groups} conflict groups but {networks} networks")]
    GroupMismatch { groups: usize, networks: usize },
}
