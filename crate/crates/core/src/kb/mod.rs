//! Frame-structured knowledge base.
//!
//! The catalog is the universal frame: every attribute with its legal
//! values, partitioned into the three clinical phases. Each disease owns one
//! instance frame per phase whose slots carry a clinical significance and a
//! weightage for every value. A root frame links the three per-phase
//! sub-root frames, and each sub-root links the disease instance frames of
//! its phase, giving `3x + 3` reference links for `x` diseases.

mod document;
mod rules;
mod traverse;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::ConditionalTables;

pub use document::{load_kb, parse_kb_unchecked, KbDocument};
pub use rules::{export_rules, ProductionRule};
pub use traverse::{traverse, FrameRef, TraverseError, Traversal};
pub use validate::{
    validate_kb, validate_kb_with, ValidateOptions, ValidationReport, Violation, ViolationKind,
};

/// Clinical phase. The discriminant order is the order phases are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    History,
    Examination,
    Investigation,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::History, Phase::Examination, Phase::Investigation];

    /// Fusion priority: history 1, examination 2, investigation 3.
    pub fn priority(self) -> u64 {
        match self {
            Phase::History => 1,
            Phase::Examination => 2,
            Phase::Investigation => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::History => "history",
            Phase::Examination => "examination",
            Phase::Investigation => "investigation",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown phase `{0}` (expected history, examination or investigation)")]
pub struct UnknownPhase(pub String);

impl FromStr for Phase {
    type Err = UnknownPhase;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "history" => Ok(Phase::History),
            "examination" => Ok(Phase::Examination),
            "investigation" => Ok(Phase::Investigation),
            other => Err(UnknownPhase(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub id: String,
    pub phase: Phase,
    pub multi_valued: bool,
    pub allowed_values: Vec<String>,
}

impl AttributeDef {
    pub fn allows(&self, token: &str) -> bool {
        self.allowed_values.iter().any(|v| v == token)
    }
}

/// The universal attribute/value space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeCatalog {
    pub attributes: Vec<AttributeDef>,
}

impl AttributeCatalog {
    pub fn get(&self, id: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.id == id)
    }

    /// Attributes of one phase, in catalog order.
    pub fn phase_attributes(&self, phase: Phase) -> impl Iterator<Item = &AttributeDef> {
        self.attributes.iter().filter(move |a| a.phase == phase)
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.phase_attributes(phase).count()
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedValue {
    pub token: String,
    pub weight: u32,
}

/// One attribute of an instance frame with its weighted values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedSlot {
    pub attribute: String,
    pub significance: u32,
    pub values: Vec<WeightedValue>,
}

impl WeightedSlot {
    pub fn empty(attribute: impl Into<String>) -> Self {
        WeightedSlot { attribute: attribute.into(), significance: 0, values: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn weight_of(&self, token: &str) -> Option<u32> {
        self.values.iter().find(|v| v.token == token).map(|v| v.weight)
    }

    /// Largest weightage in the slot, 0 when empty.
    pub fn max_weight(&self) -> u32 {
        self.values.iter().map(|v| v.weight).max().unwrap_or(0)
    }
}

/// Instance frame of one disease for one phase.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseFrame {
    pub slots: Vec<WeightedSlot>,
}

impl PhaseFrame {
    pub fn slot(&self, attribute: &str) -> Option<&WeightedSlot> {
        self.slots.iter().find(|s| s.attribute == attribute)
    }

    pub fn non_empty_slots(&self) -> impl Iterator<Item = &WeightedSlot> {
        self.slots.iter().filter(|s| !s.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PhaseFrames {
    pub history: PhaseFrame,
    pub examination: PhaseFrame,
    pub investigation: PhaseFrame,
}

impl PhaseFrames {
    pub fn get(&self, phase: Phase) -> &PhaseFrame {
        match phase {
            Phase::History => &self.history,
            Phase::Examination => &self.examination,
            Phase::Investigation => &self.investigation,
        }
    }

    pub fn get_mut(&mut self, phase: Phase) -> &mut PhaseFrame {
        match phase {
            Phase::History => &mut self.history,
            Phase::Examination => &mut self.examination,
            Phase::Investigation => &mut self.investigation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiseaseProfile {
    pub id: String,
    #[serde(default)]
    pub display_name: String,
    pub frames: PhaseFrames,
}

impl DiseaseProfile {
    pub fn frame(&self, phase: Phase) -> &PhaseFrame {
        self.frames.get(phase)
    }
}

/// Root frame: one slot per phase, each naming the sub-root it links to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootFrame {
    pub slots: Vec<Phase>,
}

/// Sub-root frame of one phase: slot `j` links the instance frame of disease `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubRootFrame {
    pub phase: Phase,
    pub slots: Vec<String>,
}

/// The assembled knowledge base. Immutable once loaded; share it behind an `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    pub catalog: AttributeCatalog,
    pub diseases: Vec<DiseaseProfile>,
    pub root: RootFrame,
    pub sub_roots: Vec<SubRootFrame>,
    pub cpts: ConditionalTables,
}

impl KnowledgeBase {
    /// Builds the reference structure (root and sub-roots) over the given
    /// diseases. No invariant checking happens here; see [`validate_kb`].
    pub fn assemble(
        catalog: AttributeCatalog,
        diseases: Vec<DiseaseProfile>,
        cpts: ConditionalTables,
    ) -> Self {
        let root = RootFrame { slots: Phase::ALL.to_vec() };
        let sub_roots = Phase::ALL
            .iter()
            .map(|&phase| SubRootFrame {
                phase,
                slots: diseases.iter().map(|d| d.id.clone()).collect(),
            })
            .collect();
        KnowledgeBase { catalog, diseases, root, sub_roots, cpts }
    }

    pub fn disease(&self, id: &str) -> Option<&DiseaseProfile> {
        self.diseases.iter().find(|d| d.id == id)
    }

    pub fn disease_ids(&self) -> impl Iterator<Item = &str> {
        self.diseases.iter().map(|d| d.id.as_str())
    }

    pub fn sub_root(&self, phase: Phase) -> Option<&SubRootFrame> {
        self.sub_roots.iter().find(|s| s.phase == phase)
    }

    /// Number of reference links actually present in the frame structure.
    pub fn link_count(&self) -> usize {
        self.root.slots.len() + self.sub_roots.iter().map(|s| s.slots.len()).sum::<usize>()
    }
}

#[derive(Debug, Error)]
pub enum KbError {
    #[error("malformed knowledge base document: {0}")]
    Parse(String),
    #[error("knowledge base schema error: {0}")]
    Schema(String),
    #[error("knowledge base violates {} invariant(s); first: {}", .0.violations.len(), .0.violations.first().map(|v| v.to_string()).unwrap_or_default())]
    Invariant(ValidationReport),
    #[error("unknown disease `{0}`")]
    UnknownDisease(String),
}
