use std::fmt;

use thiserror::Error;

use super::{KnowledgeBase, Phase, PhaseFrame};

/// A frame visited while walking the reference structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameRef {
    Root,
    SubRoot(Phase),
    Instance { phase: Phase, disease: String },
}

impl fmt::Display for FrameRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameRef::Root => f.write_str("root"),
            FrameRef::SubRoot(p) => write!(f, "sub-root({p})"),
            FrameRef::Instance { phase, disease } => write!(f, "instance({phase}, {disease})"),
        }
    }
}

#[derive(Debug)]
pub struct Traversal<'a> {
    /// Frames in visiting order.
    pub path: Vec<FrameRef>,
    pub frame: &'a PhaseFrame,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraverseError {
    #[error("root frame has no slot for phase {0}")]
    UnknownPhase(Phase),
    #[error("no disease `{0}` under the sub-root")]
    UnknownDisease(String),
}

/// Walks root → sub-root(phase) → instance(disease). Slots on each frame
/// are explored left to right, so the first matching slot wins.
pub fn traverse<'a>(
    kb: &'a KnowledgeBase,
    phase: Phase,
    disease_id: &str,
) -> Result<Traversal<'a>, TraverseError> {
    let mut path = vec![FrameRef::Root];

    let linked = kb.root.slots.iter().find(|&&p| p == phase).copied();
    let sub_root = linked
        .and_then(|p| kb.sub_root(p))
        .ok_or(TraverseError::UnknownPhase(phase))?;
    path.push(FrameRef::SubRoot(phase));

    let disease = sub_root
        .slots
        .iter()
        .find(|id| id.as_str() == disease_id)
        .and_then(|id| kb.disease(id))
        .ok_or_else(|| TraverseError::UnknownDisease(disease_id.to_string()))?;
    path.push(FrameRef::Instance { phase, disease: disease.id.clone() });

    Ok(Traversal { path, frame: disease.frame(phase) })
}
