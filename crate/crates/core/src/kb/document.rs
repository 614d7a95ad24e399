use serde::{Deserialize, Serialize};

use super::{validate_kb, AttributeCatalog, DiseaseProfile, KbError, KnowledgeBase};
use crate::bayes::ConditionalTables;

/// On-disk form of a knowledge base: `catalog`, `diseases`, `cpts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbDocument {
    pub catalog: AttributeCatalog,
    pub diseases: Vec<DiseaseProfile>,
    #[serde(default)]
    pub cpts: ConditionalTables,
}

impl KbDocument {
    pub fn into_kb(self) -> Result<KnowledgeBase, KbError> {
        if self.diseases.is_empty() {
            return Err(KbError::Schema("`diseases` must list at least one disease".into()));
        }
        if self.catalog.attributes.is_empty() {
            return Err(KbError::Schema("`catalog.attributes` must not be empty".into()));
        }
        Ok(KnowledgeBase::assemble(self.catalog, self.diseases, self.cpts))
    }

    pub fn from_kb(kb: &KnowledgeBase) -> Self {
        KbDocument {
            catalog: kb.catalog.clone(),
            diseases: kb.diseases.clone(),
            cpts: kb.cpts.clone(),
        }
    }
}

fn parse_document(text: &str) -> Result<KbDocument, KbError> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => KbError::Schema(e.to_string()),
        _ => KbError::Parse(e.to_string()),
    })
}

/// Parses and assembles a knowledge base without checking invariants.
pub fn parse_kb_unchecked(text: &str) -> Result<KnowledgeBase, KbError> {
    parse_document(text)?.into_kb()
}

/// Parses, assembles and validates a knowledge base document.
pub fn load_kb(text: &str) -> Result<KnowledgeBase, KbError> {
    let kb = parse_kb_unchecked(text)?;
    let report = validate_kb(&kb);
    if report.is_clean() {
        Ok(kb)
    } else {
        Err(KbError::Invariant(report))
    }
}
