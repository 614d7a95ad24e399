use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::tables::{Assignment, HistoryContext, OutcomeRow};
use super::BayesError;
use crate::inference::PatientInput;
use crate::kb::{KnowledgeBase, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    History,
    Disease,
    Examination,
    Investigation,
}

/// Value taken by a node: a token set for attribute nodes, truth for diseases.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeValue {
    Finding(Assignment),
    Disease(bool),
}

impl fmt::Display for NodeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeValue::Finding(a) => a.fmt(f),
            NodeValue::Disease(b) => b.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeCpt {
    /// Unconditional distribution of a history attribute.
    Prior(OutcomeRow),
    /// `p(disease = true | history context)`; contexts are keyed by the
    /// parent history nodes exactly.
    DiseaseGivenHistory(BTreeMap<HistoryContext, f64>),
    /// Per parent disease (in parent order): the row given that disease is
    /// true, and the row given it is false when the tables provide one.
    FindingGivenDiseases { true_rows: Vec<OutcomeRow>, false_rows: Vec<Option<OutcomeRow>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub layer: Layer,
    pub parents: Vec<usize>,
    pub outcomes: Vec<NodeValue>,
    pub cpt: NodeCpt,
}

/// Three-layer network: history → conflicted diseases → examination and
/// investigation findings. Only attributes the patient reported become nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    nodes: Vec<Node>,
}

impl BayesianNetwork {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn layer(&self, layer: Layer) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.layer == layer)
    }

    pub fn layer_size(&self, layer: Layer) -> usize {
        self.layer(layer).count()
    }

    /// Directed edges `(parent, child)` by node index.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(child, n)| n.parents.iter().map(move |&p| (p, child)))
            .collect()
    }

    pub fn diseases(&self) -> impl Iterator<Item = &str> {
        self.layer(Layer::Disease).map(|n| n.name.as_str())
    }

    pub(crate) fn from_nodes(nodes: Vec<Node>) -> Self {
        BayesianNetwork { nodes }
    }
}

fn missing(node: &str, context: impl Into<String>) -> BayesError {
    BayesError::MissingCpt { node: node.to_string(), context: context.into() }
}

fn context_label(ctx: &HistoryContext) -> String {
    let parts: Vec<String> = ctx.iter().map(|(a, v)| format!("{a}={v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Builds the conflict-resolution network for `conflicted` diseases from the
/// patient's non-empty findings and the knowledge base's tables.
pub fn construct_bn(
    patient: &PatientInput,
    conflicted: &[String],
    kb: &KnowledgeBase,
) -> Result<BayesianNetwork, BayesError> {
    if conflicted.len() < 2 {
        return Err(BayesError::TooFewDiseases(conflicted.len()));
    }
    let mut seen = BTreeSet::new();
    for d in conflicted {
        if kb.disease(d).is_none() {
            return Err(BayesError::UnknownDisease(d.clone()));
        }
        if !seen.insert(d.as_str()) {
            return Err(BayesError::DuplicateDisease(d.clone()));
        }
    }

    let mut evidence: Vec<(Phase, String, Assignment)> = Vec::new();
    for phase in Phase::ALL {
        for def in kb.catalog.phase_attributes(phase) {
            if let Some(tokens) = patient.tokens(phase, &def.id).filter(|t| !t.is_empty()) {
                evidence.push((phase, def.id.clone(), Assignment::of(tokens.iter().cloned())));
            }
        }
    }
    if evidence.is_empty() {
        return Err(BayesError::NoEvidence);
    }
    for (_, attribute, _) in &evidence {
        if seen.contains(attribute.as_str()) {
            return Err(BayesError::NameClash(attribute.clone()));
        }
    }

    let cpts = &kb.cpts;
    let mut nodes: Vec<Node> = Vec::new();

    // history layer
    let mut history_ctx = HistoryContext::new();
    for (phase, attribute, value) in &evidence {
        if *phase != Phase::History {
            continue;
        }
        let row = cpts
            .prior_row(attribute)
            .ok_or_else(|| missing(attribute, "prior"))?;
        if !row.contains_key(value) {
            return Err(missing(attribute, format!("prior for {attribute}={value}")));
        }
        history_ctx.insert(attribute.clone(), value.clone());
        nodes.push(Node {
            name: attribute.clone(),
            layer: Layer::History,
            parents: Vec::new(),
            outcomes: row.keys().cloned().map(NodeValue::Finding).collect(),
            cpt: NodeCpt::Prior(row.clone()),
        });
    }
    let history_idx: Vec<usize> = (0..nodes.len()).collect();
    let history_keys: BTreeSet<&String> = history_ctx.keys().collect();

    // disease layer
    for disease in conflicted {
        if cpts.disease_given(disease, &history_ctx).is_none() {
            return Err(missing(disease, format!("p({disease} | {})", context_label(&history_ctx))));
        }
        let table: BTreeMap<HistoryContext, f64> = cpts
            .disease_given_history()
            .iter()
            .filter(|e| &e.disease == disease && e.history_assignment.keys().collect::<BTreeSet<_>>() == history_keys)
            .map(|e| (e.history_assignment.clone(), e.p))
            .collect();
        nodes.push(Node {
            name: disease.clone(),
            layer: Layer::Disease,
            parents: history_idx.clone(),
            outcomes: vec![NodeValue::Disease(true), NodeValue::Disease(false)],
            cpt: NodeCpt::DiseaseGivenHistory(table),
        });
    }
    let disease_idx: Vec<usize> = (history_idx.len()..nodes.len()).collect();

    // examination and investigation layers
    for (phase, attribute, value) in &evidence {
        let layer = match phase {
            Phase::History => continue,
            Phase::Examination => Layer::Examination,
            Phase::Investigation => Layer::Investigation,
        };
        let mut true_rows = Vec::with_capacity(conflicted.len());
        let mut false_rows = Vec::with_capacity(conflicted.len());
        let mut outcomes = BTreeSet::new();
        for disease in conflicted {
            let row = cpts
                .finding_row(attribute, disease, true)
                .ok_or_else(|| missing(attribute, format!("p({attribute} | {disease}=true)")))?;
            if !row.contains_key(value) {
                return Err(missing(attribute, format!("p({attribute}={value} | {disease}=true)")));
            }
            outcomes.extend(row.keys().cloned());
            let false_row = cpts.finding_row(attribute, disease, false).cloned();
            if let Some(r) = &false_row {
                outcomes.extend(r.keys().cloned());
            }
            true_rows.push(row.clone());
            false_rows.push(false_row);
        }
        nodes.push(Node {
            name: attribute.clone(),
            layer,
            parents: disease_idx.clone(),
            outcomes: outcomes.into_iter().map(NodeValue::Finding).collect(),
            cpt: NodeCpt::FindingGivenDiseases { true_rows, false_rows },
        });
    }

    Ok(BayesianNetwork::from_nodes(nodes))
}
