use std::collections::{BTreeMap, BTreeSet};

use super::network::{BayesianNetwork, Layer, Node, NodeCpt, NodeValue};
use super::tables::{Assignment, HistoryContext, OutcomeRow};
use super::BayesError;
use crate::inference::PatientInput;

/// Observed value of every non-disease node, keyed by attribute id.
pub type Evidence = BTreeMap<String, Assignment>;

/// Value of every node, disease nodes included.
pub type FullAssignment = BTreeMap<String, NodeValue>;

/// Evidence from every non-empty finding of the patient.
pub fn evidence_from_patient(patient: &PatientInput) -> Evidence {
    patient
        .phases
        .values()
        .flat_map(|f| f.iter())
        .filter(|(_, tokens)| !tokens.is_empty())
        .map(|(a, tokens)| (a.clone(), Assignment::of(tokens.iter().cloned())))
        .collect()
}

fn check_evidence(bn: &BayesianNetwork, evidence: &Evidence) -> Result<(), BayesError> {
    for node in bn.nodes().iter().filter(|n| n.layer != Layer::Disease) {
        if !evidence.contains_key(&node.name) {
            return Err(BayesError::IncompleteEvidence(node.name.clone()));
        }
    }
    for name in evidence.keys() {
        match bn.node(name) {
            Some(n) if n.layer != Layer::Disease => {}
            _ => return Err(BayesError::UnexpectedEvidence(name.clone())),
        }
    }
    Ok(())
}

fn row_lookup(row: &OutcomeRow, value: &Assignment) -> f64 {
    row.get(value).copied().unwrap_or(0.0)
}

/// Joint probability of the evidence with `disease` true:
///
/// `Π p(history_i) · p(disease | history) · Π p(exam_k | disease) · Π p(inv_l | disease)`
///
/// Findings are conditioned on the candidate disease alone.
pub fn joint_probability(
    bn: &BayesianNetwork,
    disease: &str,
    evidence: &Evidence,
) -> Result<f64, BayesError> {
    let disease_pos = bn
        .layer(Layer::Disease)
        .position(|n| n.name == disease)
        .ok_or_else(|| BayesError::NotADisease(disease.to_string()))?;
    let disease_node = bn.node(disease).expect("disease node exists");
    check_evidence(bn, evidence)?;

    let mut p = 1.0;
    let mut context = HistoryContext::new();
    for node in bn.layer(Layer::History) {
        let value = &evidence[&node.name];
        let NodeCpt::Prior(row) = &node.cpt else {
            unreachable!("history nodes carry priors")
        };
        p *= row_lookup(row, value);
        context.insert(node.name.clone(), value.clone());
    }

    let NodeCpt::DiseaseGivenHistory(table) = &disease_node.cpt else {
        unreachable!("disease nodes carry p(d | history)")
    };
    p *= table.get(&context).copied().ok_or_else(|| BayesError::MissingCpt {
        node: disease.to_string(),
        context: format!("{context:?}"),
    })?;

    for node in bn.nodes().iter().filter(|n| matches!(n.layer, Layer::Examination | Layer::Investigation)) {
        let NodeCpt::FindingGivenDiseases { true_rows, .. } = &node.cpt else {
            unreachable!("finding nodes carry p(a | d)")
        };
        p *= row_lookup(&true_rows[disease_pos], &evidence[&node.name]);
    }
    Ok(p)
}

/// Chain-rule product `Π p(node | parents)` over every node.
pub fn brute_force_joint(bn: &BayesianNetwork, assignment: &FullAssignment) -> Result<f64, BayesError> {
    brute_force_joint_clamped(bn, assignment, &BTreeSet::new())
}

/// As [`brute_force_joint`], but nodes in `clamped` are set by intervention:
/// their own factor is left out while their value still feeds their children.
pub fn brute_force_joint_clamped(
    bn: &BayesianNetwork,
    assignment: &FullAssignment,
    clamped: &BTreeSet<String>,
) -> Result<f64, BayesError> {
    let nodes = bn.nodes();
    let values: Vec<&NodeValue> = nodes
        .iter()
        .map(|n| {
            assignment
                .get(&n.name)
                .ok_or_else(|| BayesError::IncompleteAssignment(n.name.clone()))
        })
        .collect::<Result<_, _>>()?;

    let mut p = 1.0;
    for (i, node) in nodes.iter().enumerate() {
        if clamped.contains(&node.name) {
            continue;
        }
        let parents: Vec<(&Node, &NodeValue)> =
            node.parents.iter().map(|&j| (&nodes[j], values[j])).collect();
        p *= conditional(node, values[i], &parents)?;
    }
    Ok(p)
}

/// `p(node = value | parents)` for one node of the network.
fn conditional(node: &Node, value: &NodeValue, parents: &[(&Node, &NodeValue)]) -> Result<f64, BayesError> {
    let mismatch = || BayesError::ValueKind(node.name.clone());
    match &node.cpt {
        NodeCpt::Prior(row) => {
            let NodeValue::Finding(a) = value else { return Err(mismatch()) };
            Ok(row_lookup(row, a))
        }
        NodeCpt::DiseaseGivenHistory(table) => {
            let NodeValue::Disease(state) = value else { return Err(mismatch()) };
            let mut ctx = HistoryContext::new();
            for (parent, v) in parents {
                let NodeValue::Finding(a) = v else { return Err(BayesError::ValueKind(parent.name.clone())) };
                ctx.insert(parent.name.clone(), a.clone());
            }
            let p_true = table.get(&ctx).copied().ok_or_else(|| BayesError::MissingCpt {
                node: node.name.clone(),
                context: format!("{ctx:?}"),
            })?;
            Ok(if *state { p_true } else { 1.0 - p_true })
        }
        NodeCpt::FindingGivenDiseases { true_rows, false_rows } => {
            let NodeValue::Finding(a) = value else { return Err(mismatch()) };
            let mut active: Vec<usize> = Vec::new();
            for (k, (parent, v)) in parents.iter().enumerate() {
                match v {
                    NodeValue::Disease(true) => active.push(k),
                    NodeValue::Disease(false) => {}
                    _ => return Err(BayesError::ValueKind(parent.name.clone())),
                }
            }
            if active.len() == 1 {
                return Ok(row_lookup(&true_rows[active[0]], a));
            }
            // No single cause: combine the relevant rows as a normalized product.
            let rows: Vec<&OutcomeRow> = if active.is_empty() {
                false_rows
                    .iter()
                    .enumerate()
                    .map(|(k, r)| {
                        r.as_ref().ok_or_else(|| BayesError::MissingCpt {
                            node: node.name.clone(),
                            context: format!("{}=false", parents[k].0.name),
                        })
                    })
                    .collect::<Result<_, _>>()?
            } else {
                active.iter().map(|&k| &true_rows[k]).collect()
            };
            let score = |o: &Assignment| rows.iter().map(|r| row_lookup(r, o)).product::<f64>();
            let outcomes: Vec<&Assignment> = node
                .outcomes
                .iter()
                .filter_map(|o| match o {
                    NodeValue::Finding(x) => Some(x),
                    NodeValue::Disease(_) => None,
                })
                .collect();
            let z: f64 = outcomes.iter().map(|o| score(o)).sum();
            if z > 0.0 {
                Ok(score(a) / z)
            } else if outcomes.contains(&a) {
                Ok(1.0 / outcomes.len() as f64)
            } else {
                Ok(0.0)
            }
        }
    }
}

/// Every complete assignment over the nodes' outcome spaces. Returns `None`
/// when the count would exceed `limit`.
pub fn enumerate_assignments(bn: &BayesianNetwork, limit: usize) -> Option<Vec<FullAssignment>> {
    let nodes = bn.nodes();
    let mut total: usize = 1;
    for n in nodes {
        total = total.checked_mul(n.outcomes.len())?;
        if total > limit {
            return None;
        }
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; nodes.len()];
    for _ in 0..total {
        out.push(
            nodes
                .iter()
                .zip(&idx)
                .map(|(n, &k)| (n.name.clone(), n.outcomes[k].clone()))
                .collect(),
        );
        for (slot, n) in idx.iter_mut().zip(nodes) {
            *slot += 1;
            if *slot < n.outcomes.len() {
                break;
            }
            *slot = 0;
        }
    }
    Some(out)
}
