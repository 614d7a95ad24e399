use std::collections::BTreeMap;

use serde::Serialize;

use super::joint::{joint_probability, Evidence};
use super::network::BayesianNetwork;
use super::BayesError;
use crate::inference::Differential;

/// Default closeness threshold for treating two chances as conflicting.
pub const DEFAULT_EPSILON: f64 = 0.02;

/// Absorbs binary rounding when comparing a decimal gap against epsilon.
const GAP_SLACK: f64 = 1e-12;

/// Groups of differential entries whose chances are mutually close.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConflictSet {
    pub groups: Vec<Vec<String>>,
    pub epsilon: f64,
}

impl ConflictSet {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Chains adjacent entries of the sorted differential whose chances differ
/// by at most `epsilon`; components with a single member are dropped.
pub fn detect_conflicts(diff: &Differential, epsilon: f64) -> Result<ConflictSet, BayesError> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(BayesError::NegativeEpsilon(epsilon));
    }
    let mut groups = Vec::new();
    let mut current: Vec<String> = Vec::new();
    let mut previous: Option<f64> = None;
    for entry in &diff.entries {
        let chance = entry.chance_f64();
        let joined = previous.is_some_and(|p| (p - chance).abs() <= epsilon + GAP_SLACK);
        if !joined {
            if current.len() >= 2 {
                groups.push(std::mem::take(&mut current));
            }
            current.clear();
        }
        current.push(entry.disease_id.clone());
        previous = Some(chance);
    }
    if current.len() >= 2 {
        groups.push(current);
    }
    Ok(ConflictSet { groups, epsilon })
}

/// Joint values and resulting order for one conflict group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupAudit {
    pub group: Vec<String>,
    pub joints: BTreeMap<String, f64>,
    pub order: Vec<String>,
    /// Two or more members had equal joints; their prior order was kept.
    pub tie: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub differential: Differential,
    pub audits: Vec<GroupAudit>,
}

/// Reorders each conflict group by descending joint probability. Chances are
/// left untouched and entries outside the groups keep their positions.
/// `networks[i]` is the network built for `conflicts.groups[i]`.
pub fn resolve(
    diff: &Differential,
    conflicts: &ConflictSet,
    networks: &[BayesianNetwork],
    evidence: &Evidence,
) -> Result<Resolution, BayesError> {
    if networks.len() != conflicts.groups.len() {
        return Err(BayesError::GroupMismatch { groups: conflicts.groups.len(), networks: networks.len() });
    }
    let mut entries = diff.entries.clone();
    let mut audits = Vec::with_capacity(conflicts.groups.len());

    for (group, bn) in conflicts.groups.iter().zip(networks) {
        let mut positions: Vec<usize> = group
            .iter()
            .map(|d| {
                entries
                    .iter()
                    .position(|e| &e.disease_id == d)
                    .ok_or_else(|| BayesError::UnknownDisease(d.clone()))
            })
            .collect::<Result<_, _>>()?;
        positions.sort_unstable();

        let mut joints = BTreeMap::new();
        for d in group {
            joints.insert(d.clone(), joint_probability(bn, d, evidence)?);
        }

        let mut members: Vec<_> = positions.iter().map(|&i| entries[i].clone()).collect();
        members.sort_by(|a, b| joints[&b.disease_id].total_cmp(&joints[&a.disease_id]));
        let tie = {
            let mut values: Vec<f64> = joints.values().copied().collect();
            values.sort_by(f64::total_cmp);
            values.windows(2).any(|w| w[0] == w[1])
        };
        let order: Vec<String> = members.iter().map(|e| e.disease_id.clone()).collect();
        for (&pos, member) in positions.iter().zip(members) {
            entries[pos] = member;
        }
        audits.push(GroupAudit { group: group.clone(), joints, order, tie });
    }

    Ok(Resolution {
        differential: Differential {
            entries,
            divisor_used: diff.divisor_used,
            phases_performed: diff.phases_performed.clone(),
        },
        audits,
    })
}
