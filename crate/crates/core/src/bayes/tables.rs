use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

/// Reserved spelling of the empty assignment in documents.
pub const ABSENT: &str = "absent";

/// Value of one attribute node: the set of tokens observed. The empty set
/// is the `absent` outcome.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeSet<String>);

impl Assignment {
    pub fn absent() -> Self {
        Assignment(BTreeSet::new())
    }

    pub fn token(token: impl Into<String>) -> Self {
        Assignment(BTreeSet::from([token.into()]))
    }

    pub fn of<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Assignment(tokens.into_iter().map(Into::into).collect())
    }

    pub fn is_absent(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(ABSENT);
        }
        let joined: Vec<&str> = self.tokens().collect();
        f.write_str(&joined.join("+"))
    }
}

impl Serialize for Assignment {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0.len() {
            0 => serializer.serialize_str(ABSENT),
            1 => serializer.serialize_str(self.0.iter().next().expect("one token")),
            n => {
                let mut seq = serializer.serialize_seq(Some(n))?;
                for t in &self.0 {
                    seq.serialize_element(t)?;
                }
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for Assignment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct AssignmentVisitor;

        impl<'de> Visitor<'de> for AssignmentVisitor {
            type Value = Assignment;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a value token, \"absent\", or an array of value tokens")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Assignment, E> {
                if v == ABSENT {
                    Ok(Assignment::absent())
                } else {
                    Ok(Assignment::token(v))
                }
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Assignment, A::Error> {
                let mut tokens = BTreeSet::new();
                while let Some(t) = seq.next_element::<String>()? {
                    tokens.insert(t);
                }
                Ok(Assignment(tokens))
            }
        }

        deserializer.deserialize_any(AssignmentVisitor)
    }
}

/// Joint assignment to the history nodes, keyed by attribute id.
pub type HistoryContext = BTreeMap<String, Assignment>;

/// Distribution over the outcomes of one attribute node.
pub type OutcomeRow = BTreeMap<Assignment, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorEntry {
    pub attribute: String,
    pub assignment: Assignment,
    pub p: f64,
}

/// `p(disease = true | history_assignment)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiseaseGivenHistoryEntry {
    pub disease: String,
    pub history_assignment: HistoryContext,
    pub p: f64,
}

/// `p(attribute = assignment | disease = disease_state)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingEntry {
    pub attribute: String,
    pub assignment: Assignment,
    pub disease: String,
    pub disease_state: bool,
    pub p: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct CptDocument {
    #[serde(default)]
    priors: Vec<PriorEntry>,
    #[serde(default)]
    disease_given_history: Vec<DiseaseGivenHistoryEntry>,
    #[serde(default)]
    finding_given_disease: Vec<FindingEntry>,
}

/// Conditional probability tables for the conflict-resolution network.
///
/// Entries keep their document order; lookups go through indices built once
/// at construction. When an entry is duplicated the last one wins in the
/// index, and validation reports the duplicate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "CptDocument", into = "CptDocument")]
pub struct ConditionalTables {
    priors: Vec<PriorEntry>,
    disease_given_history: Vec<DiseaseGivenHistoryEntry>,
    finding_given_disease: Vec<FindingEntry>,
    prior_index: BTreeMap<String, OutcomeRow>,
    disease_index: BTreeMap<String, BTreeMap<HistoryContext, f64>>,
    finding_index: BTreeMap<(String, String, bool), OutcomeRow>,
}

impl From<CptDocument> for ConditionalTables {
    fn from(doc: CptDocument) -> Self {
        ConditionalTables::new(doc.priors, doc.disease_given_history, doc.finding_given_disease)
    }
}

impl From<ConditionalTables> for CptDocument {
    fn from(t: ConditionalTables) -> Self {
        CptDocument {
            priors: t.priors,
            disease_given_history: t.disease_given_history,
            finding_given_disease: t.finding_given_disease,
        }
    }
}

impl ConditionalTables {
    pub fn new(
        priors: Vec<PriorEntry>,
        disease_given_history: Vec<DiseaseGivenHistoryEntry>,
        finding_given_disease: Vec<FindingEntry>,
    ) -> Self {
        let mut prior_index: BTreeMap<String, OutcomeRow> = BTreeMap::new();
        for e in &priors {
            prior_index.entry(e.attribute.clone()).or_default().insert(e.assignment.clone(), e.p);
        }
        let mut disease_index: BTreeMap<String, BTreeMap<HistoryContext, f64>> = BTreeMap::new();
        for e in &disease_given_history {
            disease_index
                .entry(e.disease.clone())
                .or_default()
                .insert(e.history_assignment.clone(), e.p);
        }
        let mut finding_index: BTreeMap<(String, String, bool), OutcomeRow> = BTreeMap::new();
        for e in &finding_given_disease {
            finding_index
                .entry((e.attribute.clone(), e.disease.clone(), e.disease_state))
                .or_default()
                .insert(e.assignment.clone(), e.p);
        }
        ConditionalTables {
            priors,
            disease_given_history,
            finding_given_disease,
            prior_index,
            disease_index,
            finding_index,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
            && self.disease_given_history.is_empty()
            && self.finding_given_disease.is_empty()
    }

    pub fn priors(&self) -> &[PriorEntry] {
        &self.priors
    }

    pub fn disease_given_history(&self) -> &[DiseaseGivenHistoryEntry] {
        &self.disease_given_history
    }

    pub fn finding_given_disease(&self) -> &[FindingEntry] {
        &self.finding_given_disease
    }

    pub fn prior_row(&self, attribute: &str) -> Option<&OutcomeRow> {
        self.prior_index.get(attribute)
    }

    pub fn prior_rows(&self) -> impl Iterator<Item = (&str, &OutcomeRow)> {
        self.prior_index.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn disease_given(&self, disease: &str, context: &HistoryContext) -> Option<f64> {
        self.disease_index.get(disease)?.get(context).copied()
    }

    pub fn finding_row(&self, attribute: &str, disease: &str, state: bool) -> Option<&OutcomeRow> {
        self.finding_index.get(&(attribute.to_string(), disease.to_string(), state))
    }

    pub fn finding_rows(&self) -> impl Iterator<Item = ((&str, &str, bool), &OutcomeRow)> {
        self.finding_index
            .iter()
            .map(|((a, d, s), row)| ((a.as_str(), d.as_str(), *s), row))
    }

    /// Copy with every prior probability multiplied by `factor`.
    pub fn with_scaled_priors(&self, factor: f64) -> Self {
        let priors = self
            .priors
            .iter()
            .map(|e| PriorEntry { p: e.p * factor, ..e.clone() })
            .collect();
        ConditionalTables::new(
            priors,
            self.disease_given_history.clone(),
            self.finding_given_disease.clone(),
        )
    }
}
