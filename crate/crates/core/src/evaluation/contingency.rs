use serde::{Deserialize, Serialize};

use super::EvalError;

/// Disease × age-band counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(
        row_labels: Vec<String>,
        column_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self, EvalError> {
        if counts.len() != row_labels.len() || counts.iter().any(|r| r.len() != column_labels.len()) {
            return Err(EvalError::ShapeMismatch(format!(
                "{} row labels × {} column labels vs {} rows",
                row_labels.len(),
                column_labels.len(),
                counts.len()
            )));
        }
        Ok(ContingencyTable { row_labels, column_labels, counts })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_labels.len(), self.column_labels.len())
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_totals(&self) -> Vec<u64> {
        (0..self.column_labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedTable {
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl ExpectedTable {
    pub fn row_totals(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_totals(&self) -> Vec<f64> {
        (0..self.column_labels.len())
            .map(|j| self.values.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// `e_ij = row_total_i × column_total_j / N`.
pub fn expected_frequencies(table: &ContingencyTable) -> Result<ExpectedTable, EvalError> {
    let n = table.grand_total();
    if n == 0 {
        return Err(EvalError::ZeroTotal);
    }
    let rows = table.row_totals();
    let cols = table.column_totals();
    let values = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| (r * c) as f64 / n as f64).collect())
        .collect();
    Ok(ExpectedTable {
        row_labels: table.row_labels.clone(),
        column_labels: table.column_labels.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
}

/// Pearson statistic `Σ (o - e)² / e` over cells with `e > 0`. Degrees of
/// freedom come from the full table shape, zero-expected cells included.
pub fn chi_square(observed: &ContingencyTable, expected: &ExpectedTable) -> Result<ChiSquare, EvalError> {
    let (rows, cols) = observed.shape();
    if expected.values.len() != rows || expected.values.iter().any(|r| r.len() != cols) {
        return Err(EvalError::ShapeMismatch(format!(
            "observed is {rows}×{cols}, expected is {}×{}",
            expected.values.len(),
            expected.values.first().map_or(0, Vec::len)
        )));
    }
    let statistic = observed
        .counts
        .iter()
        .flatten()
        .zip(expected.values.iter().flatten())
        .filter(|(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    Ok(ChiSquare { statistic, df: rows.saturating_sub(1) * cols.saturating_sub(1) })
}

/// Homogeneous when the statistic does not exceed the critical value
/// supplied for `df` degrees of freedom.
pub fn homogeneity_verdict(statistic: f64, _df: usize, critical: f64) -> bool {
    statistic <= critical
}

/// Age bands split at strictly increasing edges: `[< e0, e0–e1, …, > e_last]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeBands {
    edges: Vec<f64>,
}

impl AgeBands {
    pub fn new(edges: Vec<f64>) -> Result<Self, EvalError> {
        if edges.windows(2).any(|w| w[0] >= w[1]) || edges.iter().any(|e| !e.is_finite()) {
            return Err(EvalError::BadBandEdges);
        }
        Ok(AgeBands { edges })
    }

    pub fn labels(&self) -> Vec<String> {
        let Some((first, last)) = self.edges.first().zip(self.edges.last()) else {
            return vec!["all".into()];
        };
        let mut labels = vec![format!("<{first}")];
        labels.extend(self.edges.windows(2).map(|w| format!("{}-{}", w[0], w[1])));
        labels.push(format!(">{last}"));
        labels
    }

    pub fn band_of(&self, age: f64) -> usize {
        self.edges.iter().take_while(|&&e| age >= e).count()
    }

    pub fn len(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for AgeBands {
    fn default() -> Self {
        AgeBands { edges: vec![20.0, 40.0, 60.0] }
    }
}

/// Counts one per (patient, disease) pair. Rows follow `row_order`; diseases
/// not named there are appended in sorted order.
pub fn build_contingency(
    cases: &[(f64, Vec<String>)],
    bands: &AgeBands,
    row_order: &[String],
) -> Result<ContingencyTable, EvalError> {
    if cases.is_empty() {
        return Err(EvalError::Empty);
    }
    if let Some(&(age, _)) = cases.iter().find(|(age, _)| age.is_nan() || *age < 0.0) {
        return Err(EvalError::NegativeAge(age));
    }
    let mut rows: Vec<String> = row_order.to_vec();
    let mut extra: Vec<&String> = cases
        .iter()
        .flat_map(|(_, ds)| ds.iter())
        .filter(|d| !rows.contains(d))
        .collect();
    extra.sort();
    extra.dedup();
    rows.extend(extra.into_iter().cloned());

    let mut counts = vec![vec![0u64; bands.len()]; rows.len()];
    for (age, diseases) in cases {
        let band = bands.band_of(*age);
        for d in diseases {
            let row = rows.iter().position(|r| r == d).expect("row collected above");
            counts[row][band] += 1;
        }
    }
    ContingencyTable::new(rows, bands.labels(), counts)
}
