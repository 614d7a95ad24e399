//! Command implementations. Each returns an [`Output`] instead of printing,
//! so the binary and the tests drive exactly the same code.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use framedx_core::engine::ConflictStatus;
use framedx_core::evaluation::{
    build_contingency, chi_square, expected_frequencies, homogeneity_verdict, observed_chances,
    prf_metrics, standard_deviation, AgeBands, ChiSquare, ContingencyTable, ExpectedTable,
    OutcomePair, PrfReport, SdMode, ACCEPTANCE_LEVEL,
};
use framedx_core::inference::PatientInput;
use framedx_core::kb::{parse_kb_unchecked, validate_kb_with, KbError, ValidateOptions};
use framedx_core::{diagnose, load_kb, DiagnosisOptions, DiagnosisReport, KnowledgeBase};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::store::read_records;

pub const DEFAULT_CRITICALS: [f64; 2] = [14.845, 21.026];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output { code: 0, stdout, stderr: String::new() }
    }

    fn fail(code: i32, stderr: String) -> Self {
        Output { code, stdout: String::new(), stderr }
    }
}

fn read(path: &Path) -> Result<String, Output> {
    fs::read_to_string(path).map_err(|e| Output::fail(2, format!("error: {}: {e}\n", path.display())))
}

/// Loads a KB for commands that need a usable one. Exit 2 on I/O, 1 on
/// anything wrong with the document.
pub fn load_kb_file(path: &Path) -> Result<KnowledgeBase, Output> {
    let text = read(path)?;
    load_kb(&text).map_err(|e| Output::fail(1, format!("error: {}: {e}\n", path.display())))
}

/// `kb validate`: exit 0 when clean, 1 on violations or an unreadable
/// document, 2 when the file cannot be read.
pub fn kb_validate(path: &Path, strict: bool, as_json: bool) -> Output {
    let text = match read(path) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let kb = match parse_kb_unchecked(&text) {
        Ok(kb) => kb,
        Err(e @ (KbError::Parse(_) | KbError::Schema(_))) => {
            return Output::fail(1, format!("error: {}: {e}\n", path.display()));
        }
        Err(e) => return Output::fail(1, format!("error: {e}\n")),
    };
    let report = validate_kb_with(&kb, ValidateOptions { strict });
    let code = if report.is_clean() { 0 } else { 1 };
    let stdout = if as_json {
        let mut s = serde_json::to_string(&report).expect("report serializes");
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        for v in &report.violations {
            let _ = writeln!(s, "violation: {v}");
        }
        for w in &report.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        let _ = writeln!(
            s,
            "{}: {} disease(s), {} attribute(s), {} violation(s), {} warning(s)",
            path.display(),
            kb.diseases.len(),
            kb.catalog.len(),
            report.violations.len(),
            report.warnings.len()
        );
        s
    };
    Output { code, stdout, stderr: String::new() }
}

fn diagnose_file(kb: &KnowledgeBase, path: &Path, options: DiagnosisOptions) -> Result<DiagnosisReport, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let patient = PatientInput::from_json(&text).map_err(|e| e.to_string())?;
    diagnose(kb, &patient, options).map_err(|e| e.to_string())
}

/// Case files of a batch directory, sorted by file name.
fn case_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// `diagnose`: one case file, or every `*.json` in a directory. Batch mode
/// keeps going past failing cases and exits 1 if any failed.
pub fn diagnose_cases(kb_path: &Path, case_path: &Path, epsilon: f64, as_json: bool) -> Output {
    let kb = match load_kb_file(kb_path) {
        Ok(kb) => kb,
        Err(o) => return o,
    };
    let options = DiagnosisOptions { epsilon };

    if !case_path.is_dir() {
        return match diagnose_file(&kb, case_path, options) {
            Ok(report) if as_json => Output::ok(report.to_json() + "\n"),
            Ok(report) => Output::ok(render_report(&report)),
            Err(e) => Output::fail(1, format!("error: {}: {e}\n", case_path.display())),
        };
    }

    let files = match case_files(case_path) {
        Ok(f) => f,
        Err(e) => return Output::fail(2, format!("error: {}: {e}\n", case_path.display())),
    };
    let mut out = Output::default();
    for file in files {
        let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        match diagnose_file(&kb, &file, options) {
            Ok(report) if as_json => {
                let _ = writeln!(out.stdout, r#"{{"case":{},"report":{}}}"#, json!(name), report.to_json());
            }
            Ok(report) => {
                let _ = writeln!(out.stdout, "== {name}");
                out.stdout.push_str(&render_report(&report));
            }
            Err(e) => {
                out.code = 1;
                if as_json {
                    let _ = writeln!(out.stdout, "{}", json!({ "case": name, "error": e }));
                }
                let _ = writeln!(out.stderr, "error: {name}: {e}");
            }
        }
    }
    out
}

pub fn render_report(report: &DiagnosisReport) -> String {
    let mut s = String::new();
    let phases: Vec<&str> = report.phases_performed.iter().map(|p| p.as_str()).collect();
    let _ = writeln!(
        s,
        "patient {}  phases: {}  divisor {}",
        report.patient_id,
        phases.join(", "),
        report.divisor_used
    );
    let _ = write!(s, "{:>3}  {:<12} {:>8}", "#", "disease", "chance");
    for p in &phases {
        let _ = write!(s, "  {p:<12}");
    }
    s.push('\n');
    for (i, e) in report.differential.iter().enumerate() {
        let _ = write!(s, "{:>3}  {:<12} {:>8.4}", i + 1, e.disease, e.chance);
        for p in &report.phases_performed {
            let class = serde_json::to_value(e.match_class_per_phase[p]).expect("class serializes");
            let _ = write!(s, "  {:<12}", class.as_str().unwrap_or_default());
        }
        if !e.display_name.is_empty() {
            let _ = write!(s, "  {}", e.display_name);
        }
        s.push('\n');
    }
    for c in &report.conflicts {
        let group = c.group.join(", ");
        match c.status {
            ConflictStatus::Resolved => {
                let joints: Vec<String> = c.joints.iter().map(|(d, j)| format!("{d}={j:.4}")).collect();
                let _ = writeln!(
                    s,
                    "conflict {{{group}}} resolved: {} (joint {}){}",
                    c.order.join(" > "),
                    joints.join(", "),
                    if c.tie { " [tie]" } else { "" }
                );
            }
            ConflictStatus::Unresolved => {
                let _ = writeln!(s, "conflict {{{group}}} unresolved: {}", c.reason.as_deref().unwrap_or(""));
            }
        }
    }
    for w in &report.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// Disease × age-band tables: expert diagnoses and software predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesInput {
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub expert: Vec<Vec<u64>>,
    pub software: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tables {
    pub expert: ContingencyTable,
    pub software: ContingencyTable,
    pub expected: ExpectedTable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub critical: f64,
    pub homogeneous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub df: usize,
    pub homogeneous_at: Vec<Verdict>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SdReport {
    pub mu: f64,
    pub n: usize,
    pub outer: f64,
    pub population: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvaluationReport {
    pub pairs: usize,
    pub sd: SdReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_square: Option<ChiSquareReport>,
    pub metrics: PrfReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tables: Option<Tables>,
    pub warnings: Vec<String>,
}

/// Reads outcome pairs, one per line; malformed or invalid lines become
/// warnings.
pub fn read_pairs(text: &str) -> (Vec<OutcomePair>, Vec<String>) {
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<OutcomePair>(line)
            .map_err(|e| e.to_string())
            .and_then(|p| p.validate().map(|_| p).map_err(|e| e.to_string()));
        match parsed {
            Ok(p) => pairs.push(p),
            Err(e) => warnings.push(format!("line {}: skipped: {e}", i + 1)),
        }
    }
    (pairs, warnings)
}

fn tables_from_input(input: TablesInput) -> Result<(ContingencyTable, ContingencyTable), String> {
    let expert = ContingencyTable::new(input.row_labels.clone(), input.column_labels.clone(), input.expert)
        .map_err(|e| e.to_string())?;
    let software = ContingencyTable::new(input.row_labels, input.column_labels, input.software).map_err(|e| e.to_string())?;
    Ok((expert, software))
}

/// Builds both tables from the pairs that carry an age. Software counts are
/// the predictions at or above `threshold`.
fn tables_from_pairs(
    pairs: &[OutcomePair],
    threshold: f64,
    warnings: &mut Vec<String>,
) -> Result<Option<(ContingencyTable, ContingencyTable)>, String> {
    let aged: Vec<&OutcomePair> = pairs.iter().filter(|p| p.age.is_some()).collect();
    if aged.is_empty() {
        return Ok(None);
    }
    if aged.len() < pairs.len() {
        warnings.push(format!("{} pair(s) without age left out of the tables", pairs.len() - aged.len()));
    }
    let expert_cases: Vec<(f64, Vec<String>)> = aged
        .iter()
        .map(|p| (p.age.unwrap_or_default(), p.expert.iter().map(|e| e.disease.clone()).collect()))
        .collect();
    let software_cases: Vec<(f64, Vec<String>)> = aged
        .iter()
        .map(|p| {
            let ds = p.software.iter().filter(|s| s.chance >= threshold).map(|s| s.disease.clone()).collect();
            (p.age.unwrap_or_default(), ds)
        })
        .collect();
    let bands = AgeBands::default();
    let expert = build_contingency(&expert_cases, &bands, &[]).map_err(|e| e.to_string())?;
    let software = build_contingency(&software_cases, &bands, &expert.row_labels).map_err(|e| e.to_string())?;
    // software may add rows; give the expert table the same rows
    let expert = build_contingency(&expert_cases, &bands, &software.row_labels).map_err(|e| e.to_string())?;
    Ok(Some((expert, software)))
}

pub fn evaluation_report(
    pairs: &[OutcomePair],
    tables: Option<TablesInput>,
    criticals: &[f64],
    threshold: f64,
    mut warnings: Vec<String>,
) -> Result<EvaluationReport, String> {
    let metrics = prf_metrics(pairs, threshold).map_err(|e| e.to_string())?;
    let observed = observed_chances(pairs);
    let sd = SdReport {
        mu: ACCEPTANCE_LEVEL,
        n: observed.len(),
        outer: standard_deviation(&observed, ACCEPTANCE_LEVEL, SdMode::Outer).map_err(|e| e.to_string())?,
        population: standard_deviation(&observed, ACCEPTANCE_LEVEL, SdMode::Population).map_err(|e| e.to_string())?,
    };

    let counts = match tables {
        Some(input) => Some(tables_from_input(input)?),
        None => tables_from_pairs(pairs, threshold, &mut warnings)?,
    };
    let (chi, tables) = match counts {
        Some((expert, software)) => {
            let expected = expected_frequencies(&expert).map_err(|e| e.to_string())?;
            let ChiSquare { statistic, df } = chi_square(&software, &expected).map_err(|e| e.to_string())?;
            let homogeneous_at = criticals
                .iter()
                .map(|&critical| Verdict { critical, homogeneous: homogeneity_verdict(statistic, df, critical) })
                .collect();
            (Some(ChiSquareReport { statistic, df, homogeneous_at }), Some(Tables { expert, software, expected }))
        }
        None => (None, None),
    };

    Ok(EvaluationReport { pairs: pairs.len(), sd, chi_square: chi, metrics, tables, warnings })
}

/// `evaluate`: statistics over JSON-lines outcome pairs, optionally with
/// published contingency tables in place of the pairs' ages.
pub fn evaluate(pairs_path: &Path, tables_path: Option<&Path>, criticals: &[f64], threshold: f64, as_json: bool) -> Output {
    let text = match read(pairs_path) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let (pairs, warnings) = read_pairs(&text);
    let mut stderr: String = warnings.iter().map(|w| format!("warning: {w}\n")).collect();
    if pairs.is_empty() {
        stderr.push_str(&format!("error: {}: no valid outcome pairs\n", pairs_path.display()));
        return Output::fail(1, stderr);
    }
    let tables = match tables_path {
        Some(p) => {
            let text = match read(p) {
                Ok(t) => t,
                Err(o) => return o,
            };
            match serde_json::from_str::<TablesInput>(&text) {
                Ok(t) => Some(t),
                Err(e) => return Output::fail(1, format!("{stderr}error: {}: {e}\n", p.display())),
            }
        }
        None => None,
    };
    match evaluation_report(&pairs, tables, criticals, threshold, warnings) {
        Ok(report) => {
            let stdout = if as_json {
                serde_json::to_string(&report).expect("report serializes") + "\n"
            } else {
                render_evaluation(&report)
            };
            Output { code: 0, stdout, stderr }
        }
        Err(e) => Output::fail(1, format!("{stderr}error: {e}\n")),
    }
}

fn render_counts(s: &mut String, title: &str, table: &ContingencyTable) {
    let _ = writeln!(s, "{title}");
    let _ = write!(s, "{:<10}", "disease");
    for c in &table.column_labels {
        let _ = write!(s, "{c:>8}");
    }
    let _ = writeln!(s, "{:>8}", "total");
    for ((label, row), total) in table.row_labels.iter().zip(&table.counts).zip(table.row_totals()) {
        let _ = write!(s, "{label:<10}");
        for v in row {
            let _ = write!(s, "{v:>8}");
        }
        let _ = writeln!(s, "{total:>8}");
    }
    let _ = write!(s, "{:<10}", "total");
    for v in table.column_totals() {
        let _ = write!(s, "{v:>8}");
    }
    let _ = writeln!(s, "{:>8}", table.grand_total());
}

fn render_expected(s: &mut String, table: &ExpectedTable) {
    let _ = writeln!(s, "expected frequencies (expert margins)");
    let _ = write!(s, "{:<10}", "disease");
    for c in &table.column_labels {
        let _ = write!(s, "{c:>8}");
    }
    let _ = writeln!(s, "{:>8}", "total");
    for ((label, row), total) in table.row_labels.iter().zip(&table.values).zip(table.row_totals()) {
        let _ = write!(s, "{label:<10}");
        for v in row {
            let _ = write!(s, "{v:>8.2}");
        }
        let _ = writeln!(s, "{total:>8.2}");
    }
}

pub fn render_evaluation(r: &EvaluationReport) -> String {
    let mut s = String::new();
    if let Some(t) = &r.tables {
        render_counts(&mut s, "expert diagnoses by age band", &t.expert);
        s.push('\n');
        render_counts(&mut s, "software diagnoses by age band", &t.software);
        s.push('\n');
        render_expected(&mut s, &t.expected);
        s.push('\n');
    }
    if let Some(chi) = &r.chi_square {
        let verdicts: Vec<String> = chi
            .homogeneous_at
            .iter()
            .map(|v| format!("{} at {}", if v.homogeneous { "homogeneous" } else { "not homogeneous" }, v.critical))
            .collect();
        let _ = writeln!(s, "chi-square {:.4}, df {}: {}", chi.statistic, chi.df, verdicts.join(", "));
    }
    let _ = writeln!(
        s,
        "sd from {} over {} point(s): outer {:.4}, population {:.4}",
        r.sd.mu, r.sd.n, r.sd.outer, r.sd.population
    );
    let _ = writeln!(
        s,
        "recall {:.2}%  precision {:.2}%  accuracy {:.2}%  ({} patient(s))",
        r.metrics.recall * 100.0,
        r.metrics.precision * 100.0,
        r.metrics.accuracy * 100.0,
        r.pairs
    );
    for w in &r.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// `replay`: re-diagnoses every finalized case in the store and compares
/// the result with the recorded differential byte for byte.
pub fn replay(kb_path: &Path, store_dir: &Path) -> Output {
    let kb = match load_kb_file(kb_path) {
        Ok(kb) => kb,
        Err(o) => return o,
    };
    let path = store_dir.join(crate::store::STORE_FILE);
    let records = match read_records(&path) {
        Ok(r) => r,
        Err(e) => return Output::fail(2, format!("error: {e}\n")),
    };
    let mut out = Output::default();
    let mut mismatched = BTreeSet::new();
    for r in &records {
        let outcome = diagnose(&kb, &r.findings, DiagnosisOptions { epsilon: r.epsilon });
        let status = match outcome {
            Ok(report) if report.to_json() == r.report.to_json() => "match",
            Ok(_) => "differs",
            Err(_) => "error",
        };
        if status != "match" {
            mismatched.insert(r.record_id.clone());
            out.code = 1;
        }
        let _ = writeln!(out.stdout, "{} {} {}", r.record_id, r.patient_id, status);
    }
    let _ = writeln!(out.stdout, "{} record(s), {} mismatch(es)", records.len(), mismatched.len());
    out
}
