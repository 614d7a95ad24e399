//! Acceptance suite: one PASS/FAIL line per criterion, then a single
//! assertion that all of them passed. Run with `--nocapture` to see the
//! lines.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use framedx_core::bayes::{
    brute_force_joint, brute_force_joint_clamped, construct_bn, enumerate_assignments, evidence_from_patient,
    joint_probability, BayesianNetwork, FullAssignment, NodeValue,
};
use framedx_core::engine::ConflictStatus;
use framedx_core::evaluation::{
    chi_square, expected_frequencies, harmonic_accuracy, homogeneity_verdict, prf_metrics, ContingencyTable,
    OutcomePair,
};
use framedx_core::inference::{
    match_phase, match_strength, provisional_diagnosis, PatientInput, PhaseDiseaseList, PhaseScore,
};
use framedx_core::{diagnose, DiagnosisOptions, Phase};
use framedx_service::cli::{diagnose_cases, replay, TablesInput};
use framedx_service::session::SessionManager;
use framedx_service::store::CaseStore;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn match_strength_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut compared = 0usize;
    for k in 0..500 {
        let kb = random_kb(&mut rng, 5, 6, 4);
        let patient = random_patient(&mut rng, &kb, &format!("p{k}"));
        for phase in Phase::ALL {
            let list = match_strength(&match_phase(&patient, &kb, phase).map_err(|e| e.to_string())?, &kb).list;
            let got: BTreeMap<String, Ratio<u64>> =
                list.entries.iter().map(|e| (e.disease_id.clone(), e.strength)).collect();
            let want = brute_force_strengths(&kb, &patient, phase);
            ensure!(got == want, "kb #{k} {phase}: engine {got:?} vs oracle {want:?}");
            compared += got.len();
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("500 KBs, {compared} scores equal, {:.2}s", elapsed.as_secs_f64()))
}

fn history_strength(findings: &[(&str, &str)]) -> Result<Option<Ratio<u64>>, String> {
    let kb = sija_kb();
    let patient = PatientInput::new("eq1")
        .with_phase(Phase::History, findings.iter().map(|(a, t)| (a.to_string(), vec![t.to_string()])));
    let m = match_phase(&patient, &kb, Phase::History).map_err(|e| e.to_string())?;
    Ok(match_strength(&m, &kb).list.get("d1"))
}

fn worked_fixture() -> Outcome {
    let partial = history_strength(&[
        ("site_of_pain", "buttock"),
        ("worsening_factor", "supine_position"),
        ("bowel_bladder_habit", "normal"),
    ])?;
    ensure!(partial == Some(Ratio::new(12, 16)), "partial patient: {partial:?}");
    let full = history_strength(&[
        ("site_of_pain", "buttock"),
        ("worsening_factor", "lying_on_affected_side"),
        ("bowel_bladder_habit", "normal"),
    ])?;
    ensure!(full == Some(Ratio::from_integer(1)), "full patient: {full:?}");
    let none = history_strength(&[("site_of_pain", "groin"), ("bowel_bladder_habit", "altered")])?;
    ensure!(none.is_none(), "no-match patient listed with {none:?}");
    Ok("ms 12/16, full 1, no-match absent".into())
}

fn fuse(scores: &[(Phase, Ratio<u64>)], performed: &[Phase]) -> Result<(Ratio<u64>, u64), String> {
    let mut lists: BTreeMap<Phase, PhaseDiseaseList> =
        performed.iter().map(|&p| (p, PhaseDiseaseList::new(p, Vec::new()))).collect();
    for &(phase, strength) in scores {
        lists.get_mut(&phase).unwrap().entries.push(PhaseScore { disease_id: "d".into(), strength });
    }
    let diff = provisional_diagnosis(&lists, &performed.iter().copied().collect()).map_err(|e| e.to_string())?;
    Ok((diff.entries[0].chance, diff.divisor_used))
}

fn phase_fusion() -> Outcome {
    let all = Phase::ALL;
    let (c, div) = fuse(
        &[(Phase::History, Ratio::new(8, 10)), (Phase::Examination, Ratio::new(9, 10)), (Phase::Investigation, Ratio::from_integer(1))],
        &all,
    )?;
    ensure!(c == Ratio::new(14, 15) && div == 6, "(0.8, 0.9, 1.0) -> {c} / divisor {div}");
    let (c, div) = fuse(&[(Phase::Examination, Ratio::new(6, 10))], &[Phase::History, Phase::Examination])?;
    ensure!(c == Ratio::new(2, 5) && div == 3, "(0, 0.6) -> {c} / divisor {div}");
    let one = Ratio::from_integer(1);
    let (c, _) = fuse(&[(Phase::History, one), (Phase::Examination, one), (Phase::Investigation, one)], &all)?;
    ensure!(c == one, "all full -> {c}");
    Ok("14/15 (div 6), 2/5 (div 3), 1".into())
}

fn conflict_pipeline() -> Outcome {
    let kb = conflict_kb();
    let patient = conflict_case();
    ensure!(kb.catalog.count(Phase::History) == 5 && kb.catalog.count(Phase::Examination) == 3, "fixture shape");
    let report = diagnose(&kb, &patient, DiagnosisOptions { epsilon: 0.02 }).map_err(|e| e.to_string())?;
    ensure!(report.conflicts.len() == 1, "conflicts: {:?}", report.conflicts);
    let audit = &report.conflicts[0];
    ensure!(audit.group == ["d1", "d2"], "group {:?}", audit.group);
    ensure!(audit.status == ConflictStatus::Resolved, "group unresolved: {:?}", audit.reason);
    ensure!(report.order() == ["d2", "d1", "d3", "d4"], "order {:?}", report.order());
    let (j1, j2) = (audit.joints["d1"], audit.joints["d2"]);
    ensure!(format!("{j1:.2}") == "0.09" && format!("{j2:.2}") == "0.12", "joints {j1} / {j2}");

    // chances as fused, before any reordering
    let mut lists = BTreeMap::new();
    for phase in patient.phases_performed() {
        lists.insert(phase, match_strength(&match_phase(&patient, &kb, phase).unwrap(), &kb).list);
    }
    let fused = provisional_diagnosis(&lists, &patient.phases_performed()).unwrap();
    for e in &report.differential {
        let before = framedx_core::round4(fused.get(&e.disease).unwrap().chance_f64());
        ensure!(e.chance == before, "{} chance changed: {} vs {before}", e.disease, e.chance);
    }
    Ok(format!("group {{d1, d2}}, order d2 > d1 > d3 > d4, joints {j1:.4} / {j2:.4}"))
}

fn clamped_gap(bn: &BayesianNetwork, patient: &PatientInput) -> Result<f64, String> {
    let evidence = evidence_from_patient(patient);
    let mut worst = 0.0f64;
    for d in bn.diseases() {
        let mut a: FullAssignment = evidence.iter().map(|(k, v)| (k.clone(), NodeValue::Finding(v.clone()))).collect();
        let mut clamped = BTreeSet::new();
        for other in bn.diseases() {
            a.insert(other.to_string(), NodeValue::Disease(other == d));
            if other != d {
                clamped.insert(other.to_string());
            }
        }
        let oracle = brute_force_joint_clamped(bn, &a, &clamped).map_err(|e| e.to_string())?;
        let joint = joint_probability(bn, d, &evidence).map_err(|e| e.to_string())?;
        worst = worst.max((joint - oracle).abs());
    }
    Ok(worst)
}

fn bn_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let shapes = [(1, 2, 1), (2, 2, 2), (3, 2, 3), (2, 3, 3), (4, 2, 4), (3, 3, 4), (5, 3, 4), (4, 4, 4)];
    let mut worst_mass = 0.0f64;
    let mut worst_joint = 0.0f64;
    for (h, y, g) in shapes {
        for _ in 0..4 {
            let (kb, patient) = binary_network_kb(&mut rng, h, y, g);
            let diseases: Vec<String> = kb.disease_ids().map(str::to_string).collect();
            let bn = construct_bn(&patient, &diseases, &kb).map_err(|e| e.to_string())?;
            ensure!(bn.nodes().len() <= 12, "network of {} nodes", bn.nodes().len());
            let all = enumerate_assignments(&bn, 1 << 12).ok_or("enumeration too large")?;
            let mut total = 0.0;
            for a in &all {
                total += brute_force_joint(&bn, a).map_err(|e| e.to_string())?;
            }
            worst_mass = worst_mass.max((total - 1.0).abs());
            worst_joint = worst_joint.max(clamped_gap(&bn, &patient)?);
        }
    }
    let conflict = construct_bn(&conflict_case(), &["d1".into(), "d2".into()], &conflict_kb()).map_err(|e| e.to_string())?;
    worst_joint = worst_joint.max(clamped_gap(&conflict, &conflict_case())?);
    ensure!(worst_mass <= 1e-9, "total mass off by {worst_mass:e}");
    ensure!(worst_joint <= 1e-12, "joint vs clamped product off by {worst_joint:e}");
    Ok(format!("{} networks, |mass-1| <= {worst_mass:.1e}, |joint-oracle| <= {worst_joint:.1e}", shapes.len() * 4))
}

const PRINTED_EXPECTED: [[f64; 4]; 5] = [
    [0.0, 2.2, 7.85, 0.94],
    [0.0, 2.0, 7.14, 0.86],
    [0.0, 1.2, 4.29, 0.51],
    [0.0, 0.4, 1.43, 0.17],
    [0.0, 1.2, 4.29, 0.52],
];

fn statistics() -> Outcome {
    let t: TablesInput = serde_json::from_str(&fixture("published_tables.json")).map_err(|e| e.to_string())?;
    let expert = ContingencyTable::new(t.row_labels.clone(), t.column_labels.clone(), t.expert).map_err(|e| e.to_string())?;
    let software = ContingencyTable::new(t.row_labels, t.column_labels, t.software).map_err(|e| e.to_string())?;
    let expected = expected_frequencies(&expert).map_err(|e| e.to_string())?;
    for (i, row) in expected.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            ensure!(close(*v, PRINTED_EXPECTED[i][j], 0.01), "cell ({i},{j}) = {v}, printed {}", PRINTED_EXPECTED[i][j]);
        }
    }
    let chi = chi_square(&software, &expected).map_err(|e| e.to_string())?;
    ensure!(close(chi.statistic, 11.08, 0.5), "chi-square {}", chi.statistic);
    ensure!(chi.df == 12, "df {}", chi.df);
    for critical in [14.845, 21.026] {
        ensure!(homogeneity_verdict(chi.statistic, chi.df, critical), "not homogeneous at {critical}");
    }
    Ok(format!("table cells within 0.01, chi-square {:.4} df {}, homogeneous at 14.845 and 21.026", chi.statistic, chi.df))
}

fn prf_fixtures() -> Outcome {
    let pairs: Vec<OutcomePair> = fixture("three_expert_two_software.jsonl")
        .lines()
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let r = prf_metrics(&pairs, 0.75).map_err(|e| e.to_string())?;
    ensure!(close(r.recall * 100.0, 66.66, 0.01), "recall {}", r.recall);
    ensure!(r.precision == 1.0, "precision {}", r.precision);
    let from_means = harmonic_accuracy(0.7444, 0.7667) * 100.0;
    ensure!(close(from_means, 75.54, 0.01), "accuracy from average rates {from_means}");
    ensure!(!close(from_means, 73.89, 0.5), "average rates reproduce the per-patient figure");
    Ok(format!("recall {:.2}%, precision {:.0}%, accuracy from averages {from_means:.2}%", r.recall * 100.0, r.precision * 100.0))
}

fn write_cases(dir: &Path, n: usize) -> Vec<PatientInput> {
    let kb = conflict_kb();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    (0..n)
        .map(|k| {
            let mut patient = random_patient(&mut rng, &kb, &format!("case-{k:03}"));
            if rng.gen_bool(0.5) {
                patient.phases.remove(&Phase::Investigation);
            }
            fs::write(dir.join(format!("case-{k:03}.json")), serde_json::to_string(&patient).unwrap()).unwrap();
            patient
        })
        .collect()
}

fn determinism_and_replay() -> Outcome {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases_dir = work.path().join("cases");
    fs::create_dir(&cases_dir).map_err(|e| e.to_string())?;
    let patients = write_cases(&cases_dir, 100);
    let kb_path = std::path::PathBuf::from(fixture_path("conflict_kb.json"));

    let first = diagnose_cases(&kb_path, &cases_dir, 0.02, true);
    let second = diagnose_cases(&kb_path, &cases_dir, 0.02, true);
    ensure!(first.stdout.lines().count() == 100, "{} result lines", first.stdout.lines().count());
    ensure!(first.stdout == second.stdout, "batch outputs differ");

    let store_dir = work.path().join("store");
    let manager = SessionManager::new(
        Arc::new(conflict_kb()),
        CaseStore::open(&store_dir).map_err(|e| e.to_string())?,
        DiagnosisOptions::default(),
    );
    for patient in patients.iter().take(20) {
        let session = manager.create(patient.patient_id.clone());
        for (&phase, findings) in &patient.phases {
            manager.submit(&session.session_id, phase, findings.clone()).map_err(|e| e.to_string())?;
        }
        let record = manager.finalize(&session.session_id).map_err(|e| e.to_string())?;
        let cli = diagnose_cases(&kb_path, &cases_dir.join(format!("{}.json", patient.patient_id)), 0.02, true);
        ensure!(cli.stdout.trim_end() == record.report.to_json(), "{}: session and CLI differ", patient.patient_id);
    }
    let out = replay(&kb_path, &store_dir);
    ensure!(out.code == 0, "replay: {}", out.stdout);
    Ok("100 cases byte-identical across runs, 20 finalized sessions replay exactly".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("match-strength oracle equivalence", match_strength_oracle),
        ("worked fixture", worked_fixture),
        ("phase fusion", phase_fusion),
        ("conflict pipeline", conflict_pipeline),
        ("network exactness", bn_exactness),
        ("statistics from published tables", statistics),
        ("precision/recall/accuracy fixtures", prf_fixtures),
        ("determinism and replay", determinism_and_replay),
    ];
    println!();
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                println!("FAIL [{}] {name}: {why}", i + 1);
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
