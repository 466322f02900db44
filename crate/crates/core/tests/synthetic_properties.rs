//! Properties of generated courses once they pass through ingestion.

use std::path::Path;

use stopout::cohort::{Cohort, CohortTable};
use stopout::dataset::ProblemSpec;
use stopout::event_store::{ingest, CourseDataset};
use stopout::eval::grid::{run_cell, CellStatus, GridConfig};
use stopout::features::{build_feature_matrix, FeatureReport};
use stopout::logistic::LogisticRegression;
use stopout::synth::{generate, SynthConfig, SynthOutput};

fn ingest_generated(cfg: &SynthConfig, dir: &Path) -> (SynthOutput, CourseDataset, FeatureReport) {
    let out = generate(cfg).unwrap();
    out.write(dir).unwrap();
    let ds = ingest(&[dir.join("events.tsv")], &dir.join("calendar.tsv")).unwrap();
    let report = build_feature_matrix(&ds);
    (out, ds, report)
}

#[test]
fn round_trip_reproduces_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        num_learners: 400,
        seed: 8,
        ..SynthConfig::default()
    };
    let (out, ds, report) = ingest_generated(&cfg, dir.path());
    assert_eq!(ds.report.rejected(), 0);
    let truth: std::collections::HashMap<&str, _> =
        out.ground_truth.iter().map(|g| (g.learner_id.as_str(), g)).collect();

    // Learners with no events at all never reach the dataset.
    let mut seen = 0;
    for p in &report.profiles {
        let g = truth[ds.learner_id(p.learner)];
        assert_eq!(p.stopout_week, g.stopout_week, "{}", g.learner_id);
        assert_eq!(p.participated, g.participated, "{}", g.learner_id);
        seen += 1;
    }
    assert!(seen > 350, "{seen}");

    let table = CohortTable::build(&ds, &report);
    for g in out.ground_truth.iter().filter(|g| g.participated) {
        assert_eq!(table.get(&g.learner_id), Some(g.cohort), "{}", g.learner_id);
    }
}

#[test]
fn ingestion_dump_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        num_learners: 60,
        seed: 4,
        ..SynthConfig::default()
    };
    let (_, a, _) = ingest_generated(&cfg, dir.path());
    let b = ingest(&[dir.path().join("events.tsv")], &dir.path().join("calendar.tsv")).unwrap();
    assert_eq!(a.dump(), b.dump());
}

#[test]
fn cohort_mix_matches_config() {
    let n = 5_000;
    let cfg = SynthConfig {
        num_learners: n,
        seed: 12,
        ..SynthConfig::default()
    };
    let out = generate(&cfg).unwrap();
    for c in Cohort::ALL {
        let p = cfg.cohort_mix[c.index()];
        let got = out.ground_truth.iter().filter(|g| g.cohort == c).count() as f64;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((got - n as f64 * p).abs() <= 4.0 * sd, "{c}: {got} vs {}", n as f64 * p);
    }
}

#[test]
fn zero_slope_gives_uniform_stopout_weeks() {
    let dir = tempfile::tempdir().unwrap();
    let n = 4_200;
    let cfg = SynthConfig {
        num_learners: n,
        seed: 30,
        participation_rate: 1.0,
        hazard_shift: 0.0,
        slopes: [0.0; 3],
        ..SynthConfig::default()
    };
    let (_, _, report) = ingest_generated(&cfg, dir.path());
    assert_eq!(report.profiles.len(), n);
    // Participants stop out in weeks 2..=15, each with probability 1/14.
    let weeks = cfg.num_weeks as usize;
    let p = 1.0 / weeks as f64;
    let expected = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    for w in 2..=weeks + 1 {
        let got = report.histogram[w - 1] as f64;
        assert!((got - expected).abs() <= 4.0 * sd, "week {w}: {got} vs {expected:.1} ± {sd:.1}");
    }
    assert_eq!(report.histogram[0], 0);
}

#[test]
fn cv_auc_tracks_test_auc() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynthConfig {
        num_learners: 4_000,
        seed: 6,
        cohort_mix: [1.0, 0.0, 0.0, 0.0],
        ..SynthConfig::default()
    };
    let (_, ds, report) = ingest_generated(&cfg, dir.path());
    let table = CohortTable::build(&ds, &report);
    let grid = GridConfig {
        seed: 6,
        ..GridConfig::default()
    };
    let clf = LogisticRegression::default();
    for spec in [ProblemSpec::new(1, 1), ProblemSpec::new(2, 1), ProblemSpec::new(3, 2)] {
        let cell = run_cell(&report.matrix, &table, Cohort::PassiveCollaborator, spec, &clf, &grid);
        assert_eq!(cell.status, CellStatus::Ok, "{spec:?}: {}", cell.note);
        let (cv, test) = (cell.cv_mean_auc.unwrap(), cell.test_auc.unwrap());
        assert!((cv - test).abs() <= 0.05, "{spec:?}: cv {cv:.3}, test {test:.3}");
    }
}
