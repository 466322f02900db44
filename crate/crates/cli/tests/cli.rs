use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn stopout(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stopout"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .canonicalize()
        .unwrap()
}

/// Files below `root`, relative to it.
fn tree(root: &Path) -> BTreeSet<String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeSet<String>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string());
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(root, root, &mut out);
    out
}

fn manifest_files(manifest: &str) -> BTreeSet<String> {
    manifest
        .split("[files]\n")
        .nth(1)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split('\t').next().unwrap().to_owned())
        .collect()
}

fn fixture_config(dir: &Path) -> PathBuf {
    let cfg = dir.join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "seed = 3\nevents = {}\ncalendar = {}\noutput_dir = out\n",
            fixture("events.tsv").display(),
            fixture("calendar.tsv").display()
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn heatmap_before_train_eval_names_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = stopout(dir.path(), &["heatmap", "--set", "output_dir=out"]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("cells.tsv") && err.contains("train-eval"), "{err}");
}

#[test]
fn stochastic_stage_without_seed_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = stopout(dir.path(), &["synth"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("seed"));
}

#[test]
fn unknown_config_key_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "seed = 1\nlearning_rate = 3\n").unwrap();
    let o = stopout(dir.path(), &["run-all", "--config", "bad.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("learning_rate"));
}

#[test]
fn bad_event_file_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("events.tsv"), "not\ta\theader\n").unwrap();
    let cal = fixture("calendar.tsv");
    let o = stopout(
        dir.path(),
        &[
            "ingest",
            "--set",
            "events=events.tsv",
            "--set",
            &format!("calendar={}", cal.display()),
        ],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn defaults_round_trip_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = stopout(dir.path(), &["--defaults"]);
    assert_eq!(code(&o), 0);
    fs::write(dir.path().join("d.cfg"), &o.stdout).unwrap();
    // The printed defaults parse; the run then stops at the missing seed.
    let o = stopout(dir.path(), &["train-eval", "--config", "d.cfg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));
}

#[test]
fn fixture_run_all_lists_every_cell_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    let o = stopout(dir.path(), &["run-all", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = fs::read_to_string(dir.path().join("out/manifest.tsv")).unwrap();
    assert!(manifest.contains("cells_attempted\t364\n"), "{manifest}");
    assert!(manifest.contains("num_weeks\t14\n"));
    let cells = manifest.split("[cells]\n").nth(1).unwrap().split("\n\n").next().unwrap();
    assert_eq!(cells.lines().count(), 1 + 364);

    let mut on_disk = tree(&dir.path().join("out"));
    assert!(on_disk.remove("manifest.tsv"));
    assert_eq!(manifest_files(&manifest), on_disk);
}

#[test]
fn single_degenerate_cell_exits_with_modeling_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    for stage in ["ingest", "featurize", "cohorts"] {
        let o = stopout(dir.path(), &[stage, "--config", cfg]);
        assert_eq!(code(&o), 0, "{stage}: {}", stderr(&o));
    }
    let one = "lag=1,lead=1,cohort=passive_collaborator";
    let o = stopout(dir.path(), &["train-eval", "--config", cfg, "--filter", one]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let grid = fs::read_to_string(dir.path().join("out/grid/passive_collaborator.cells.tsv")).unwrap();
    assert!(grid.contains("insufficient_data"));

    // The same outcome in a multi-cell run is recorded, not an error.
    let o = stopout(dir.path(), &["train-eval", "--config", cfg, "--filter", "lag=1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn synth_then_run_all_completes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "seed = 11\n\
         events = synth/events.tsv\n\
         calendar = synth/calendar.tsv\n\
         output_dir = out\n\
         write_problem_matrices = true\n\
         synth.num_learners = 150\n\
         synth.num_weeks = 6\n\
         importance.subsamples = 10\n\
         importance.filter = lag=1\n",
    )
    .unwrap();
    let o = stopout(dir.path(), &["synth", "--config", "run.cfg"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for f in ["events.tsv", "calendar.tsv", "ground_truth.tsv"] {
        assert!(dir.path().join("synth").join(f).is_file(), "{f}");
    }
    let o = stopout(dir.path(), &["run-all", "--config", "run.cfg", "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let out = dir.path().join("out");
    let files = tree(&out);
    for f in [
        "dataset.tsv",
        "calendar.tsv",
        "ingest_report.tsv",
        "features.tsv",
        "stopout.tsv",
        "stopout_histogram.tsv",
        "cohorts.tsv",
        "grid/passive_collaborator.cells.tsv",
        "heatmap/passive_collaborator.test_auc.tsv",
        "heatmap/passive_collaborator.test_auc.svg",
        "heatmap/passive_collaborator.cv_auc.tsv",
        "heatmap/passive_collaborator.cv_auc.svg",
        "importance.tsv",
        "importance/passive_collaborator.svg",
        "problems/passive_collaborator/lag1_week2.tsv",
        "manifest.tsv",
    ] {
        assert!(files.contains(f), "missing {f}");
    }
    let manifest = fs::read_to_string(out.join("manifest.tsv")).unwrap();
    assert!(manifest.contains("cells_attempted\t60\n"), "{manifest}");
    let mut expected = files.clone();
    expected.remove("manifest.tsv");
    assert_eq!(manifest_files(&manifest), expected);
}

#[test]
fn stages_resume_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    for stage in ["ingest", "featurize", "cohorts", "build", "train-eval", "heatmap", "importance"] {
        let o = stopout(dir.path(), &[stage, "--config", cfg]);
        assert_eq!(code(&o), 0, "{stage}: {}", stderr(&o));
    }
    let matrix = fs::read_to_string(dir.path().join("out/heatmap/passive_collaborator.test_auc.tsv")).unwrap();
    assert_eq!(matrix.lines().count(), 14);
}
