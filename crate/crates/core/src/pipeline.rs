//! File-mediated pipeline stages.
//!
//! Every stage reads the artifacts of earlier stages from the output
//! directory and writes its own, so any stage can be rerun on its own:
//!
//! | stage      | reads                          | writes                                           |
//! |------------|--------------------------------|--------------------------------------------------|
//! | ingest     | event files, calendar          | `dataset.tsv`, `calendar.tsv`, `ingest_report.tsv` |
//! | featurize  | `dataset.tsv`, `calendar.tsv`  | `features.tsv`, `stopout.tsv`, `stopout_histogram.tsv` |
//! | cohorts    | `dataset.tsv`, `calendar.tsv`  | `cohorts.tsv`                                    |
//! | build      | `features.tsv`, `cohorts.tsv`  | `problems/<cohort>/lag<L>_week<W>.tsv`           |
//! | train-eval | `features.tsv`, `cohorts.tsv`  | `grid/<cohort>.cells.tsv`                        |
//! | heatmap    | `grid/*.cells.tsv`             | `heatmap/<cohort>.{test_auc,cv_auc}.{tsv,svg}`   |
//! | importance | `features.tsv`, `cohorts.tsv`  | `importance.tsv`, `importance/<cohort>.svg`      |
//!
//! `run_all` chains them and adds `manifest.tsv`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::cohort::{Cohort, CohortTable};
use crate::config::RunConfig;
use crate::dataset::{enumerate_problems, flatten, CohortFilter};
use crate::error::{Error, Result};
use crate::eval::{render_heatmap, run_grid, CellStatus, EvaluationGrid, GridConfig, Metric};
use crate::event_store::{ingest, CourseDataset, IngestReport};
use crate::features::{build_feature_matrix, compute_stopout, FeatureMatrix, FeatureReport};
use crate::importance::{rank_features, render_importance_svg, ImportanceReport};
use crate::logistic::LogisticRegression;
use crate::synth::{generate, SynthOutput};
use crate::tsv;

/// Artifact locations under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn dataset(&self) -> PathBuf {
        self.root.join("dataset.tsv")
    }
    pub fn calendar(&self) -> PathBuf {
        self.root.join("calendar.tsv")
    }
    pub fn ingest_report(&self) -> PathBuf {
        self.root.join("ingest_report.tsv")
    }
    pub fn features(&self) -> PathBuf {
        self.root.join("features.tsv")
    }
    pub fn stopout(&self) -> PathBuf {
        self.root.join("stopout.tsv")
    }
    pub fn histogram(&self) -> PathBuf {
        self.root.join("stopout_histogram.tsv")
    }
    pub fn cohorts(&self) -> PathBuf {
        self.root.join("cohorts.tsv")
    }
    pub fn problem(&self, cohort: Cohort, spec: crate::dataset::ProblemSpec) -> PathBuf {
        self.root.join("problems").join(cohort.as_str()).join(format!("{spec}.tsv"))
    }
    pub fn grid(&self, cohort: Cohort) -> PathBuf {
        self.root.join("grid").join(format!("{cohort}.cells.tsv"))
    }
    pub fn heatmap(&self, cohort: Cohort, metric: Metric, ext: &str) -> PathBuf {
        self.root.join("heatmap").join(format!("{cohort}.{}.{ext}", metric.file_stem()))
    }
    pub fn importance(&self) -> PathBuf {
        self.root.join("importance.tsv")
    }
    pub fn importance_svg(&self, cohort: Cohort) -> PathBuf {
        self.root.join("importance").join(format!("{cohort}.svg"))
    }
    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.tsv")
    }
}

fn require(path: PathBuf, stage: &'static str) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingArtifact { path, stage })
    }
}

/// Collects the files a run writes, in write order.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        tsv::write_file(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

fn load_dataset(layout: &Layout) -> Result<CourseDataset> {
    let dataset = require(layout.dataset(), "ingest")?;
    let calendar = require(layout.calendar(), "ingest")?;
    ingest(&[dataset], &calendar)
}

pub fn ingest_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<IngestReport> {
    let calendar = cfg
        .calendar
        .as_ref()
        .ok_or_else(|| Error::Config("`calendar` is not set".into()))?;
    if cfg.events.is_empty() {
        return Err(Error::Config("`events` lists no files".into()));
    }
    for p in cfg.events.iter().chain([calendar]) {
        if !p.is_file() {
            return Err(Error::Config(format!("input file {} does not exist", p.display())));
        }
    }
    let dataset = ingest(&cfg.events, calendar)?;
    let layout = Layout::new(&cfg.output_dir);
    out.write(layout.dataset(), &dataset.dump())?;
    out.write(layout.calendar(), &dataset.calendar.to_tsv())?;
    out.write(layout.ingest_report(), &dataset.report.to_tsv())?;
    Ok(dataset.report.clone())
}

pub fn featurize_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<FeatureReport> {
    let layout = Layout::new(&cfg.output_dir);
    let dataset = load_dataset(&layout)?;
    let report = build_feature_matrix(&dataset);
    out.write(layout.features(), &report.matrix.to_tsv())?;
    out.write(layout.stopout(), &report.profiles_tsv(&dataset))?;
    out.write(layout.histogram(), &report.histogram_tsv())?;
    Ok(report)
}

pub fn cohorts_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<CohortTable> {
    let layout = Layout::new(&cfg.output_dir);
    let dataset = load_dataset(&layout)?;
    let profiles: Vec<_> = dataset
        .learner_indices()
        .map(|l| compute_stopout(l, dataset.submissions_of(l), &dataset.calendar))
        .collect();
    let table = CohortTable::from_profiles(&dataset, &profiles);
    out.write(layout.cohorts(), &table.to_tsv())?;
    Ok(table)
}

fn load_model_inputs(layout: &Layout) -> Result<(FeatureMatrix, CohortTable)> {
    let features = FeatureMatrix::load(&require(layout.features(), "featurize")?)?;
    let cohorts = CohortTable::load(&require(layout.cohorts(), "cohorts")?)?;
    Ok((features, cohorts))
}

fn grid_weeks(cfg: &RunConfig, features: &FeatureMatrix) -> Result<u32> {
    match cfg.num_weeks {
        None => Ok(features.num_weeks),
        Some(n) if n >= 2 && n <= features.num_weeks => Ok(n),
        Some(n) => Err(Error::Config(format!(
            "num_weeks {n} must lie in 2..={} (the calendar's length)",
            features.num_weeks
        ))),
    }
}

/// Writes the design matrix of every selected (cohort, problem) pair that
/// has at least one eligible learner. Returns the number written.
pub fn build_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<usize> {
    let layout = Layout::new(&cfg.output_dir);
    let (features, cohorts) = load_model_inputs(&layout)?;
    let n = grid_weeks(cfg, &features)?;
    let mut written = 0;
    for cohort in Cohort::ALL {
        for spec in enumerate_problems(n) {
            if !cfg.filter.matches(spec, cohort) {
                continue;
            }
            match flatten(&features, spec, Some(CohortFilter { table: &cohorts, cohort })) {
                Ok(dm) => {
                    out.write(layout.problem(cohort, spec), &dm.to_tsv())?;
                    written += 1;
                }
                Err(Error::InsufficientData(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(written)
}

fn classifier(cfg: &RunConfig) -> LogisticRegression {
    LogisticRegression {
        config: cfg.model.clone(),
    }
}

pub fn grid_config(cfg: &RunConfig, seed: u64) -> GridConfig {
    GridConfig {
        split_ratio: cfg.split_ratio,
        seed,
        cv_k: cfg.cv_k,
        min_rows: cfg.min_cell_rows,
        shuffle_labels: false,
    }
}

pub fn train_eval_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<Vec<EvaluationGrid>> {
    let seed = cfg.require_seed("train-eval")?;
    let layout = Layout::new(&cfg.output_dir);
    let (features, cohorts) = load_model_inputs(&layout)?;
    let n = grid_weeks(cfg, &features)?;
    let grids = run_grid(
        &features,
        &cohorts,
        &Cohort::ALL,
        n,
        &classifier(cfg),
        &grid_config(cfg, seed),
        &cfg.filter,
    );
    for g in &grids {
        out.write(layout.grid(g.cohort), &g.to_tsv())?;
    }
    Ok(grids)
}

pub fn heatmap_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<Vec<EvaluationGrid>> {
    let layout = Layout::new(&cfg.output_dir);
    let mut grids = Vec::new();
    for cohort in Cohort::ALL {
        let grid = EvaluationGrid::load(&require(layout.grid(cohort), "train-eval")?)?;
        for metric in [Metric::Test, Metric::Cv] {
            let files = render_heatmap(&grid, metric);
            out.write(layout.heatmap(cohort, metric, "tsv"), &files.matrix_tsv)?;
            out.write(layout.heatmap(cohort, metric, "svg"), &files.svg)?;
        }
        grids.push(grid);
    }
    Ok(grids)
}

pub fn importance_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<ImportanceReport> {
    let seed = cfg.require_seed("importance")?;
    let layout = Layout::new(&cfg.output_dir);
    let (features, cohorts) = load_model_inputs(&layout)?;
    let n = grid_weeks(cfg, &features)?;
    let mut report = ImportanceReport {
        config: cfg.importance.clone(),
        cohorts: Vec::new(),
    };
    for cohort in Cohort::ALL {
        let problems: Vec<_> = enumerate_problems(n)
            .into_iter()
            .filter(|p| cfg.filter.matches(*p, cohort) && cfg.importance_filter.matches(*p, cohort))
            .collect();
        let c = rank_features(&features, &cohorts, cohort, &problems, &cfg.importance, seed)?;
        if c.status == CellStatus::Ok {
            out.write(layout.importance_svg(cohort), &render_importance_svg(&c))?;
        }
        report.cohorts.push(c);
    }
    out.write(layout.importance(), &report.to_tsv())?;
    Ok(report)
}

/// Generates a synthetic course into `cfg.synth_output_dir`, seeded by the
/// master seed.
pub fn synth_stage(cfg: &RunConfig, out: &mut Outputs) -> Result<SynthOutput> {
    let seed = cfg.require_seed("synth")?;
    let mut sc = cfg.synth.clone();
    sc.seed = seed;
    let generated = generate(&sc)?;
    let dir = &cfg.synth_output_dir;
    out.write(dir.join("events.tsv"), &generated.events)?;
    out.write(dir.join("calendar.tsv"), &generated.calendar.to_tsv())?;
    out.write(dir.join("ground_truth.tsv"), &generated.ground_truth_tsv())?;
    Ok(generated)
}

#[derive(Debug)]
pub struct RunSummary {
    pub grids: Vec<EvaluationGrid>,
    pub importance: ImportanceReport,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn cells(&self) -> impl Iterator<Item = &crate::eval::CellResult> {
        self.grids.iter().flat_map(|g| &g.cells)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn relative(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).display().to_string()
}

/// Manifest of a completed run. It holds no timestamps or absolute output
/// paths, so identical runs produce identical manifests.
pub fn manifest_text(cfg: &RunConfig, summary: &RunSummary, cohorts: &CohortTable) -> Result<String> {
    let root = &cfg.output_dir;
    let mut s = String::from("key\tvalue\n");
    let canonical = cfg.canonical_text();
    let _ = writeln!(s, "version\t{}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "config_sha256\t{}", sha256_hex(canonical.as_bytes()));
    let _ = writeln!(s, "seed\t{}", cfg.seed.map(|v| v.to_string()).unwrap_or_default());
    let _ = writeln!(s, "seed_rule\tsplitmix64 over (seed, cohort, lag, lead, stage)");
    let num_weeks = summary.grids.first().map_or(0, |g| g.num_weeks);
    let _ = writeln!(s, "num_weeks\t{num_weeks}");
    let sizes = cohorts.sizes();
    for c in Cohort::ALL {
        let _ = writeln!(s, "cohort_size.{c}\t{}", sizes[c.index()]);
    }
    let mut counts = [0usize; 3];
    for c in summary.cells() {
        counts[c.status as usize] += 1;
    }
    let _ = writeln!(s, "cells_attempted\t{}", counts.iter().sum::<usize>());
    for (status, n) in [CellStatus::Ok, CellStatus::InsufficientData, CellStatus::DegenerateLabels]
        .iter()
        .zip(counts)
    {
        let _ = writeln!(s, "cells_{status}\t{n}");
    }
    for c in &summary.importance.cohorts {
        let _ = writeln!(s, "importance.{}\t{} ({} problems)", c.cohort, c.status, c.problems_used);
    }

    s.push_str("\n[cells]\ncohort\tlag\tpredicted_week\tstatus\n");
    for c in summary.cells() {
        let _ = writeln!(s, "{}\t{}\t{}\t{}", c.cohort, c.spec.lag, c.spec.predicted_week(), c.status);
    }

    s.push_str("\n[files]\npath\tsha256\tbytes\n");
    let mut files: Vec<&PathBuf> = summary.files.iter().collect();
    files.sort_by_key(|p| relative(root, p));
    for p in files {
        let bytes = std::fs::read(p).map_err(|e| Error::io(p, e))?;
        let _ = writeln!(s, "{}\t{}\t{}", relative(root, p), sha256_hex(&bytes), bytes.len());
    }
    Ok(s)
}

/// Runs every stage in order and writes the manifest.
pub fn run_all(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    cfg.require_seed("run-all")?;
    let mut out = Outputs::default();
    ingest_stage(cfg, &mut out)?;
    featurize_stage(cfg, &mut out)?;
    let cohorts = cohorts_stage(cfg, &mut out)?;
    if cfg.write_problem_matrices {
        build_stage(cfg, &mut out)?;
    }
    train_eval_stage(cfg, &mut out)?;
    let grids = heatmap_stage(cfg, &mut out)?;
    let importance = importance_stage(cfg, &mut out)?;
    let mut summary = RunSummary {
        grids,
        importance,
        files: out.files,
    };
    let manifest = manifest_text(cfg, &summary, &cohorts)?;
    let path = Layout::new(&cfg.output_dir).manifest();
    tsv::write_file(&path, &manifest)?;
    summary.files.push(path);
    Ok(summary)
}
