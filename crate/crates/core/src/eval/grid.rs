//! Evaluation of every (cohort, lag, predicted week) cell.
//!
//! A cell runs flatten → split → cross-validate on the training split →
//! fit on the full training split → AUC on the test split. Failures become
//! typed cell statuses; the grid itself never fails.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use rand::seq::SliceRandom;

use crate::cohort::{Cohort, CohortTable};
use crate::config::ProblemFilter;
use crate::dataset::{enumerate_problems, flatten, normalize, split, CohortFilter, ProblemSpec};
use crate::error::{Error, Result};
use crate::eval::cv::cross_validate;
use crate::eval::roc::rank_auc;
use crate::features::FeatureMatrix;
use crate::logistic::{Classifier, Scorer};
use crate::rng::{derive_seed, rng_for};
use crate::tsv::{self, fmt_f64, parse_err, parse_opt_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellStatus {
    Ok,
    InsufficientData,
    DegenerateLabels,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::InsufficientData => "insufficient_data",
            CellStatus::DegenerateLabels => "degenerate_labels",
        }
    }
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CellStatus {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ok" => Ok(CellStatus::Ok),
            "insufficient_data" => Ok(CellStatus::InsufficientData),
            "degenerate_labels" => Ok(CellStatus::DegenerateLabels),
            other => Err(format!("unknown cell status {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub split_ratio: f64,
    pub seed: u64,
    pub cv_k: usize,
    /// Cells with fewer eligible rows are marked insufficient.
    pub min_rows: usize,
    /// Control run: permute each cell's labels before splitting.
    pub shuffle_labels: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            split_ratio: 0.7,
            seed: 0,
            cv_k: 10,
            min_rows: 10,
            shuffle_labels: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub cohort: Cohort,
    pub spec: ProblemSpec,
    pub status: CellStatus,
    pub n_rows: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub cv_k: usize,
    pub cv_mean_auc: Option<f64>,
    pub test_auc: Option<f64>,
    pub ridge_used: Option<f64>,
    pub note: String,
}

impl CellResult {
    fn failed(cohort: Cohort, spec: ProblemSpec, n_rows: usize, err: &Error) -> Self {
        let status = match err {
            Error::InsufficientData(_) => CellStatus::InsufficientData,
            _ => CellStatus::DegenerateLabels,
        };
        CellResult {
            cohort,
            spec,
            status,
            n_rows,
            n_train: 0,
            n_test: 0,
            cv_k: 0,
            cv_mean_auc: None,
            test_auc: None,
            ridge_used: None,
            note: sanitize(&err.to_string()),
        }
    }
}

fn sanitize(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

pub fn run_cell<C>(
    features: &FeatureMatrix,
    cohorts: &CohortTable,
    cohort: Cohort,
    spec: ProblemSpec,
    classifier: &C,
    cfg: &GridConfig,
) -> CellResult
where
    C: Classifier,
{
    let path = [cohort.index() as u64, spec.lag as u64, spec.lead as u64];
    let filter = CohortFilter {
        table: cohorts,
        cohort,
    };
    let mut dm = match flatten(features, spec, Some(filter)) {
        Ok(dm) => dm,
        Err(e) => return CellResult::failed(cohort, spec, 0, &e),
    };
    let n_rows = dm.rows();
    let mut attempt = || -> Result<CellResult> {
        if n_rows < cfg.min_rows {
            return Err(Error::InsufficientData(format!(
                "{n_rows} eligible rows, need {}",
                cfg.min_rows
            )));
        }
        if cfg.shuffle_labels {
            let mut rng = rng_for(cfg.seed, &[path[0], path[1], path[2], 0]);
            dm.labels.shuffle(&mut rng);
        }
        let parts = split(&dm, cfg.split_ratio, derive_seed(cfg.seed, &[path[0], path[1], path[2], 1]))?;
        if parts.test.positives() == 0 || parts.test.positives() == parts.test.rows() {
            return Err(Error::DegenerateLabels("test split holds a single class".into()));
        }
        let cv = cross_validate(
            classifier,
            &parts.train.x,
            &parts.train.labels,
            cfg.cv_k,
            derive_seed(cfg.seed, &[path[0], path[1], path[2], 2]),
        )?;
        let (train, test, _) = normalize(&parts.train, &parts.test);
        let model = classifier.fit(&train.x, &train.labels)?;
        let test_auc = rank_auc(&model.score_all(&test.x)?, &test.labels)?;
        Ok(CellResult {
            cohort,
            spec,
            status: CellStatus::Ok,
            n_rows,
            n_train: train.rows(),
            n_test: test.rows(),
            cv_k: cv.k,
            cv_mean_auc: Some(cv.mean_auc),
            test_auc: Some(test_auc),
            ridge_used: model.ridge_used(),
            note: cv.warning.map(|w| sanitize(&w)).unwrap_or_default(),
        })
    };
    match attempt() {
        Ok(r) => r,
        Err(e) if e.is_degenerate() || matches!(e, Error::Numerical(_)) => {
            CellResult::failed(cohort, spec, n_rows, &e)
        }
        Err(e) => CellResult::failed(cohort, spec, n_rows, &Error::DegenerateLabels(e.to_string())),
    }
}

/// Cells of one cohort, sorted by lag then predicted week.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationGrid {
    pub cohort: Cohort,
    pub num_weeks: u32,
    pub cells: Vec<CellResult>,
}

const CELL_COLUMNS: &str = "cohort\tlag\tpredicted_week\tlead\tstatus\tn_rows\tn_train\tn_test\tcv_k\tcv_mean_auc\ttest_auc\tridge_used\tnote";

impl EvaluationGrid {
    pub fn get(&self, lag: u32, predicted_week: u32) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.spec.lag == lag && c.spec.predicted_week() == predicted_week)
    }

    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let mut out = format!("num_weeks\t{}\n{CELL_COLUMNS}\n", self.num_weeks);
        for c in &self.cells {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                c.cohort,
                c.spec.lag,
                c.spec.predicted_week(),
                c.spec.lead,
                c.status,
                c.n_rows,
                c.n_train,
                c.n_test,
                c.cv_k,
                opt(c.cv_mean_auc),
                opt(c.test_auc),
                opt(c.ridge_used),
                c.note
            ));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let lines = tsv::read_lines(path)?;
        let mut it = lines.into_iter().filter(|(_, l)| !l.is_empty());
        let num_weeks = match it.next() {
            Some((n, l)) => l
                .strip_prefix("num_weeks\t")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| parse_err(path, n, "expected num_weeks line"))?,
            None => return Err(parse_err(path, 1, "empty grid file")),
        };
        match it.next() {
            Some((_, h)) if h == CELL_COLUMNS => {}
            _ => return Err(parse_err(path, 2, "unexpected grid header")),
        }
        let mut cells = Vec::new();
        let mut cohort = None;
        for (n, line) in it {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 13 {
                return Err(parse_err(path, n, "wrong field count"));
            }
            let e = |m: String| parse_err(path, n, m);
            let int = |s: &str| s.parse::<usize>().map_err(|_| parse_err(path, n, format!("invalid integer {s:?}")));
            let c: Cohort = f[0].parse().map_err(e)?;
            if *cohort.get_or_insert(c) != c {
                return Err(parse_err(path, n, "grid file mixes cohorts"));
            }
            let lag = int(f[1])? as u32;
            let lead = int(f[3])? as u32;
            if lag == 0 || lead == 0 || int(f[2])? as u32 != lag + lead {
                return Err(parse_err(path, n, "inconsistent lag/lead/predicted_week"));
            }
            cells.push(CellResult {
                cohort: c,
                spec: ProblemSpec::new(lag, lead),
                status: f[4].parse().map_err(e)?,
                n_rows: int(f[5])?,
                n_train: int(f[6])?,
                n_test: int(f[7])?,
                cv_k: int(f[8])?,
                cv_mean_auc: parse_opt_f64(f[9]).map_err(e)?,
                test_auc: parse_opt_f64(f[10]).map_err(e)?,
                ridge_used: parse_opt_f64(f[11]).map_err(e)?,
                note: f[12].to_owned(),
            });
        }
        let cohort = cohort.ok_or_else(|| parse_err(path, 0, "grid file has no cells"))?;
        Ok(EvaluationGrid {
            cohort,
            num_weeks,
            cells,
        })
    }
}

/// Evaluates every selected cell in parallel. Each cell draws its seeds from
/// `(seed, cohort, lag, lead)` only, so results do not depend on scheduling.
pub fn run_grid<C>(
    features: &FeatureMatrix,
    cohorts: &CohortTable,
    cohort_list: &[Cohort],
    num_weeks: u32,
    classifier: &C,
    cfg: &GridConfig,
    filter: &ProblemFilter,
) -> Vec<EvaluationGrid>
where
    C: Classifier,
{
    let problems = enumerate_problems(num_weeks);
    let cells: Vec<(Cohort, ProblemSpec)> = cohort_list
        .iter()
        .flat_map(|&c| problems.iter().map(move |&p| (c, p)))
        .filter(|&(c, p)| filter.matches(p, c))
        .collect();
    let results: Vec<CellResult> = cells
        .par_iter()
        .map(|&(c, p)| run_cell(features, cohorts, c, p, classifier, cfg))
        .collect();
    cohort_list
        .iter()
        .map(|&c| EvaluationGrid {
            cohort: c,
            num_weeks,
            cells: results.iter().filter(|r| r.cohort == c).cloned().collect(),
        })
        .collect()
}
