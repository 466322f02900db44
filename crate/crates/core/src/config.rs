//! Run configuration: a flat `key = value` text file.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! resolved against the directory holding the config file. Every key and its
//! default is listed by [`RunConfig::defaults_text`].

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cohort::Cohort;
use crate::dataset::ProblemSpec;
use crate::error::{Error, Result};
use crate::importance::ImportanceConfig;
use crate::logistic::TrainConfig;
use crate::synth::SynthConfig;
use crate::tsv::fmt_f64;

/// One conjunction of a filter: every listed dimension must match one of
/// its values. Absent dimensions match anything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterClause {
    pub lag: Option<Vec<u32>>,
    pub lead: Option<Vec<u32>>,
    pub week: Option<Vec<u32>>,
    pub cohort: Option<Vec<Cohort>>,
}

impl FilterClause {
    fn matches(&self, spec: ProblemSpec, cohort: Cohort) -> bool {
        fn ok<T: PartialEq>(set: &Option<Vec<T>>, v: T) -> bool {
            set.as_ref().is_none_or(|s| s.contains(&v))
        }
        ok(&self.lag, spec.lag)
            && ok(&self.lead, spec.lead)
            && ok(&self.week, spec.predicted_week())
            && ok(&self.cohort, cohort)
    }
}

/// Union of clauses such as `lead=13,lag=1;lead=3,lag=6`. Values within a
/// key are separated by `|`. The empty filter selects everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProblemFilter {
    pub clauses: Vec<FilterClause>,
}

impl ProblemFilter {
    pub fn matches(&self, spec: ProblemSpec, cohort: Cohort) -> bool {
        self.clauses.is_empty() || self.clauses.iter().any(|c| c.matches(spec, cohort))
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

impl FromStr for ProblemFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::Config(format!("filter {s:?}: {m}"));
        let mut clauses = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let mut clause = FilterClause::default();
            for item in part.split(',').map(str::trim) {
                let (key, values) = item
                    .split_once('=')
                    .ok_or_else(|| bad(format!("expected key=value, got {item:?}")))?;
                let values: Vec<&str> = values.split('|').map(str::trim).collect();
                let nums = || -> Result<Vec<u32>> {
                    values
                        .iter()
                        .map(|v| match v.parse::<u32>() {
                            Ok(n) if n >= 1 => Ok(n),
                            _ => Err(bad(format!("{key} needs positive integers, got {v:?}"))),
                        })
                        .collect()
                };
                let slot_taken = match key.trim() {
                    "lag" => clause.lag.replace(nums()?).is_some(),
                    "lead" => clause.lead.replace(nums()?).is_some(),
                    "week" => clause.week.replace(nums()?).is_some(),
                    "cohort" => {
                        let c = values
                            .iter()
                            .map(|v| v.parse::<Cohort>().map_err(&bad))
                            .collect::<Result<Vec<_>>>()?;
                        clause.cohort.replace(c).is_some()
                    }
                    other => return Err(bad(format!("unknown key {other:?}"))),
                };
                if slot_taken {
                    return Err(bad(format!("{key} repeated within a clause")));
                }
            }
            clauses.push(clause);
        }
        Ok(ProblemFilter { clauses })
    }
}

impl fmt::Display for ProblemFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|")
        }
        let clauses: Vec<String> = self
            .clauses
            .iter()
            .map(|c| {
                let mut items = Vec::new();
                if let Some(v) = &c.lag {
                    items.push(format!("lag={}", join(v)));
                }
                if let Some(v) = &c.lead {
                    items.push(format!("lead={}", join(v)));
                }
                if let Some(v) = &c.week {
                    items.push(format!("week={}", join(v)));
                }
                if let Some(v) = &c.cohort {
                    items.push(format!("cohort={}", join(v)));
                }
                items.join(",")
            })
            .collect();
        f.write_str(&clauses.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub events: Vec<PathBuf>,
    pub calendar: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Restricts the problem grid to the first `num_weeks` weeks; defaults
    /// to the calendar's length.
    pub num_weeks: Option<u32>,
    pub split_ratio: f64,
    /// Master seed. Stochastic stages refuse to run without it.
    pub seed: Option<u64>,
    pub model: TrainConfig,
    pub cv_k: usize,
    pub min_cell_rows: usize,
    pub filter: ProblemFilter,
    pub write_problem_matrices: bool,
    pub jobs: Option<usize>,
    pub importance: ImportanceConfig,
    pub importance_filter: ProblemFilter,
    pub synth: SynthConfig,
    pub synth_output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            events: Vec::new(),
            calendar: None,
            output_dir: PathBuf::from("out"),
            num_weeks: None,
            split_ratio: 0.7,
            seed: None,
            model: TrainConfig::default(),
            cv_k: 10,
            min_cell_rows: 10,
            filter: ProblemFilter::default(),
            write_problem_matrices: false,
            jobs: None,
            importance: ImportanceConfig::default(),
            importance_filter: ProblemFilter::default(),
            synth: SynthConfig::default(),
            synth_output_dir: PathBuf::from("synth"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_array<const N: usize>(key: &str, v: &str) -> Result<[f64; N]> {
    let list: Vec<f64> = parse_list(key, v)?;
    list.try_into()
        .map_err(|_| Error::Config(format!("{key}: expected {N} comma-separated numbers")))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

fn resolve(base: &Path, v: &str) -> PathBuf {
    let p = PathBuf::from(v);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Applies one `key = value` setting. Paths are resolved against `base`.
    pub fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let v = value.trim();
        match key {
            "events" => {
                self.events = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| resolve(base, s))
                    .collect()
            }
            "calendar" => self.calendar = (!v.is_empty()).then(|| resolve(base, v)),
            "output_dir" => self.output_dir = resolve(base, v),
            "num_weeks" => self.num_weeks = if v.is_empty() { None } else { Some(parse_num(key, v)?) },
            "split_ratio" => self.split_ratio = parse_num(key, v)?,
            "seed" => self.seed = if v.is_empty() { None } else { Some(parse_num(key, v)?) },
            "model.tol" => self.model.tol = parse_num(key, v)?,
            "model.max_iter" => self.model.max_iter = parse_num(key, v)?,
            "model.ridge" => self.model.ridge = parse_num(key, v)?,
            "model.ridge_ladder" => self.model.ridge_ladder = parse_list(key, v)?,
            "cv_k" => self.cv_k = parse_num(key, v)?,
            "min_cell_rows" => self.min_cell_rows = parse_num(key, v)?,
            "filter" => self.filter = v.parse()?,
            "write_problem_matrices" => self.write_problem_matrices = parse_num(key, v)?,
            "jobs" => self.jobs = if v.is_empty() { None } else { Some(parse_num(key, v)?) },
            "importance.subsamples" => self.importance.subsamples = parse_num(key, v)?,
            "importance.fraction" => self.importance.fraction = parse_num(key, v)?,
            "importance.alpha" => self.importance.alpha = parse_num(key, v)?,
            "importance.target_support" => self.importance.target_support = parse_num(key, v)?,
            "importance.lambda" => {
                self.importance.lambda = if v.is_empty() { None } else { Some(parse_num(key, v)?) }
            }
            "importance.epsilon" => self.importance.epsilon = parse_num(key, v)?,
            "importance.tol" => self.importance.tol = parse_num(key, v)?,
            "importance.max_iter" => self.importance.max_iter = parse_num(key, v)?,
            "importance.min_rows" => self.importance.min_rows = parse_num(key, v)?,
            "importance.filter" => self.importance_filter = v.parse()?,
            "synth.num_learners" => self.synth.num_learners = parse_num(key, v)?,
            "synth.num_weeks" => self.synth.num_weeks = parse_num(key, v)?,
            "synth.cohort_mix" => self.synth.cohort_mix = parse_array(key, v)?,
            "synth.participation_rate" => self.synth.participation_rate = parse_num(key, v)?,
            "synth.hazard_shift" => self.synth.hazard_shift = parse_num(key, v)?,
            "synth.slopes" => self.synth.slopes = parse_array(key, v)?,
            "synth.base_sd" => self.synth.base_sd = parse_num(key, v)?,
            "synth.weekly_sd" => self.synth.weekly_sd = parse_num(key, v)?,
            "synth.autocorrelation" => self.synth.autocorrelation = parse_num(key, v)?,
            "synth.noise" => self.synth.noise = parse_num(key, v)?,
            "synth.homework_per_week" => self.synth.homework_per_week = parse_num(key, v)?,
            "synth.labs_per_week" => self.synth.labs_per_week = parse_num(key, v)?,
            "synth.course_start" => self.synth.course_start = parse_num(key, v)?,
            "synth.output_dir" => self.synth_output_dir = resolve(base, v),
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_owned()) {
                return Err(Error::Config(format!("line {}: duplicate key {k:?}", i + 1)));
            }
            cfg.set(k, v, base)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Config(format!("config file {} not found", path.display())),
            _ => Error::io(path, e),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Every setting that can influence results, one `key = value` per line
    /// in a fixed order. Output locations and the thread count are left out
    /// so that the same run written elsewhere hashes identically.
    pub fn canonical_text(&self) -> String {
        let paths = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
        let opt = |v: Option<String>| v.unwrap_or_default();
        let m = &self.model;
        let im = &self.importance;
        let s = &self.synth;
        let lines = [
            ("events", paths(&self.events)),
            ("calendar", opt(self.calendar.as_ref().map(|p| p.display().to_string()))),
            ("num_weeks", opt(self.num_weeks.map(|v| v.to_string()))),
            ("split_ratio", fmt_f64(self.split_ratio)),
            ("seed", opt(self.seed.map(|v| v.to_string()))),
            ("model.tol", fmt_f64(m.tol)),
            ("model.max_iter", m.max_iter.to_string()),
            ("model.ridge", fmt_f64(m.ridge)),
            ("model.ridge_ladder", fmt_list(&m.ridge_ladder)),
            ("cv_k", self.cv_k.to_string()),
            ("min_cell_rows", self.min_cell_rows.to_string()),
            ("filter", self.filter.to_string()),
            ("write_problem_matrices", self.write_problem_matrices.to_string()),
            ("importance.subsamples", im.subsamples.to_string()),
            ("importance.fraction", fmt_f64(im.fraction)),
            ("importance.alpha", fmt_f64(im.alpha)),
            ("importance.target_support", fmt_f64(im.target_support)),
            ("importance.lambda", opt(im.lambda.map(fmt_f64))),
            ("importance.epsilon", fmt_f64(im.epsilon)),
            ("importance.tol", fmt_f64(im.tol)),
            ("importance.max_iter", im.max_iter.to_string()),
            ("importance.min_rows", im.min_rows.to_string()),
            ("importance.filter", self.importance_filter.to_string()),
            ("synth.num_learners", s.num_learners.to_string()),
            ("synth.num_weeks", s.num_weeks.to_string()),
            ("synth.cohort_mix", fmt_list(&s.cohort_mix)),
            ("synth.participation_rate", fmt_f64(s.participation_rate)),
            ("synth.hazard_shift", fmt_f64(s.hazard_shift)),
            ("synth.slopes", fmt_list(&s.slopes)),
            ("synth.base_sd", fmt_f64(s.base_sd)),
            ("synth.weekly_sd", fmt_f64(s.weekly_sd)),
            ("synth.autocorrelation", fmt_f64(s.autocorrelation)),
            ("synth.noise", fmt_f64(s.noise)),
            ("synth.homework_per_week", s.homework_per_week.to_string()),
            ("synth.labs_per_week", s.labs_per_week.to_string()),
            ("synth.course_start", s.course_start.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// A complete config file with every default spelled out.
    pub fn defaults_text() -> String {
        let d = RunConfig::default();
        let mut out = String::from(
            "# Paths are relative to this file. `events` takes a comma-separated list.\n\
             # `seed` has no default and must be set for split, CV, importance and synth.\n",
        );
        out.push_str(&d.canonical_text());
        out.push_str(&format!("output_dir = {}\n", d.output_dir.display()));
        out.push_str("jobs = \n");
        out.push_str(&format!("synth.output_dir = {}\n", d.synth_output_dir.display()));
        out
    }

    pub fn require_seed(&self, stage: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config(format!("stage {stage} is stochastic and needs `seed` in the config or --seed")))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!("split_ratio {} outside (0, 1)", self.split_ratio)));
        }
        if self.cv_k < 2 {
            return Err(Error::Config("cv_k must be at least 2".into()));
        }
        if self.model.tol <= 0.0 || self.model.max_iter == 0 || self.model.ridge < 0.0 {
            return Err(Error::Config("model.tol and model.max_iter must be positive, model.ridge non-negative".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be positive".into()));
        }
        self.importance.validate()?;
        self.synth.validate()
    }
}
