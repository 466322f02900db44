//! Synthetic courses with a planted stopout mechanism.
//!
//! Every learner carries three latent drivers per week (submission volume,
//! timeliness, grades), each a persistent learner-level base plus an AR(1)
//! weekly deviation. While active, a learner submits work whose volume, lead
//! time before the deadline and correctness follow noisy copies of the
//! drivers. After each week the learner stops out with probability
//!
//! ```text
//! sigmoid(logit(1 / (n - w + 1)) + hazard_shift - Σ_k slope_k · driver_k(w))
//! ```
//!
//! With zero slopes and shift the stopout week of participants is uniform on
//! `2..=n + 1`. Browsing, forum and wiki activity are independent of the
//! drivers.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};

use crate::cohort::Cohort;
use crate::error::{Error, Result};
use crate::event_store::{
    AssignmentKind, CollabKind, CourseCalendar, ProblemMeta, ResourceKind, EVENT_COLUMNS, WEEK_SECONDS,
};
use crate::logistic::logit;
use crate::rng::rng_for;
use crate::tsv::{self, fmt_f64};

pub const DRIVERS: [&str; 3] = ["volume", "timeliness", "grade"];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_learners: usize,
    pub num_weeks: u32,
    pub seed: u64,
    /// Proportions of passive, wiki, forum and fully collaborative learners.
    pub cohort_mix: [f64; 4],
    /// Probability that a learner submits anything at all.
    pub participation_rate: f64,
    pub hazard_shift: f64,
    /// Hazard slopes for the volume, timeliness and grade drivers.
    pub slopes: [f64; 3],
    /// Standard deviation of each driver's learner-level base.
    pub base_sd: f64,
    /// Stationary standard deviation of the weekly AR(1) deviation.
    pub weekly_sd: f64,
    pub autocorrelation: f64,
    /// Standard deviation of the per-week noise between a driver and the
    /// behaviour it generates.
    pub noise: f64,
    pub homework_per_week: usize,
    pub labs_per_week: usize,
    pub course_start: i64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_learners: 1_000,
            num_weeks: 14,
            seed: 1,
            cohort_mix: [0.70, 0.05, 0.15, 0.10],
            participation_rate: 0.8,
            hazard_shift: -13.0,
            slopes: [3.0, 10.0, 3.0],
            base_sd: 0.1,
            weekly_sd: 1.0,
            autocorrelation: 0.2,
            noise: 0.2,
            homework_per_week: 10,
            labs_per_week: 6,
            course_start: 1_349_049_600,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("synth: {m}")));
        if self.num_weeks < 2 {
            return bad(format!("num_weeks {} below 2", self.num_weeks));
        }
        let sum: f64 = self.cohort_mix.iter().sum();
        if self.cohort_mix.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return bad(format!("cohort mix {:?} must be non-negative and sum to 1", self.cohort_mix));
        }
        if !(0.0..=1.0).contains(&self.participation_rate) {
            return bad("participation_rate outside [0, 1]".into());
        }
        let finite = [self.hazard_shift, self.base_sd, self.weekly_sd, self.noise, self.autocorrelation]
            .iter()
            .chain(&self.slopes)
            .all(|v| v.is_finite());
        if !finite || self.base_sd < 0.0 || self.weekly_sd < 0.0 || self.noise < 0.0 {
            return bad("hazard and driver parameters must be finite, deviations non-negative".into());
        }
        if !(-1.0 < self.autocorrelation && self.autocorrelation < 1.0) {
            return bad("autocorrelation outside (-1, 1)".into());
        }
        if self.homework_per_week + self.labs_per_week == 0 {
            return bad("need at least one problem per week".into());
        }
        Ok(())
    }

    fn due(&self, week: u32) -> i64 {
        self.course_start + (week as i64 - 1) * WEEK_SECONDS + DUE_OFFSET
    }

    pub fn calendar(&self) -> Result<CourseCalendar> {
        let mut cal = CourseCalendar::new(self.course_start, self.num_weeks)?;
        for w in 1..=self.num_weeks {
            let due_timestamp = self.due(w);
            for (kind, count) in [
                (AssignmentKind::Homework, self.homework_per_week),
                (AssignmentKind::Lab, self.labs_per_week),
            ] {
                for j in 0..count {
                    cal.add_problem(
                        problem_id(kind, w, j),
                        ProblemMeta {
                            assignment_kind: kind,
                            week_assigned: w,
                            due_timestamp,
                        },
                    )?;
                }
            }
        }
        Ok(cal)
    }
}

/// Deadline of each week's problems, relative to the week start.
const DUE_OFFSET: i64 = 6 * 86_400 + 43_200;
const MAX_LEAD: f64 = 5.0 * 86_400.0;
const MIN_LEAD: f64 = 600.0;
const MEDIAN_LEAD: f64 = 86_400.0;
const MAX_ATTEMPTS: usize = 4;
const RETRY_RATE: f64 = 0.7;

fn problem_id(kind: AssignmentKind, week: u32, j: usize) -> String {
    let prefix = if kind == AssignmentKind::Lab { "lab" } else { "hw" };
    format!("{prefix}{week:02}_{j}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub learner_id: String,
    pub cohort: Cohort,
    pub stopout_week: u32,
    pub participated: bool,
    /// Learner-level base of each driver, ordered like [`DRIVERS`].
    pub base: [f64; 3],
}

pub struct SynthOutput {
    pub calendar: CourseCalendar,
    pub events: String,
    pub ground_truth: Vec<GroundTruth>,
}

impl SynthOutput {
    pub fn ground_truth_tsv(&self) -> String {
        let mut out = String::from("learner_id\tcohort\tstopout_week\tparticipated");
        for d in DRIVERS {
            let _ = write!(out, "\tbase_{d}");
        }
        out.push('\n');
        for g in &self.ground_truth {
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}",
                g.learner_id,
                g.cohort,
                g.stopout_week,
                u8::from(g.participated)
            );
            for b in g.base {
                let _ = write!(out, "\t{}", fmt_f64(b));
            }
            out.push('\n');
        }
        out
    }

    /// Writes `events.tsv`, `calendar.tsv` and `ground_truth.tsv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        tsv::write_file(&dir.join("events.tsv"), &self.events)?;
        tsv::write_file(&dir.join("calendar.tsv"), &self.calendar.to_tsv())?;
        tsv::write_file(&dir.join("ground_truth.tsv"), &self.ground_truth_tsv())
    }
}

struct Writer(String);

impl Writer {
    fn observed(&mut self, id: &str, ts: i64, resource: &str, kind: ResourceKind) {
        let _ = writeln!(self.0, "observed\t{id}\t{ts}\t{resource}\t{kind}\t\t\t\t\t");
    }

    fn submission(&mut self, id: &str, ts: i64, problem: &str, correct: bool, kind: AssignmentKind) {
        let _ = writeln!(self.0, "submission\t{id}\t{ts}\t\t\t{problem}\t{}\t{kind}\t\t", u8::from(correct));
    }

    fn collaboration(&mut self, id: &str, ts: i64, kind: CollabKind, len: u32) {
        let _ = writeln!(self.0, "collaboration\t{id}\t{ts}\t\t\t\t\t\t{kind}\t{len}");
    }
}

fn sample_cohort(rng: &mut ChaCha8Rng, mix: &[f64; 4]) -> Cohort {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (c, p) in Cohort::ALL.iter().zip(mix) {
        acc += p;
        if u < acc {
            return *c;
        }
    }
    *Cohort::ALL.iter().zip(mix).rev().find(|(_, p)| **p > 0.0).map(|(c, _)| c).unwrap_or(&Cohort::PassiveCollaborator)
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

const RESOURCE_KINDS: [ResourceKind; 6] = [
    ResourceKind::Lecture,
    ResourceKind::Lecture,
    ResourceKind::Book,
    ResourceKind::Problem,
    ResourceKind::Wiki,
    ResourceKind::Forum,
];

/// Generates the course. Each learner draws from its own stream keyed by the
/// seed and its index, so output is a pure function of the config.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let calendar = cfg.calendar()?;
    let n = cfg.num_weeks;
    let width = cfg.num_learners.max(1).to_string().len().max(5);
    let mut out = Writer(EVENT_COLUMNS.join("\t") + "\n");
    let mut truth = Vec::with_capacity(cfg.num_learners);
    let innovation = Normal::new(0.0, cfg.weekly_sd * (1.0 - cfg.autocorrelation.powi(2)).sqrt())
        .map_err(|e| Error::Config(e.to_string()))?;

    for i in 0..cfg.num_learners {
        let id = format!("u{i:0width$}");
        let mut rng = rng_for(cfg.seed, &[i as u64]);
        let cohort = sample_cohort(&mut rng, &cfg.cohort_mix);
        let participated = rng.random::<f64>() < cfg.participation_rate;
        let base: [f64; 3] = std::array::from_fn(|_| cfg.base_sd * normal(&mut rng));
        let mut dev: [f64; 3] = std::array::from_fn(|_| cfg.weekly_sd * normal(&mut rng));

        let mut stopout_week = if participated { n + 1 } else { 1 };
        let mut wrote_forum = false;
        let mut wrote_wiki = false;
        for w in 1..=n {
            let week_start = calendar.week_start(w);
            if w > 1 {
                for d in dev.iter_mut() {
                    *d = cfg.autocorrelation * *d + innovation.sample(&mut rng);
                }
            }
            let active = participated && w < stopout_week;
            let driver: [f64; 3] = std::array::from_fn(|k| base[k] + dev[k]);

            let seen: [f64; 3] = std::array::from_fn(|k| driver[k] + cfg.noise * normal(&mut rng));

            let sessions = poisson(&mut rng, if active { 2.0 } else { 0.3 });
            for _ in 0..sessions {
                let mut ts = week_start + rng.random_range(0..6 * 86_400);
                for _ in 0..1 + poisson(&mut rng, 3.0) {
                    let kind = RESOURCE_KINDS[rng.random_range(0..RESOURCE_KINDS.len())];
                    let res = format!("{kind}_{}", rng.random_range(0..40));
                    out.observed(&id, ts, &res, kind);
                    ts += rng.random_range(20..1_500);
                }
            }

            if active {
                let attempt_p = logit(0.5 + 2.0 * seen[0]);
                let correct_p = logit(0.5 + 2.0 * seen[2]);
                let due = cfg.due(w);
                let mut problems: Vec<(AssignmentKind, usize)> = Vec::new();
                for (kind, count) in [
                    (AssignmentKind::Homework, cfg.homework_per_week),
                    (AssignmentKind::Lab, cfg.labs_per_week),
                ] {
                    for j in 0..count {
                        if rng.random::<f64>() < attempt_p {
                            problems.push((kind, j));
                        }
                    }
                }
                if problems.is_empty() {
                    let total = cfg.homework_per_week + cfg.labs_per_week;
                    let j = rng.random_range(0..total);
                    problems.push(if j < cfg.homework_per_week {
                        (AssignmentKind::Homework, j)
                    } else {
                        (AssignmentKind::Lab, j - cfg.homework_per_week)
                    });
                }
                for (kind, j) in problems {
                    let lead = (MEDIAN_LEAD * (1.0 * seen[1] + 0.2 * normal(&mut rng)).exp()).clamp(MIN_LEAD, MAX_LEAD);
                    let mut ts = due - lead as i64;
                    let pid = problem_id(kind, w, j);
                    // Wrong answers are retried a few times.
                    for a in 0..MAX_ATTEMPTS {
                        if a > 0 {
                            ts += rng.random_range(60..3_600);
                        }
                        let correct = rng.random::<f64>() < correct_p;
                        out.submission(&id, ts, &pid, correct, kind);
                        if correct || rng.random::<f64>() > RETRY_RATE {
                            break;
                        }
                    }
                }
            }

            // Cohort membership fixes which kinds of authorship occur.
            let (forum, wiki) = match cohort {
                Cohort::PassiveCollaborator => (false, false),
                Cohort::WikiContributor => (false, true),
                Cohort::ForumContributor => (true, false),
                Cohort::FullyCollaborative => (true, true),
            };
            if forum && (active || !wrote_forum) {
                let count = poisson(&mut rng, 0.4) + u64::from(!wrote_forum);
                for _ in 0..count {
                    let kind = if rng.random::<f64>() < 0.6 {
                        CollabKind::ForumPost
                    } else {
                        CollabKind::ForumResponse
                    };
                    let ts = week_start + rng.random_range(0..6 * 86_400);
                    out.collaboration(&id, ts, kind, rng.random_range(10..600));
                }
                wrote_forum = true;
            }
            if wiki && (active || !wrote_wiki) {
                let count = poisson(&mut rng, 0.3) + u64::from(!wrote_wiki);
                for _ in 0..count {
                    let ts = week_start + rng.random_range(0..6 * 86_400);
                    out.collaboration(&id, ts, CollabKind::WikiEdit, rng.random_range(0..2_000));
                }
                wrote_wiki = true;
            }

            if active && w < n {
                let base_hazard = 1.0 / (n - w + 1) as f64;
                let z = (base_hazard / (1.0 - base_hazard)).ln() + cfg.hazard_shift
                    - cfg.slopes.iter().zip(&driver).map(|(s, d)| s * d).sum::<f64>();
                if rng.random::<f64>() < logit(z) {
                    stopout_week = w + 1;
                }
            }
        }
        truth.push(GroundTruth {
            learner_id: id,
            cohort,
            stopout_week,
            participated,
            base,
        });
    }
    Ok(SynthOutput {
        calendar,
        events: out.0,
        ground_truth: truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_learners_give_header_only() {
        let out = generate(&SynthConfig {
            num_learners: 0,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_eq!(out.events, EVENT_COLUMNS.join("\t") + "\n");
        assert!(out.ground_truth.is_empty());
        assert_eq!(out.ground_truth_tsv().lines().count(), 1);
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SynthConfig {
            num_learners: 50,
            ..SynthConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.ground_truth_tsv(), b.ground_truth_tsv());
        let c = generate(&SynthConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn rejects_bad_mix() {
        let cfg = SynthConfig {
            cohort_mix: [0.5, 0.5, 0.5, 0.0],
            ..SynthConfig::default()
        };
        assert!(matches!(generate(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn calendar_has_all_problems() {
        let cfg = SynthConfig::default();
        let cal = cfg.calendar().unwrap();
        assert_eq!(cal.problems.len(), 14 * 16);
        assert_eq!(cal.problems_in_week(3, AssignmentKind::Lab), 6);
    }
}
