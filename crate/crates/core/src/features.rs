//! Weekly learner features and stopout labels.
//!
//! Each participating learner gets one 27-value vector per course week plus
//! the persistence label `x1` (1 = still active, 0 = stopped out). Ratios with
//! a zero denominator evaluate to 0.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::Result;
use crate::event_store::{
    week_of, AssignmentKind, CollabKind, CollaborationEvent, CourseCalendar, CourseDataset,
    LearnerIdx, ObservedEvent, ResourceKind, SubmissionEvent,
};
use crate::tsv::{self, fmt_f64, parse_err};

pub const NUM_FEATURES: usize = 27;

pub type FeatureVector = [f64; NUM_FEATURES];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureId {
    /// Total observed-event duration.
    X2,
    /// Forum posts.
    X3,
    /// Wiki edits.
    X4,
    /// Average forum post length.
    X5,
    /// Distinct problems submitted.
    X6,
    /// Submissions.
    X7,
    /// Distinct problems answered correctly.
    X8,
    /// Submissions per distinct problem, `x7 / x6`.
    X9,
    /// Duration per correct problem, `x2 / x8`.
    X10,
    /// Problems attempted per correct problem, `x6 / x8`.
    X11,
    /// Mean first-to-last submission span per problem.
    X12,
    /// Variance of observed-event timestamps.
    X13,
    /// Collaborations, `x3 + x4`.
    X14,
    /// Longest observed-event duration.
    X15,
    /// Lecture duration.
    X16,
    /// Book duration.
    X17,
    /// Wiki duration.
    X18,
    /// Forum responses.
    X201,
    /// Percentile of `x9` among the week's peers.
    X202,
    /// `x9` relative to the week's peer maximum.
    X203,
    /// Homework grade for the week's problems.
    X204,
    /// `x204` minus the learner's mean past `x204`.
    X205,
    /// Lab grade for the week's problems.
    X206,
    /// `x206` minus the learner's mean past `x206`.
    X207,
    /// Correct submissions.
    X208,
    /// Share of submissions that were correct, `x208 / x7`.
    X209,
    /// Mean time from submission to due date.
    X210,
}

use FeatureId::*;

impl FeatureId {
    pub const ALL: [FeatureId; NUM_FEATURES] = [
        X2, X3, X4, X5, X6, X7, X8, X9, X10, X11, X12, X13, X14, X15, X16, X17, X18, X201,
        X202, X203, X204, X205, X206, X207, X208, X209, X210,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        const NAMES: [&str; NUM_FEATURES] = [
            "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10", "x11", "x12", "x13", "x14",
            "x15", "x16", "x17", "x18", "x201", "x202", "x203", "x204", "x205", "x206", "x207",
            "x208", "x209", "x210",
        ];
        NAMES[self.index()]
    }

    pub fn description(self) -> &'static str {
        match self {
            X2 => "total duration",
            X3 => "number forum posts",
            X4 => "number wiki edits",
            X5 => "average length forum post",
            X6 => "number distinct problems submitted",
            X7 => "number submissions",
            X8 => "number distinct problems correct",
            X9 => "average number submissions",
            X10 => "observed event duration per correct problem",
            X11 => "submissions per correct problem",
            X12 => "average time to solve problem",
            X13 => "observed event variance",
            X14 => "number collaborations",
            X15 => "max observed event duration",
            X16 => "total lecture duration",
            X17 => "total book duration",
            X18 => "total wiki duration",
            X201 => "number forum responses",
            X202 => "average number of submissions percentile",
            X203 => "average number of submissions percent",
            X204 => "pset grade",
            X205 => "pset grade over time",
            X206 => "lab grade",
            X207 => "lab grade over time",
            X208 => "number submissions correct",
            X209 => "correct submissions percent",
            X210 => "average predeadline submission time",
        }
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        FeatureId::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown feature {s:?}"))
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopoutProfile {
    pub learner: LearnerIdx,
    /// Week after the last submission; `num_weeks + 1` if the learner
    /// submitted in the final week, 1 if they never submitted.
    pub stopout_week: u32,
    pub participated: bool,
}

impl StopoutProfile {
    /// Persistence label for `week`: 1 while the learner has not stopped out.
    pub fn label(&self, week: u32) -> u8 {
        u8::from(self.stopout_week > week)
    }
}

/// `submissions` are the learner's own, in any order.
pub fn compute_stopout(
    learner: LearnerIdx,
    submissions: &[SubmissionEvent],
    calendar: &CourseCalendar,
) -> StopoutProfile {
    let last = submissions
        .iter()
        .filter_map(|s| week_of(s.timestamp, calendar).ok())
        .max();
    match last {
        Some(w) => StopoutProfile {
            learner,
            stopout_week: (w + 1).min(calendar.num_weeks + 1),
            participated: true,
        },
        None => StopoutProfile {
            learner,
            stopout_week: 1,
            participated: false,
        },
    }
}

/// Fraction of `peers` strictly below `value` plus half the fraction equal to
/// it. `peers` must include the learner's own value.
pub fn percentile_rank(value: f64, peers: &[f64]) -> f64 {
    assert!(!peers.is_empty(), "peer set must include the learner");
    let below = peers.iter().filter(|&&p| p < value).count() as f64;
    let ties = peers.iter().filter(|&&p| p == value).count() as f64;
    (below + 0.5 * ties) / peers.len() as f64
}

/// The week's `x9` values across the peer set (learners not yet stopped
/// out), sorted ascending.
#[derive(Debug, Clone, Default)]
pub struct PeerAggregates {
    sorted_x9: Vec<f64>,
}

impl PeerAggregates {
    pub fn new(mut x9: Vec<f64>) -> Self {
        x9.sort_by(f64::total_cmp);
        PeerAggregates { sorted_x9: x9 }
    }

    /// `(x202, x203)` for a learner with value `x9`. Learners outside the
    /// peer set are compared against the set plus themselves.
    fn relative(&self, x9: f64, in_peer_set: bool) -> (f64, f64) {
        let below = self.sorted_x9.partition_point(|&p| p < x9);
        let not_above = self.sorted_x9.partition_point(|&p| p <= x9);
        let mut ties = (not_above - below) as f64;
        let mut n = self.sorted_x9.len() as f64;
        let mut max = self.sorted_x9.last().copied().unwrap_or(0.0);
        if !in_peer_set {
            ties += 1.0;
            n += 1.0;
            max = max.max(x9);
        }
        ((below as f64 + 0.5 * ties) / n, ratio(x9, max))
    }
}

/// A learner's grades from earlier weeks, feeding `x205` and `x207`.
#[derive(Debug, Clone, Default)]
pub struct GradeHistory {
    pub pset: Vec<f64>,
    pub lab: Vec<f64>,
}

impl GradeHistory {
    fn mean(v: &[f64]) -> f64 {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    }
}

/// One learner's events, each slice sorted by timestamp.
#[derive(Debug, Clone, Copy)]
pub struct LearnerEvents<'a> {
    pub observed: &'a [ObservedEvent],
    pub submissions: &'a [SubmissionEvent],
    pub collaborations: &'a [CollaborationEvent],
}

impl<'a> LearnerEvents<'a> {
    pub fn of(dataset: &'a CourseDataset, l: LearnerIdx) -> Self {
        LearnerEvents {
            observed: dataset.observed_of(l),
            submissions: dataset.submissions_of(l),
            collaborations: dataset.collaborations_of(l),
        }
    }
}

fn week_range(calendar: &CourseCalendar, week: u32) -> (i64, i64) {
    let start = calendar.week_start(week);
    let end = if week >= calendar.num_weeks {
        i64::MAX
    } else {
        calendar.week_start(week + 1)
    };
    (start, end)
}

fn in_week<T>(items: &[T], ts: impl Fn(&T) -> i64, (start, end): (i64, i64)) -> &[T] {
    let lo = items.partition_point(|e| ts(e) < start);
    let hi = items.partition_point(|e| ts(e) < end);
    &items[lo..hi]
}

fn submissions_ratio_x9(subs: &[SubmissionEvent]) -> f64 {
    let mut problems: Vec<&str> = subs.iter().map(|s| s.problem_id.as_str()).collect();
    problems.sort_unstable();
    problems.dedup();
    ratio(subs.len() as f64, problems.len() as f64)
}

/// Share of the week's `kind` problems that the learner has answered
/// correctly by the end of the week.
fn grade(
    calendar: &CourseCalendar,
    week: u32,
    kind: AssignmentKind,
    subs_to_date: &[SubmissionEvent],
) -> f64 {
    let total = calendar.problems_in_week(week, kind);
    if total == 0 {
        return 0.0;
    }
    let mut correct: Vec<&str> = subs_to_date
        .iter()
        .filter(|s| s.correct)
        .filter(|s| {
            calendar
                .problems
                .get(&s.problem_id)
                .is_some_and(|m| m.week_assigned == week && m.assignment_kind == kind)
        })
        .map(|s| s.problem_id.as_str())
        .collect();
    correct.sort_unstable();
    correct.dedup();
    correct.len() as f64 / total as f64
}

/// Computes all 27 features for one learner and week. `events` holds the
/// learner's whole trace; only week `week` (and, for grades, earlier
/// submissions) is read.
pub fn extract_week(
    calendar: &CourseCalendar,
    week: u32,
    events: LearnerEvents<'_>,
    history: &GradeHistory,
    peers: &PeerAggregates,
    in_peer_set: bool,
) -> FeatureVector {
    let range = week_range(calendar, week);
    let obs = in_week(events.observed, |e| e.timestamp, range);
    let subs = in_week(events.submissions, |e| e.timestamp, range);
    let collabs = in_week(events.collaborations, |e| e.timestamp, range);
    let subs_to_date = &events.submissions[..events.submissions.partition_point(|s| s.timestamp < range.1)];

    let mut x = [0.0; NUM_FEATURES];
    let mut set = |f: FeatureId, v: f64| x[f.index()] = v;

    // observed events
    let total: i64 = obs.iter().map(|e| e.duration).sum();
    let by_kind = |k: ResourceKind| -> f64 {
        obs.iter()
            .filter(|e| e.resource_kind == k)
            .map(|e| e.duration)
            .sum::<i64>() as f64
    };
    set(X2, total as f64);
    set(X15, obs.iter().map(|e| e.duration).max().unwrap_or(0) as f64);
    set(X16, by_kind(ResourceKind::Lecture));
    set(X17, by_kind(ResourceKind::Book));
    set(X18, by_kind(ResourceKind::Wiki));
    if !obs.is_empty() {
        let offsets: Vec<f64> = obs.iter().map(|e| (e.timestamp - range.0) as f64).collect();
        let n = offsets.len() as f64;
        let mean = offsets.iter().sum::<f64>() / n;
        set(X13, offsets.iter().map(|o| (o - mean).powi(2)).sum::<f64>() / n);
    }

    // collaborations
    let count = |k: CollabKind| collabs.iter().filter(|c| c.kind == k).count() as f64;
    let posts = count(CollabKind::ForumPost);
    let edits = count(CollabKind::WikiEdit);
    let post_len: u64 = collabs
        .iter()
        .filter(|c| c.kind == CollabKind::ForumPost)
        .map(|c| c.text_length as u64)
        .sum();
    set(X3, posts);
    set(X4, edits);
    set(X14, posts + edits);
    set(X201, count(CollabKind::ForumResponse));
    set(X5, ratio(post_len as f64, posts));

    // submissions
    let mut per_problem: BTreeMap<&str, (i64, i64, bool)> = BTreeMap::new();
    for s in subs {
        let e = per_problem
            .entry(&s.problem_id)
            .or_insert((s.timestamp, s.timestamp, false));
        e.0 = e.0.min(s.timestamp);
        e.1 = e.1.max(s.timestamp);
        e.2 |= s.correct;
    }
    let distinct = per_problem.len() as f64;
    let distinct_correct = per_problem.values().filter(|p| p.2).count() as f64;
    let n_subs = subs.len() as f64;
    let correct_subs = subs.iter().filter(|s| s.correct).count() as f64;
    set(X6, distinct);
    set(X7, n_subs);
    set(X8, distinct_correct);
    let x9 = ratio(n_subs, distinct);
    set(X9, x9);
    set(X10, ratio(total as f64, distinct_correct));
    set(X11, ratio(distinct, distinct_correct));
    let span: i64 = per_problem.values().map(|p| p.1 - p.0).sum();
    set(X12, ratio(span as f64, distinct));
    set(X208, correct_subs);
    set(X209, ratio(correct_subs, n_subs));
    let lead: i64 = subs
        .iter()
        .map(|s| calendar.problems.get(&s.problem_id).map_or(0, |m| m.due_timestamp - s.timestamp))
        .sum();
    set(X210, ratio(lead as f64, n_subs));

    let (pct, rel) = peers.relative(x9, in_peer_set);
    set(X202, pct);
    set(X203, rel);

    let pset = grade(calendar, week, AssignmentKind::Homework, subs_to_date);
    let lab = grade(calendar, week, AssignmentKind::Lab, subs_to_date);
    set(X204, pset);
    set(X205, pset - GradeHistory::mean(&history.pset));
    set(X206, lab);
    set(X207, lab - GradeHistory::mean(&history.lab));
    x
}

/// One row of the feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeeklyFeatureVector {
    pub learner_id: String,
    pub week: u32,
    pub x: FeatureVector,
    pub x1: u8,
}

impl WeeklyFeatureVector {
    pub fn get(&self, f: FeatureId) -> f64 {
        self.x[f.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerFeatures {
    pub learner_id: String,
    pub stopout_week: u32,
    /// `weeks[w - 1]` holds week `w`.
    pub weeks: Vec<FeatureVector>,
}

impl LearnerFeatures {
    pub fn week(&self, w: u32) -> &FeatureVector {
        &self.weeks[w as usize - 1]
    }

    pub fn label(&self, week: u32) -> u8 {
        u8::from(self.stopout_week > week)
    }
}

/// Features for every participating learner, sorted by learner id.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub num_weeks: u32,
    pub learners: Vec<LearnerFeatures>,
}

impl FeatureMatrix {
    pub fn rows(&self) -> impl Iterator<Item = WeeklyFeatureVector> + '_ {
        self.learners.iter().flat_map(|l| {
            (1..=self.num_weeks).map(move |w| WeeklyFeatureVector {
                learner_id: l.learner_id.clone(),
                week: w,
                x: *l.week(w),
                x1: l.label(w),
            })
        })
    }

    pub fn find(&self, learner_id: &str) -> Option<&LearnerFeatures> {
        self.learners
            .binary_search_by(|l| l.learner_id.as_str().cmp(learner_id))
            .ok()
            .map(|i| &self.learners[i])
    }

    pub fn header() -> String {
        let mut h = String::from("learner_id\tweek\tx1");
        for f in FeatureId::ALL {
            h.push('\t');
            h.push_str(f.name());
        }
        h
    }

    pub fn to_tsv(&self) -> String {
        let mut out = Self::header();
        out.push('\n');
        for row in self.rows() {
            out.push_str(&format!("{}\t{}\t{}", row.learner_id, row.week, row.x1));
            for v in row.x {
                out.push('\t');
                out.push_str(&fmt_f64(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let lines = tsv::read_lines(path)?;
        let mut it = lines.into_iter().filter(|(_, l)| !l.is_empty());
        match it.next() {
            Some((_, h)) if h == Self::header() => {}
            _ => return Err(parse_err(path, 1, "unexpected feature matrix header")),
        }
        let mut learners: Vec<LearnerFeatures> = Vec::new();
        let mut labels: Vec<Vec<u8>> = Vec::new();
        for (n, line) in it {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 + NUM_FEATURES {
                return Err(parse_err(path, n, "wrong field count"));
            }
            let week: u32 = f[1].parse().map_err(|_| parse_err(path, n, "invalid week"))?;
            let x1: u8 = match f[2] {
                "0" => 0,
                "1" => 1,
                _ => return Err(parse_err(path, n, "invalid x1")),
            };
            let mut x = [0.0; NUM_FEATURES];
            for (k, v) in f[3..].iter().enumerate() {
                x[k] = v.parse().map_err(|_| parse_err(path, n, format!("invalid value {v:?}")))?;
            }
            if learners.last().map(|l| l.learner_id.as_str()) != Some(f[0]) {
                if week != 1 {
                    return Err(parse_err(path, n, "learner rows must start at week 1"));
                }
                learners.push(LearnerFeatures {
                    learner_id: f[0].to_owned(),
                    stopout_week: 0,
                    weeks: Vec::new(),
                });
                labels.push(Vec::new());
            }
            let l = learners.last_mut().unwrap();
            if week as usize != l.weeks.len() + 1 {
                return Err(parse_err(path, n, "weeks must be consecutive"));
            }
            l.weeks.push(x);
            labels.last_mut().unwrap().push(x1);
        }
        let num_weeks = learners.first().map_or(0, |l| l.weeks.len() as u32);
        for (l, lab) in learners.iter_mut().zip(&labels) {
            if l.weeks.len() as u32 != num_weeks {
                return Err(parse_err(path, 0, format!("learner {} has incomplete weeks", l.learner_id)));
            }
            l.stopout_week = lab.iter().position(|&v| v == 0).map_or(num_weeks + 1, |p| p as u32 + 1);
            if lab.iter().enumerate().any(|(w, &v)| v != u8::from(l.stopout_week > w as u32 + 1)) {
                return Err(parse_err(path, 0, format!("learner {} has non-monotone x1", l.learner_id)));
            }
        }
        if learners.windows(2).any(|w| w[0].learner_id >= w[1].learner_id) {
            return Err(parse_err(path, 0, "learners must be sorted and unique"));
        }
        Ok(FeatureMatrix { num_weeks, learners })
    }
}

/// Stopout profiles for all learners plus the participating learners'
/// feature matrix.
#[derive(Debug, Clone)]
pub struct FeatureReport {
    pub matrix: FeatureMatrix,
    pub profiles: Vec<StopoutProfile>,
    /// `histogram[s - 1]` counts learners with stopout week `s`, for
    /// `s` in `1..=num_weeks + 1`.
    pub histogram: Vec<usize>,
}

impl FeatureReport {
    pub fn histogram_tsv(&self) -> String {
        let mut out = String::from("week\tcount\n");
        for (i, c) in self.histogram.iter().enumerate() {
            out.push_str(&format!("{}\t{c}\n", i + 1));
        }
        out
    }

    pub fn profiles_tsv(&self, dataset: &CourseDataset) -> String {
        let mut out = String::from("learner_id\tstopout_week\tparticipated\n");
        for p in &self.profiles {
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                dataset.learner_id(p.learner),
                p.stopout_week,
                u8::from(p.participated)
            ));
        }
        out
    }
}

pub fn build_feature_matrix(dataset: &CourseDataset) -> FeatureReport {
    let cal = &dataset.calendar;
    let n_weeks = cal.num_weeks;
    let profiles: Vec<StopoutProfile> = dataset
        .learner_indices()
        .map(|l| compute_stopout(l, dataset.submissions_of(l), cal))
        .collect();
    let mut histogram = vec![0usize; n_weeks as usize + 1];
    for p in &profiles {
        histogram[p.stopout_week as usize - 1] += 1;
    }
    let participants: Vec<StopoutProfile> = profiles.iter().copied().filter(|p| p.participated).collect();

    // Sequential aggregate pass: the week's x9 over learners still active.
    let x9: Vec<Vec<f64>> = participants
        .par_iter()
        .map(|p| {
            let subs = dataset.submissions_of(p.learner);
            (1..=n_weeks)
                .map(|w| submissions_ratio_x9(in_week(subs, |s| s.timestamp, week_range(cal, w))))
                .collect()
        })
        .collect();
    let peers: Vec<PeerAggregates> = (1..=n_weeks)
        .map(|w| {
            PeerAggregates::new(
                participants
                    .iter()
                    .zip(&x9)
                    .filter(|(p, _)| p.stopout_week > w)
                    .map(|(_, v)| v[w as usize - 1])
                    .collect(),
            )
        })
        .collect();

    let learners: Vec<LearnerFeatures> = participants
        .par_iter()
        .map(|p| {
            let events = LearnerEvents::of(dataset, p.learner);
            let mut history = GradeHistory::default();
            let weeks = (1..=n_weeks)
                .map(|w| {
                    let x = extract_week(
                        cal,
                        w,
                        events,
                        &history,
                        &peers[w as usize - 1],
                        p.stopout_week > w,
                    );
                    history.pset.push(x[X204.index()]);
                    history.lab.push(x[X206.index()]);
                    x
                })
                .collect();
            LearnerFeatures {
                learner_id: dataset.learner_id(p.learner).to_owned(),
                stopout_week: p.stopout_week,
                weeks,
            }
        })
        .collect();

    FeatureReport {
        matrix: FeatureMatrix {
            num_weeks: n_weeks,
            learners,
        },
        profiles,
        histogram,
    }
}

/// Whole-course forum and wiki authorship totals for a learner.
pub fn collaboration_totals(events: &[CollaborationEvent]) -> (u64, u64) {
    let forum = events
        .iter()
        .filter(|c| matches!(c.kind, CollabKind::ForumPost | CollabKind::ForumResponse))
        .count() as u64;
    let wiki = events.iter().filter(|c| c.kind == CollabKind::WikiEdit).count() as u64;
    (forum, wiki)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event_store::ProblemMeta;

    fn cal() -> CourseCalendar {
        let mut c = CourseCalendar::new(0, 14).unwrap();
        for w in 1..=14u32 {
            c.add_problem(
                format!("hw{w}"),
                ProblemMeta {
                    assignment_kind: AssignmentKind::Homework,
                    week_assigned: w,
                    due_timestamp: w as i64 * 604_800 - 1,
                },
            )
            .unwrap();
        }
        c
    }

    fn sub(week: u32, problem: &str, correct: bool) -> SubmissionEvent {
        SubmissionEvent {
            learner: LearnerIdx(0),
            timestamp: (week as i64 - 1) * 604_800 + 100,
            problem_id: problem.into(),
            correct,
            assignment_kind: AssignmentKind::Homework,
        }
    }

    #[test]
    fn stopout_after_last_submission_week() {
        let c = cal();
        let p = compute_stopout(LearnerIdx(0), &[sub(1, "hw1", true), sub(3, "hw3", false)], &c);
        assert_eq!(p.stopout_week, 4);
        assert!(p.participated);
        assert_eq!((p.label(3), p.label(4)), (1, 0));
    }

    #[test]
    fn never_submitted_is_week_one() {
        let p = compute_stopout(LearnerIdx(0), &[], &cal());
        assert_eq!(p.stopout_week, 1);
        assert!(!p.participated);
    }

    #[test]
    fn persisted_to_the_end() {
        let c = cal();
        let subs: Vec<_> = (1..=14).map(|w| sub(w, &format!("hw{w}"), true)).collect();
        let p = compute_stopout(LearnerIdx(0), &subs, &c);
        assert_eq!(p.stopout_week, 15);
        assert!((1..=14).all(|w| p.label(w) == 1));
    }

    #[test]
    fn percentile_examples() {
        assert!((percentile_rank(5.0, &[1.0, 2.0, 5.0]) - 2.5 / 3.0).abs() < 1e-15);
        assert_eq!(percentile_rank(3.0, &[3.0, 3.0, 3.0, 3.0]), 0.5);
        assert_eq!(percentile_rank(9.0, &[1.0, 2.0, 3.0, 9.0]), 0.875);
    }

    #[test]
    fn x9_from_ten_submissions_over_five_problems() {
        let c = cal();
        let subs: Vec<_> = (0..10)
            .map(|i| {
                let mut s = sub(1, &format!("p{}", i % 5), false);
                s.timestamp += i;
                s
            })
            .collect();
        let events = LearnerEvents {
            observed: &[],
            submissions: &subs,
            collaborations: &[],
        };
        let x = extract_week(&c, 1, events, &GradeHistory::default(), &PeerAggregates::new(vec![2.0]), true);
        assert_eq!(x[X9.index()], 2.0);
        assert_eq!(x[X6.index()], 5.0);
        assert_eq!(x[X7.index()], 10.0);
    }

    #[test]
    fn empty_week_guards() {
        let c = cal();
        let history = GradeHistory {
            pset: vec![0.5, 1.0],
            lab: vec![0.25],
        };
        let events = LearnerEvents {
            observed: &[],
            submissions: &[],
            collaborations: &[],
        };
        let x = extract_week(&c, 3, events, &history, &PeerAggregates::new(vec![1.0]), false);
        for f in FeatureId::ALL {
            let v = x[f.index()];
            match f {
                X205 => assert_eq!(v, -0.75),
                X207 => assert_eq!(v, -0.25),
                // a zero among peers {1, 0}
                X202 => assert_eq!(v, 0.25),
                _ => assert_eq!(v, 0.0, "{f}"),
            }
        }
    }

    #[test]
    fn feature_names_round_trip() {
        for f in FeatureId::ALL {
            assert_eq!(f.name().parse::<FeatureId>().unwrap(), f);
        }
        assert_eq!(FeatureId::ALL.len(), NUM_FEATURES);
    }

    proptest::proptest! {
        #[test]
        fn percentile_is_permutation_invariant(mut v in proptest::collection::vec(0u8..6, 1..20), k in 0usize..20) {
            let v: Vec<f64> = { let t: Vec<f64> = v.drain(..).map(f64::from).collect(); t };
            let value = v[k % v.len()];
            let p = percentile_rank(value, &v);
            let mut rev = v.clone();
            rev.reverse();
            proptest::prop_assert_eq!(p, percentile_rank(value, &rev));
            proptest::prop_assert!((0.0..=1.0).contains(&p));
            let agg = PeerAggregates::new(v.clone());
            proptest::prop_assert!((agg.relative(value, true).0 - p).abs() < 1e-15);
        }
    }
}
