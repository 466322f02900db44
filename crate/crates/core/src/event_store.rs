//! Normalized course event store: parsing of the line-delimited event files
//! and the course calendar into an immutable [`CourseDataset`].
//!
//! Event files are UTF-8, tab-separated, one record per line. The first line
//! is a header naming the columns (any order):
//!
//! ```text
//! table learner_id timestamp resource_id resource_kind problem_id correct assignment_kind collab_kind text_length
//! ```
//!
//! `table` is one of `observed`, `submission`, `collaboration`; fields that do
//! not apply to a table are left empty. Malformed lines and records stamped
//! before the course start are skipped and tallied in [`IngestReport`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tsv::{self, parse_err};

pub const WEEK_SECONDS: i64 = 604_800;
/// Longest credited gap between two consecutive observed events.
pub const SESSION_CAP: i64 = 3_600;
/// Duration credited to a learner's final observed event.
pub const DEFAULT_TAIL: i64 = 60;

pub const EVENT_COLUMNS: [&str; 10] = [
    "table",
    "learner_id",
    "timestamp",
    "resource_id",
    "resource_kind",
    "problem_id",
    "correct",
    "assignment_kind",
    "collab_kind",
    "text_length",
];

/// Dense index of an interned learner id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LearnerIdx(pub u32);

impl LearnerIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

macro_rules! text_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(format!("unknown {} {other:?}", stringify!($name))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

text_enum!(ResourceKind {
    Lecture => "lecture",
    Book => "book",
    Wiki => "wiki",
    Forum => "forum",
    Problem => "problem",
    Other => "other",
});

text_enum!(AssignmentKind {
    Homework => "homework",
    Lab => "lab",
    Exam => "exam",
    Other => "other",
});

text_enum!(CollabKind {
    ForumPost => "forum_post",
    ForumResponse => "forum_response",
    WikiEdit => "wiki_edit",
});

#[derive(Debug, Clone, PartialEq)]
pub struct ObservedEvent {
    pub learner: LearnerIdx,
    pub timestamp: i64,
    pub resource_id: String,
    pub resource_kind: ResourceKind,
    /// Seconds credited to this event, see [`derive_durations`].
    pub duration: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmissionEvent {
    pub learner: LearnerIdx,
    pub timestamp: i64,
    pub problem_id: String,
    pub correct: bool,
    pub assignment_kind: AssignmentKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollaborationEvent {
    pub learner: LearnerIdx,
    pub timestamp: i64,
    pub kind: CollabKind,
    pub text_length: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemMeta {
    pub assignment_kind: AssignmentKind,
    pub week_assigned: u32,
    pub due_timestamp: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CourseCalendar {
    pub course_start: i64,
    pub num_weeks: u32,
    pub problems: BTreeMap<String, ProblemMeta>,
}

/// 1-based week containing `timestamp`; timestamps past the final week clamp
/// to `num_weeks`.
pub fn week_of(timestamp: i64, calendar: &CourseCalendar) -> Result<u32> {
    if timestamp < calendar.course_start {
        return Err(Error::BeforeCourseStart {
            timestamp,
            course_start: calendar.course_start,
        });
    }
    let week = (timestamp - calendar.course_start) / WEEK_SECONDS + 1;
    Ok(week.min(calendar.num_weeks as i64) as u32)
}

impl CourseCalendar {
    pub fn new(course_start: i64, num_weeks: u32) -> Result<Self> {
        if num_weeks < 2 {
            return Err(Error::Config(format!(
                "calendar needs at least 2 weeks, got {num_weeks}"
            )));
        }
        Ok(CourseCalendar {
            course_start,
            num_weeks,
            problems: BTreeMap::new(),
        })
    }

    pub fn add_problem(&mut self, id: impl Into<String>, meta: ProblemMeta) -> Result<()> {
        let id = id.into();
        if meta.due_timestamp < self.course_start {
            return Err(Error::Config(format!(
                "problem {id} is due before the course starts"
            )));
        }
        if meta.week_assigned == 0 || meta.week_assigned > self.num_weeks {
            return Err(Error::Config(format!(
                "problem {id} assigned to week {} outside 1..={}",
                meta.week_assigned, self.num_weeks
            )));
        }
        self.problems.insert(id, meta);
        Ok(())
    }

    /// First second after the final week.
    pub fn course_end(&self) -> i64 {
        self.course_start + self.num_weeks as i64 * WEEK_SECONDS
    }

    pub fn week_start(&self, week: u32) -> i64 {
        self.course_start + (week as i64 - 1) * WEEK_SECONDS
    }

    pub fn week_of(&self, timestamp: i64) -> Result<u32> {
        week_of(timestamp, self)
    }

    /// Number of problems of `kind` assigned to `week`.
    pub fn problems_in_week(&self, week: u32, kind: AssignmentKind) -> usize {
        self.problems
            .values()
            .filter(|m| m.week_assigned == week && m.assignment_kind == kind)
            .count()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let lines = tsv::read_lines(path)?;
        let mut it = lines.into_iter().filter(|(_, l)| !l.trim().is_empty());
        let expect_header = |got: Option<(usize, String)>, want: &[&str]| -> Result<usize> {
            match got {
                Some((n, l)) if l.split('\t').eq(want.iter().copied()) => Ok(n),
                Some((n, l)) => Err(parse_err(path, n, format!("expected header {want:?}, got {l:?}"))),
                None => Err(parse_err(path, 0, format!("missing header {want:?}"))),
            }
        };
        expect_header(it.next(), &["course_start", "num_weeks"])?;
        let (n, values) = it
            .next()
            .ok_or_else(|| parse_err(path, 2, "missing course_start/num_weeks values"))?;
        let fields: Vec<&str> = values.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(path, n, "expected 2 fields"));
        }
        let course_start = fields[0]
            .parse::<i64>()
            .map_err(|_| parse_err(path, n, "invalid course_start"))?;
        let num_weeks = fields[1]
            .parse::<u32>()
            .map_err(|_| parse_err(path, n, "invalid num_weeks"))?;
        let mut cal = CourseCalendar::new(course_start, num_weeks)
            .map_err(|e| parse_err(path, n, e.to_string()))?;
        if let Some(header) = it.next() {
            expect_header(Some(header), &PROBLEM_COLUMNS)?;
        }
        for (n, line) in it {
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(parse_err(path, n, "expected 4 fields"));
            }
            let meta = ProblemMeta {
                assignment_kind: f[1].parse().map_err(|e: String| parse_err(path, n, e))?,
                week_assigned: f[2]
                    .parse()
                    .map_err(|_| parse_err(path, n, "invalid week_assigned"))?,
                due_timestamp: f[3]
                    .parse()
                    .map_err(|_| parse_err(path, n, "invalid due_timestamp"))?,
            };
            if cal.problems.contains_key(f[0]) {
                return Err(parse_err(path, n, format!("duplicate problem {}", f[0])));
            }
            cal.add_problem(f[0], meta)
                .map_err(|e| parse_err(path, n, e.to_string()))?;
        }
        Ok(cal)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = format!(
            "course_start\tnum_weeks\n{}\t{}\n{}\n",
            self.course_start,
            self.num_weeks,
            PROBLEM_COLUMNS.join("\t")
        );
        for (id, m) in &self.problems {
            out.push_str(&format!(
                "{id}\t{}\t{}\t{}\n",
                m.assignment_kind, m.week_assigned, m.due_timestamp
            ));
        }
        out
    }
}

const PROBLEM_COLUMNS: [&str; 4] = ["problem_id", "assignment_kind", "week_assigned", "due_timestamp"];

/// Tallies from one ingestion run. `lines == accepted() + rejected()`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub lines: usize,
    pub observed: usize,
    pub submissions: usize,
    pub collaborations: usize,
    pub malformed: usize,
    pub before_start: usize,
    /// Accepted records stamped after the final week (clamped to it).
    pub past_end: usize,
}

impl IngestReport {
    pub fn accepted(&self) -> usize {
        self.observed + self.submissions + self.collaborations
    }

    pub fn rejected(&self) -> usize {
        self.malformed + self.before_start
    }

    pub fn to_tsv(&self) -> String {
        format!(
            "metric\tcount\nlines\t{}\nobserved\t{}\nsubmissions\t{}\ncollaborations\t{}\nmalformed\t{}\nbefore_start\t{}\npast_end\t{}\n",
            self.lines,
            self.observed,
            self.submissions,
            self.collaborations,
            self.malformed,
            self.before_start,
            self.past_end
        )
    }

    fn merge(&mut self, o: &IngestReport) {
        self.lines += o.lines;
        self.observed += o.observed;
        self.submissions += o.submissions;
        self.collaborations += o.collaborations;
        self.malformed += o.malformed;
        self.before_start += o.before_start;
        self.past_end += o.past_end;
    }
}

/// Immutable ingested course. Every event table is sorted by
/// `(learner, timestamp, ...)`; learners are interned in lexicographic order
/// of their ids.
#[derive(Debug, Clone)]
pub struct CourseDataset {
    pub calendar: CourseCalendar,
    pub learners: Vec<String>,
    pub observed: Vec<ObservedEvent>,
    pub submissions: Vec<SubmissionEvent>,
    pub collaborations: Vec<CollaborationEvent>,
    pub report: IngestReport,
    observed_ranges: Vec<Range<usize>>,
    submission_ranges: Vec<Range<usize>>,
    collaboration_ranges: Vec<Range<usize>>,
}

enum RawRecord {
    Observed {
        learner: String,
        timestamp: i64,
        resource_id: String,
        resource_kind: ResourceKind,
    },
    Submission {
        learner: String,
        timestamp: i64,
        problem_id: String,
        correct: bool,
        assignment_kind: Option<AssignmentKind>,
    },
    Collaboration {
        learner: String,
        timestamp: i64,
        kind: CollabKind,
        text_length: u32,
    },
}

impl RawRecord {
    fn learner(&self) -> &str {
        match self {
            RawRecord::Observed { learner, .. }
            | RawRecord::Submission { learner, .. }
            | RawRecord::Collaboration { learner, .. } => learner,
        }
    }

    fn timestamp(&self) -> i64 {
        match self {
            RawRecord::Observed { timestamp, .. }
            | RawRecord::Submission { timestamp, .. }
            | RawRecord::Collaboration { timestamp, .. } => *timestamp,
        }
    }
}

struct Columns([usize; 10]);

impl Columns {
    fn from_header(path: &Path, header: &str) -> Result<Self> {
        let names: Vec<&str> = header.split('\t').collect();
        let mut idx = [usize::MAX; 10];
        for (pos, name) in names.iter().enumerate() {
            match EVENT_COLUMNS.iter().position(|c| c == name) {
                Some(k) if idx[k] == usize::MAX => idx[k] = pos,
                Some(_) => return Err(parse_err(path, 1, format!("duplicate column {name:?}"))),
                None => return Err(parse_err(path, 1, format!("unknown column {name:?}"))),
            }
        }
        if let Some(k) = idx.iter().position(|&i| i == usize::MAX) {
            return Err(parse_err(
                path,
                1,
                format!("header lacks column {:?}", EVENT_COLUMNS[k]),
            ));
        }
        Ok(Columns(idx))
    }

    fn parse<'a>(&self, fields: &[&'a str]) -> std::result::Result<RawRecord, String> {
        let get = |k: usize| fields[self.0[k]];
        let required = |k: usize| -> std::result::Result<&'a str, String> {
            let v = fields[self.0[k]];
            if v.is_empty() {
                Err(format!("empty {}", EVENT_COLUMNS[k]))
            } else {
                Ok(v)
            }
        };
        let learner = required(1)?.to_owned();
        let timestamp: i64 = required(2)?
            .parse()
            .map_err(|_| format!("invalid timestamp {:?}", get(2)))?;
        match get(0) {
            "observed" => Ok(RawRecord::Observed {
                learner,
                timestamp,
                resource_id: required(3)?.to_owned(),
                resource_kind: required(4)?.parse()?,
            }),
            "submission" => Ok(RawRecord::Submission {
                learner,
                timestamp,
                problem_id: required(5)?.to_owned(),
                correct: match required(6)? {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => return Err(format!("invalid correct flag {other:?}")),
                },
                assignment_kind: match get(7) {
                    "" => None,
                    k => Some(k.parse()?),
                },
            }),
            "collaboration" => Ok(RawRecord::Collaboration {
                learner,
                timestamp,
                kind: required(8)?.parse()?,
                text_length: required(9)?
                    .parse()
                    .map_err(|_| format!("invalid text_length {:?}", get(9)))?,
            }),
            other => Err(format!("unknown table {other:?}")),
        }
    }
}

fn parse_event_file(path: &Path, course_start: i64) -> Result<(Vec<RawRecord>, IngestReport)> {
    let lines = tsv::read_lines(path)?;
    let mut report = IngestReport::default();
    let mut records = Vec::new();
    let mut it = lines.into_iter().filter(|(_, l)| !l.is_empty());
    let Some((_, header)) = it.next() else {
        return Ok((records, report));
    };
    let cols = Columns::from_header(path, &header)?;
    for (_, line) in it {
        report.lines += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != EVENT_COLUMNS.len() {
            report.malformed += 1;
            continue;
        }
        match cols.parse(&fields) {
            Ok(rec) if rec.timestamp() < course_start => report.before_start += 1,
            Ok(rec) => records.push(rec),
            Err(_) => report.malformed += 1,
        }
    }
    Ok((records, report))
}

/// Parses every event file (in parallel) against the calendar and builds the
/// normalized dataset.
pub fn ingest(paths: &[PathBuf], calendar_path: &Path) -> Result<CourseDataset> {
    let calendar = CourseCalendar::load(calendar_path)?;
    ingest_with_calendar(paths, calendar)
}

pub fn ingest_with_calendar(paths: &[PathBuf], calendar: CourseCalendar) -> Result<CourseDataset> {
    let parsed: Vec<(Vec<RawRecord>, IngestReport)> = paths
        .par_iter()
        .map(|p| parse_event_file(p, calendar.course_start))
        .collect::<Result<_>>()?;
    let mut report = IngestReport::default();
    let mut raw = Vec::new();
    for (records, r) in parsed {
        report.merge(&r);
        raw.extend(records);
    }
    CourseDataset::from_raw(calendar, raw, report)
}

impl CourseDataset {
    fn from_raw(calendar: CourseCalendar, raw: Vec<RawRecord>, mut report: IngestReport) -> Result<Self> {
        let missing: BTreeSet<&str> = raw
            .iter()
            .filter_map(|r| match r {
                RawRecord::Submission { problem_id, .. }
                    if !calendar.problems.contains_key(problem_id) =>
                {
                    Some(problem_id.as_str())
                }
                _ => None,
            })
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingCalendarEntries(
                missing.into_iter().map(str::to_owned).collect(),
            ));
        }

        let learners: Vec<String> = raw
            .iter()
            .map(|r| r.learner())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(str::to_owned)
            .collect();
        let intern = |id: &str| LearnerIdx(learners.binary_search_by(|l| l.as_str().cmp(id)).unwrap() as u32);
        let end = calendar.course_end();

        let mut observed = Vec::new();
        let mut submissions = Vec::new();
        let mut collaborations = Vec::new();
        for rec in raw {
            if rec.timestamp() >= end {
                report.past_end += 1;
            }
            match rec {
                RawRecord::Observed {
                    learner,
                    timestamp,
                    resource_id,
                    resource_kind,
                } => observed.push(ObservedEvent {
                    learner: intern(&learner),
                    timestamp,
                    resource_id,
                    resource_kind,
                    duration: 0,
                }),
                RawRecord::Submission {
                    learner,
                    timestamp,
                    problem_id,
                    correct,
                    assignment_kind,
                } => {
                    let kind = assignment_kind
                        .unwrap_or_else(|| calendar.problems[&problem_id].assignment_kind);
                    submissions.push(SubmissionEvent {
                        learner: intern(&learner),
                        timestamp,
                        problem_id,
                        correct,
                        assignment_kind: kind,
                    })
                }
                RawRecord::Collaboration {
                    learner,
                    timestamp,
                    kind,
                    text_length,
                } => collaborations.push(CollaborationEvent {
                    learner: intern(&learner),
                    timestamp,
                    kind,
                    text_length,
                }),
            }
        }
        observed.sort_by(|a, b| {
            (a.learner, a.timestamp, &a.resource_id, a.resource_kind)
                .cmp(&(b.learner, b.timestamp, &b.resource_id, b.resource_kind))
        });
        submissions.sort_by(|a, b| {
            (a.learner, a.timestamp, &a.problem_id, a.correct, a.assignment_kind)
                .cmp(&(b.learner, b.timestamp, &b.problem_id, b.correct, b.assignment_kind))
        });
        collaborations.sort_by(|a, b| {
            (a.learner, a.timestamp, a.kind, a.text_length)
                .cmp(&(b.learner, b.timestamp, b.kind, b.text_length))
        });
        derive_durations(&mut observed);

        report.observed = observed.len();
        report.submissions = submissions.len();
        report.collaborations = collaborations.len();

        let n = learners.len();
        Ok(CourseDataset {
            observed_ranges: ranges(n, observed.iter().map(|e| e.learner)),
            submission_ranges: ranges(n, submissions.iter().map(|e| e.learner)),
            collaboration_ranges: ranges(n, collaborations.iter().map(|e| e.learner)),
            calendar,
            learners,
            observed,
            submissions,
            collaborations,
            report,
        })
    }

    pub fn num_learners(&self) -> usize {
        self.learners.len()
    }

    pub fn learner_id(&self, l: LearnerIdx) -> &str {
        &self.learners[l.index()]
    }

    pub fn observed_of(&self, l: LearnerIdx) -> &[ObservedEvent] {
        &self.observed[self.observed_ranges[l.index()].clone()]
    }

    pub fn submissions_of(&self, l: LearnerIdx) -> &[SubmissionEvent] {
        &self.submissions[self.submission_ranges[l.index()].clone()]
    }

    pub fn collaborations_of(&self, l: LearnerIdx) -> &[CollaborationEvent] {
        &self.collaborations[self.collaboration_ranges[l.index()].clone()]
    }

    pub fn learner_indices(&self) -> impl Iterator<Item = LearnerIdx> {
        (0..self.learners.len() as u32).map(LearnerIdx)
    }

    /// Canonical export in the event-file format: observed, then submission,
    /// then collaboration rows, each in the dataset's sort order. Re-ingesting
    /// the dump yields the same dataset.
    pub fn dump(&self) -> String {
        let mut out = EVENT_COLUMNS.join("\t");
        out.push('\n');
        for e in &self.observed {
            out.push_str(&format!(
                "observed\t{}\t{}\t{}\t{}\t\t\t\t\t\n",
                self.learner_id(e.learner),
                e.timestamp,
                e.resource_id,
                e.resource_kind
            ));
        }
        for e in &self.submissions {
            out.push_str(&format!(
                "submission\t{}\t{}\t\t\t{}\t{}\t{}\t\t\n",
                self.learner_id(e.learner),
                e.timestamp,
                e.problem_id,
                u8::from(e.correct),
                e.assignment_kind
            ));
        }
        for e in &self.collaborations {
            out.push_str(&format!(
                "collaboration\t{}\t{}\t\t\t\t\t\t{}\t{}\n",
                self.learner_id(e.learner),
                e.timestamp,
                e.kind,
                e.text_length
            ));
        }
        out
    }
}

fn ranges(n: usize, learners: impl Iterator<Item = LearnerIdx>) -> Vec<Range<usize>> {
    let mut out = vec![0..0; n];
    let mut pos = 0;
    let mut start = 0;
    let mut current: Option<LearnerIdx> = None;
    for l in learners {
        if current != Some(l) {
            if let Some(c) = current {
                out[c.index()] = start..pos;
            }
            current = Some(l);
            start = pos;
        }
        pos += 1;
    }
    if let Some(c) = current {
        out[c.index()] = start..pos;
    }
    out
}

/// Credits each observed event with the gap to the learner's next event,
/// capped at [`SESSION_CAP`]; a learner's final event gets [`DEFAULT_TAIL`].
/// Events must be sorted by `(learner, timestamp)`.
pub fn derive_durations(events: &mut [ObservedEvent]) {
    for i in 0..events.len() {
        events[i].duration = match events.get(i + 1) {
            Some(next) if next.learner == events[i].learner => {
                (next.timestamp - events[i].timestamp).min(SESSION_CAP)
            }
            _ => DEFAULT_TAIL,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn cal(weeks: u32) -> CourseCalendar {
        CourseCalendar::new(1_000_000, weeks).unwrap()
    }

    fn obs(learner: u32, ts: i64) -> ObservedEvent {
        ObservedEvent {
            learner: LearnerIdx(learner),
            timestamp: ts,
            resource_id: "r".into(),
            resource_kind: ResourceKind::Lecture,
            duration: -1,
        }
    }

    #[test]
    fn week_of_boundaries() {
        let c = cal(14);
        assert_eq!(week_of(c.course_start, &c).unwrap(), 1);
        assert_eq!(week_of(c.course_start + WEEK_SECONDS - 1, &c).unwrap(), 1);
        assert_eq!(week_of(c.course_start + WEEK_SECONDS, &c).unwrap(), 2);
        assert_eq!(week_of(c.course_start + 27 * WEEK_SECONDS / 2, &c).unwrap(), 14);
        assert_eq!(week_of(c.course_start + 40 * WEEK_SECONDS, &c).unwrap(), 14);
        assert!(matches!(
            week_of(c.course_start - 1, &c),
            Err(Error::BeforeCourseStart { .. })
        ));
    }

    #[test]
    fn durations_cap_and_tail() {
        let mut ev = vec![obs(0, 0), obs(0, 30), obs(0, 7230)];
        derive_durations(&mut ev);
        let d: Vec<i64> = ev.iter().map(|e| e.duration).collect();
        assert_eq!(d, vec![30, SESSION_CAP, DEFAULT_TAIL]);

        let mut single = vec![obs(3, 10)];
        derive_durations(&mut single);
        assert_eq!(single[0].duration, DEFAULT_TAIL);

        let mut empty: Vec<ObservedEvent> = Vec::new();
        derive_durations(&mut empty);
    }

    #[test]
    fn durations_restart_per_learner() {
        let mut ev = vec![obs(0, 0), obs(0, 10), obs(1, 11), obs(1, 20)];
        derive_durations(&mut ev);
        let d: Vec<i64> = ev.iter().map(|e| e.duration).collect();
        assert_eq!(d, vec![10, DEFAULT_TAIL, 9, DEFAULT_TAIL]);
    }

    fn write_tmp(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        p
    }

    const CAL: &str = "course_start\tnum_weeks\n1000000\t2\nproblem_id\tassignment_kind\tweek_assigned\tdue_timestamp\np1\thomework\t1\t1500000\n";

    #[test]
    fn skip_and_tally_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(dir.path(), "cal.tsv", CAL);
        let header = EVENT_COLUMNS.join("\t");
        let body = format!(
            "{header}\nobserved\ta\t1000010\tr1\tlecture\t\t\t\t\t\nobserved\ta\tnot-a-time\tr1\tlecture\t\t\t\t\t\nsubmission\tb\t1000020\t\t\tp1\t1\t\t\t\n"
        );
        let e = write_tmp(dir.path(), "ev.tsv", &body);
        let ds = ingest(&[e], &c).unwrap();
        assert_eq!(ds.report.accepted(), 2);
        assert_eq!(ds.report.malformed, 1);
        assert_eq!(ds.report.lines, ds.report.accepted() + ds.report.rejected());
        assert_eq!(ds.submissions[0].assignment_kind, AssignmentKind::Homework);
    }

    #[test]
    fn empty_file_set() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(dir.path(), "cal.tsv", CAL);
        let ds = ingest(&[], &c).unwrap();
        assert_eq!(ds.num_learners(), 0);
        assert_eq!(ds.report.lines, 0);
    }

    #[test]
    fn unknown_problem_is_hard_error() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(dir.path(), "cal.tsv", CAL);
        let header = EVENT_COLUMNS.join("\t");
        let body = format!(
            "{header}\nsubmission\tb\t1000020\t\t\tzz\t1\t\t\t\nsubmission\tb\t1000030\t\t\tqq\t0\t\t\t\n"
        );
        let e = write_tmp(dir.path(), "ev.tsv", &body);
        match ingest(&[e], &c) {
            Err(Error::MissingCalendarEntries(ids)) => assert_eq!(ids, vec!["qq", "zz"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn before_start_rejected_with_tally() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(dir.path(), "cal.tsv", CAL);
        let header = EVENT_COLUMNS.join("\t");
        let body = format!("{header}\nobserved\ta\t999999\tr1\tlecture\t\t\t\t\t\n");
        let e = write_tmp(dir.path(), "ev.tsv", &body);
        let ds = ingest(&[e], &c).unwrap();
        assert_eq!(ds.report.before_start, 1);
        assert_eq!(ds.report.accepted(), 0);
    }

    #[test]
    fn header_column_order_is_free() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(dir.path(), "cal.tsv", CAL);
        let mut cols = EVENT_COLUMNS.to_vec();
        cols.reverse();
        let value = |name: &str| match name {
            "table" => "observed",
            "learner_id" => "a",
            "timestamp" => "1000010",
            "resource_id" => "r1",
            "resource_kind" => "lecture",
            _ => "",
        };
        let row: Vec<&str> = cols.iter().map(|c| value(c)).collect();
        let body = format!("{}\n{}\n", cols.join("\t"), row.join("\t"));
        let e = write_tmp(dir.path(), "ev.tsv", &body);
        let ds = ingest(&[e], &c).unwrap();
        assert_eq!(ds.report.observed, 1);
        assert_eq!(ds.observed[0].resource_kind, ResourceKind::Lecture);
    }

    #[test]
    fn bad_header_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let c = write_tmp(dir.path(), "cal.tsv", CAL);
        let e = write_tmp(dir.path(), "ev.tsv", "table\tlearner_id\n");
        assert!(matches!(ingest(&[e], &c), Err(Error::Parse { .. })));
    }
}
