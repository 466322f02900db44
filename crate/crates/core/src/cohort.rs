//! Collaboration cohorts, assigned from whole-course forum and wiki totals.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::Result;
use crate::event_store::CourseDataset;
use crate::features::{collaboration_totals, FeatureReport, StopoutProfile};
use crate::tsv::{self, parse_err};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cohort {
    PassiveCollaborator,
    WikiContributor,
    ForumContributor,
    FullyCollaborative,
}

impl Cohort {
    pub const ALL: [Cohort; 4] = [
        Cohort::PassiveCollaborator,
        Cohort::WikiContributor,
        Cohort::ForumContributor,
        Cohort::FullyCollaborative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Cohort::PassiveCollaborator => "passive_collaborator",
            Cohort::WikiContributor => "wiki_contributor",
            Cohort::ForumContributor => "forum_contributor",
            Cohort::FullyCollaborative => "fully_collaborative",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Cohort {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Cohort::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown cohort {s:?}"))
    }
}

/// `forum_posts` counts authored forum content (posts and responses);
/// `wiki_edits` counts wiki edits. Both are whole-course totals.
pub fn assign_cohort(forum_posts: u64, wiki_edits: u64) -> Cohort {
    match (forum_posts > 0, wiki_edits > 0) {
        (false, false) => Cohort::PassiveCollaborator,
        (false, true) => Cohort::WikiContributor,
        (true, false) => Cohort::ForumContributor,
        (true, true) => Cohort::FullyCollaborative,
    }
}

/// Cohort of every participating learner, keyed by learner id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CohortTable(pub BTreeMap<String, Cohort>);

impl CohortTable {
    pub fn build(dataset: &CourseDataset, features: &FeatureReport) -> Self {
        Self::from_profiles(dataset, &features.profiles)
    }

    pub fn from_profiles(dataset: &CourseDataset, profiles: &[StopoutProfile]) -> Self {
        CohortTable(
            profiles
                .iter()
                .filter(|p| p.participated)
                .map(|p| {
                    let (forum, wiki) = collaboration_totals(dataset.collaborations_of(p.learner));
                    (dataset.learner_id(p.learner).to_owned(), assign_cohort(forum, wiki))
                })
                .collect(),
        )
    }

    pub fn get(&self, learner_id: &str) -> Option<Cohort> {
        self.0.get(learner_id).copied()
    }

    pub fn sizes(&self) -> [usize; 4] {
        let mut s = [0; 4];
        for c in self.0.values() {
            s[c.index()] += 1;
        }
        s
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("learner_id\tcohort\n");
        for (id, c) in &self.0 {
            out.push_str(&format!("{id}\t{c}\n"));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut map = BTreeMap::new();
        let lines = tsv::read_lines(path)?;
        let mut it = lines.into_iter().filter(|(_, l)| !l.is_empty());
        match it.next() {
            Some((_, h)) if h == "learner_id\tcohort" => {}
            _ => return Err(parse_err(path, 1, "expected header learner_id\\tcohort")),
        }
        for (n, line) in it {
            let (id, c) = line
                .split_once('\t')
                .ok_or_else(|| parse_err(path, n, "expected 2 fields"))?;
            let c: Cohort = c.parse().map_err(|e: String| parse_err(path, n, e))?;
            if map.insert(id.to_owned(), c).is_some() {
                return Err(parse_err(path, n, format!("duplicate learner {id}")));
            }
        }
        Ok(CohortTable(map))
    }
}
