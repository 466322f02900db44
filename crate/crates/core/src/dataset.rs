//! Lead/lag prediction problems and their flattened design matrices.
//!
//! A problem with lag `l` and lead `d` uses weeks `1..=l` of every learner
//! still active after week `l` to predict the persistence label of week
//! `l + d`. Columns are week-major: all 27 features of week 1, then week 2,
//! and so on.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cohort::{Cohort, CohortTable};
use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureMatrix, NUM_FEATURES};
use crate::linalg::Matrix;
use crate::tsv::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProblemSpec {
    pub lag: u32,
    pub lead: u32,
}

impl ProblemSpec {
    pub fn new(lag: u32, lead: u32) -> Self {
        assert!(lag >= 1 && lead >= 1, "lag and lead are at least 1");
        ProblemSpec { lag, lead }
    }

    pub fn predicted_week(&self) -> u32 {
        self.lag + self.lead
    }

    pub fn num_columns(&self) -> usize {
        self.lag as usize * NUM_FEATURES
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lag{}_week{}", self.lag, self.predicted_week())
    }
}

/// Every problem whose predicted week lies within the course, ordered by lag
/// then predicted week.
pub fn enumerate_problems(num_weeks: u32) -> Vec<ProblemSpec> {
    (1..num_weeks)
        .flat_map(|lag| (1..=num_weeks - lag).map(move |lead| ProblemSpec::new(lag, lead)))
        .collect()
}

/// Flattened column `(week, feature)` for column index `col`.
pub fn column_source(col: usize) -> (u32, FeatureId) {
    ((col / NUM_FEATURES) as u32 + 1, FeatureId::ALL[col % NUM_FEATURES])
}

pub fn column_name(col: usize) -> String {
    let (w, f) = column_source(col);
    format!("w{w}_{f}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub spec: ProblemSpec,
    pub learner_ids: Vec<String>,
    pub x: Matrix,
    pub labels: Vec<u8>,
}

impl DesignMatrix {
    pub fn rows(&self) -> usize {
        self.labels.len()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub fn select(&self, idx: &[usize]) -> DesignMatrix {
        DesignMatrix {
            spec: self.spec,
            learner_ids: idx.iter().map(|&i| self.learner_ids[i].clone()).collect(),
            x: self.x.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("learner_id\tlabel");
        for c in 0..self.x.cols() {
            out.push('\t');
            out.push_str(&column_name(c));
        }
        out.push('\n');
        for (i, row) in self.x.iter_rows().enumerate() {
            out.push_str(&self.learner_ids[i]);
            out.push('\t');
            out.push_str(&self.labels[i].to_string());
            for v in row {
                out.push('\t');
                out.push_str(&fmt_f64(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Restricts rows to one cohort.
#[derive(Debug, Clone, Copy)]
pub struct CohortFilter<'a> {
    pub table: &'a CohortTable,
    pub cohort: Cohort,
}

/// Builds the design matrix for `spec`. Learners whose stopout week is at or
/// before the lag are excluded; the label is `x1` at the predicted week.
pub fn flatten(
    features: &FeatureMatrix,
    spec: ProblemSpec,
    cohort: Option<CohortFilter<'_>>,
) -> Result<DesignMatrix> {
    if spec.predicted_week() > features.num_weeks {
        return Err(Error::Config(format!(
            "problem {spec} predicts past week {}",
            features.num_weeks
        )));
    }
    let cols = spec.num_columns();
    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for l in &features.learners {
        if let Some(f) = cohort {
            if f.table.get(&l.learner_id) != Some(f.cohort) {
                continue;
            }
        }
        if l.stopout_week <= spec.lag {
            continue;
        }
        for w in 1..=spec.lag {
            data.extend_from_slice(l.week(w));
        }
        ids.push(l.learner_id.clone());
        labels.push(l.label(spec.predicted_week()));
    }
    if ids.is_empty() {
        return Err(Error::InsufficientData(format!("no eligible learners for {spec}")));
    }
    Ok(DesignMatrix {
        spec,
        x: Matrix::from_vec(ids.len(), cols, data)?,
        learner_ids: ids,
        labels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: DesignMatrix,
    pub test: DesignMatrix,
}

/// Seeded split stratified by label. Each class contributes its share of
/// `round(ratio * n)` training rows; a class with at least two rows keeps at
/// least one row on each side.
pub fn split(dm: &DesignMatrix, ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Config(format!("split ratio {ratio} outside (0, 1)")));
    }
    let n = dm.rows();
    if n < 2 {
        return Err(Error::InsufficientData(format!("{n} rows cannot be split")));
    }
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in dm.labels.iter().enumerate() {
        classes[y as usize].push(i);
    }
    if classes.iter().any(Vec::is_empty) {
        return Err(Error::DegenerateLabels(format!(
            "{} has a single label class",
            dm.spec
        )));
    }
    let total = (ratio * n as f64).round() as usize;
    let quota: Vec<f64> = classes.iter().map(|c| ratio * c.len() as f64).collect();
    let mut take: Vec<usize> = quota.iter().map(|q| q.floor() as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (quota[b] - quota[b].floor()).total_cmp(&(quota[a] - quota[a].floor())));
    let mut remaining = total.saturating_sub(take.iter().sum());
    for &c in order.iter().cycle().take(2 * remaining.max(1)) {
        if remaining == 0 {
            break;
        }
        if take[c] < classes[c].len() {
            take[c] += 1;
            remaining -= 1;
        }
    }
    for (c, t) in take.iter_mut().enumerate() {
        if classes[c].len() >= 2 {
            *t = (*t).clamp(1, classes[c].len() - 1);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, idx) in classes.iter_mut().enumerate() {
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..take[c]]);
        test.extend_from_slice(&idx[take[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train: dm.select(&train),
        test: dm.select(&test),
    })
}

/// Per-column centering and scaling fitted on a training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    /// Population standard deviation; 1 for zero-variance columns, which
    /// are only centered.
    pub scale: Vec<f64>,
}

impl NormStats {
    pub fn fit(x: &Matrix) -> Self {
        let (n, p) = (x.rows(), x.cols());
        let mut mean = vec![0.0; p];
        for r in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        let nf = n.max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= nf);
        let mut var = vec![0.0; p];
        for r in x.iter_rows() {
            for j in 0..p {
                var[j] += (r[j] - mean[j]).powi(2);
            }
        }
        let mut scale = vec![1.0; p];
        for j in 0..p {
            let sd = (var[j] / nf).sqrt();
            if sd > 1e-12 * mean[j].abs().max(1.0) {
                scale[j] = sd;
            } else if n > 0 {
                // Constant column: center on the value itself so it maps to exact zeros.
                mean[j] = x.get(0, j);
            }
        }
        NormStats { mean, scale }
    }

    pub fn identity(p: usize) -> Self {
        NormStats {
            mean: vec![0.0; p],
            scale: vec![1.0; p],
        }
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - m) / s;
        }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            self.apply_row(out.row_mut(i));
        }
        out
    }
}

/// Z-scores both matrices with statistics from `train` only.
pub fn normalize(train: &DesignMatrix, test: &DesignMatrix) -> (DesignMatrix, DesignMatrix, NormStats) {
    let stats = NormStats::fit(&train.x);
    let mut tr = train.clone();
    let mut te = test.clone();
    tr.x = stats.apply(&train.x);
    te.x = stats.apply(&test.x);
    (tr, te, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::LearnerFeatures;

    fn matrix(stopouts: &[u32], weeks: u32) -> FeatureMatrix {
        FeatureMatrix {
            num_weeks: weeks,
            learners: stopouts
                .iter()
                .enumerate()
                .map(|(i, &s)| LearnerFeatures {
                    learner_id: format!("l{i:03}"),
                    stopout_week: s,
                    weeks: (1..=weeks)
                        .map(|w| {
                            let mut v = [0.0; NUM_FEATURES];
                            for (k, x) in v.iter_mut().enumerate() {
                                *x = (i * 1000 + w as usize * 100 + k) as f64;
                            }
                            v
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn ninety_one_problems() {
        let p = enumerate_problems(14);
        assert_eq!(p.len(), 91);
        for lag in 1..14 {
            assert_eq!(p.iter().filter(|s| s.lag == lag).count(), 14 - lag as usize);
        }
        assert!(p.iter().all(|s| s.predicted_week() <= 14));
        assert_eq!(ProblemSpec::new(3, 5).predicted_week(), 8);
        assert_eq!(enumerate_problems(2), vec![ProblemSpec::new(1, 1)]);
    }

    #[test]
    fn flatten_columns_and_exclusion() {
        let fm = matrix(&[2, 5, 15, 1, 4], 14);
        let dm = flatten(&fm, ProblemSpec::new(2, 11), None).unwrap();
        assert_eq!(dm.x.cols(), 54);
        // stopout 2 and 1 are excluded under lag 2
        assert_eq!(dm.learner_ids, vec!["l001", "l002", "l004"]);
        assert_eq!(dm.labels, vec![0, 1, 0]);
        let dm3 = flatten(&fm, ProblemSpec::new(3, 1), None).unwrap();
        assert_eq!(dm3.learner_ids, vec!["l001", "l002", "l004"]);
        let dm4 = flatten(&fm, ProblemSpec::new(4, 1), None).unwrap();
        assert_eq!(dm4.learner_ids, vec!["l001", "l002"]);
    }

    #[test]
    fn flatten_is_invertible() {
        let fm = matrix(&[9, 15, 12], 14);
        let dm = flatten(&fm, ProblemSpec::new(4, 2), None).unwrap();
        for (i, id) in dm.learner_ids.iter().enumerate() {
            let l = fm.find(id).unwrap();
            for c in 0..dm.x.cols() {
                let (w, f) = column_source(c);
                assert_eq!(dm.x.get(i, c), l.week(w)[f.index()]);
            }
        }
        assert_eq!(column_name(27), "w2_x2");
        assert_eq!(column_name(26), "w1_x210");
    }

    #[test]
    fn ten_learners_lag_one() {
        let fm = matrix(&[15; 10], 14);
        let dm = flatten(&fm, ProblemSpec::new(1, 1), None).unwrap();
        assert_eq!((dm.x.rows(), dm.x.cols()), (10, 27));
    }

    #[test]
    fn flatten_empty_is_insufficient() {
        let fm = matrix(&[2, 2], 14);
        assert!(matches!(
            flatten(&fm, ProblemSpec::new(3, 1), None),
            Err(Error::InsufficientData(_))
        ));
    }

    fn labelled(labels: &[u8]) -> DesignMatrix {
        DesignMatrix {
            spec: ProblemSpec::new(1, 1),
            learner_ids: (0..labels.len()).map(|i| format!("l{i}")).collect(),
            x: Matrix::from_vec(labels.len(), 1, (0..labels.len()).map(|i| i as f64).collect()).unwrap(),
            labels: labels.to_vec(),
        }
    }

    #[test]
    fn stratified_split_arithmetic() {
        let dm = labelled(&[1, 0, 1, 0, 1, 0, 1, 0, 1, 0]);
        let s = split(&dm, 0.7, 11).unwrap();
        assert_eq!(s.train.rows(), 7);
        let pos = s.train.positives();
        assert!((3..=4).contains(&pos), "{pos}");
        assert_eq!(s.test.rows(), 3);
        assert_eq!(split(&dm, 0.7, 11).unwrap(), s);
        let mut all: Vec<_> = s.train.learner_ids.iter().chain(&s.test.learner_ids).cloned().collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn split_guards() {
        assert!(matches!(split(&labelled(&[1, 1, 1]), 0.7, 0), Err(Error::DegenerateLabels(_))));
        assert!(matches!(split(&labelled(&[1]), 0.7, 0), Err(Error::InsufficientData(_))));
        let s = split(&labelled(&[1, 1, 0, 0]), 0.9, 3).unwrap();
        assert_eq!(s.test.positives(), 1);
        assert_eq!(s.test.rows(), 2);
    }

    #[test]
    fn normalization_examples() {
        let train = Matrix::from_rows(&[vec![8.0, 3.0], vec![12.0, 3.0]]).unwrap();
        let stats = NormStats::fit(&train);
        assert_eq!(stats.mean, vec![10.0, 3.0]);
        assert_eq!(stats.scale, vec![2.0, 1.0]);
        let mut row = vec![14.0, 5.0];
        stats.apply_row(&mut row);
        assert_eq!(row, vec![2.0, 2.0]);
        let t = stats.apply(&train);
        assert_eq!(t.row(0), &[-1.0, 0.0]);
    }

    proptest::proptest! {
        #[test]
        fn normalized_train_has_unit_moments(rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 3), 2..30)) {
            let m = Matrix::from_rows(&rows).unwrap();
            let stats = NormStats::fit(&m);
            let z = stats.apply(&m);
            let n = z.rows() as f64;
            for j in 0..3 {
                let mean: f64 = (0..z.rows()).map(|i| z.get(i, j)).sum::<f64>() / n;
                let var: f64 = (0..z.rows()).map(|i| (z.get(i, j) - mean).powi(2)).sum::<f64>() / n;
                proptest::prop_assert!(mean.abs() < 1e-9);
                proptest::prop_assert!((var.sqrt() - 1.0).abs() < 1e-9 || stats.scale[j] == 1.0);
            }
        }
    }
}
