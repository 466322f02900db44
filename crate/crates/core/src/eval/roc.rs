//! ROC curves by threshold sweep and AUC by the Mann-Whitney rank formula.
//!
//! Both routes count in integers (doubled where ties contribute a half) and
//! divide once at the end, so they agree to the last bit.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Thresholds in sweep order, starting with `+inf`.
    pub thresholds: Vec<f64>,
    /// `(false positive rate, true positive rate)` for each threshold.
    pub points: Vec<(f64, f64)>,
    /// Trapezoidal area under `points`.
    pub auc: f64,
    /// Rank-formula AUC with midranks for ties.
    pub rank_auc: f64,
}

fn class_counts(scores: &[f64], labels: &[u8]) -> Result<(u64, u64)> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numerical("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count() as u64;
    let neg = labels.len() as u64 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::DegenerateLabels("AUC needs both classes".into()));
    }
    Ok((pos, neg))
}

/// Twice the Mann-Whitney U statistic of the positives.
fn doubled_u(scores: &[f64], labels: &[u8], pos: u64) -> u64 {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum2: u64 = 0;
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && scores[idx[end]] == scores[idx[start]] {
            end += 1;
        }
        // positions start+1..=end share the midrank (start + 1 + end) / 2
        let mid2 = (start + 1 + end) as u64;
        let npos = idx[start..end].iter().filter(|&&i| labels[i] == 1).count() as u64;
        rank_sum2 += npos * mid2;
        start = end;
    }
    rank_sum2 - pos * (pos + 1)
}

pub fn rank_auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    Ok(doubled_u(scores, labels, pos) as f64 / (2 * pos * neg) as f64)
}

/// Sweeps the decision threshold over every distinct score (plus `+inf`),
/// classifying `score >= threshold` as positive.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut thresholds = vec![f64::INFINITY];
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut area2: u64 = 0;
    let mut start = 0;
    while start < idx.len() {
        let s = scores[idx[start]];
        let mut end = start;
        let (tp0, fp0) = (tp, fp);
        while end < idx.len() && scores[idx[end]] == s {
            if labels[idx[end]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            end += 1;
        }
        area2 += (fp - fp0) * (tp + tp0);
        thresholds.push(s);
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        start = end;
    }
    let denom = (2 * pos * neg) as f64;
    let u2 = doubled_u(scores, labels, pos);
    let curve = RocCurve {
        thresholds,
        points,
        auc: area2 as f64 / denom,
        rank_auc: u2 as f64 / denom,
    };
    debug_assert!((curve.auc - curve.rank_auc).abs() <= 1e-9);
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logistic::decide;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pairwise(scores: &[f64], labels: &[u8]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &yi) in labels.iter().enumerate() {
            for (j, &yj) in labels.iter().enumerate() {
                if yi == 1 && yj == 0 {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn perfect_separation() {
        let c = roc_auc(&[0.9, 0.8, 0.3, 0.1], &[1, 1, 0, 0]).unwrap();
        assert_eq!(c.auc, 1.0);
        assert_eq!(c.rank_auc, 1.0);
        assert_eq!(c.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(c.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn all_ties_is_half() {
        let c = roc_auc(&[0.4; 6], &[1, 0, 1, 0, 0, 1]).unwrap();
        assert_eq!(c.auc, 0.5);
        assert_eq!(c.rank_auc, 0.5);
    }

    #[test]
    fn single_class_is_degenerate() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &[1, 1]), Err(Error::DegenerateLabels(_))));
    }

    #[test]
    fn random_twenty_points_match_pairwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let scores: Vec<f64> = (0..20).map(|_| (rng.random_range(0..8) as f64) / 8.0).collect();
        let mut labels: Vec<u8> = (0..20).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let c = roc_auc(&scores, &labels).unwrap();
        let oracle = pairwise(&scores, &labels);
        assert!((c.auc - oracle).abs() < 1e-12);
        assert!((c.rank_auc - oracle).abs() < 1e-12);
    }

    #[test]
    fn points_match_decision_rule_counts() {
        let scores = [0.2, 0.7, 0.7, 0.1, 0.9, 0.4];
        let labels = [0, 1, 0, 0, 1, 1];
        let c = roc_auc(&scores, &labels).unwrap();
        for (t, &(fpr, tpr)) in c.thresholds.iter().zip(&c.points) {
            let (mut tp, mut fp) = (0.0, 0.0);
            for (s, y) in scores.iter().zip(labels) {
                if decide(*s, *t) == 1 {
                    if y == 1 {
                        tp += 1.0
                    } else {
                        fp += 1.0
                    }
                }
            }
            assert_eq!((fp / 3.0, tp / 3.0), (fpr, tpr));
        }
    }

    proptest::proptest! {
        #[test]
        fn complement_and_monotone_invariance(
            raw in proptest::collection::vec((0u8..10, 0u8..2), 2..40)
        ) {
            let scores: Vec<f64> = raw.iter().map(|r| r.0 as f64).collect();
            let mut labels: Vec<u8> = raw.iter().map(|r| r.1).collect();
            labels[0] = 0;
            labels[1] = 1;
            let a = roc_auc(&scores, &labels).unwrap();
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let b = rank_auc(&neg, &labels).unwrap();
            proptest::prop_assert_eq!(a.rank_auc + b, 1.0);
            let warped: Vec<f64> = scores.iter().map(|s| (s * 0.7).exp() - 3.0).collect();
            proptest::prop_assert_eq!(rank_auc(&warped, &labels).unwrap(), a.rank_auc);
            proptest::prop_assert_eq!(a.auc, a.rank_auc);
            for w in a.points.windows(2) {
                proptest::prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
        }
    }
}
