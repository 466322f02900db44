//! Stratified k-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::NormStats;
use crate::error::{Error, Result};
use crate::eval::roc::rank_auc;
use crate::linalg::Matrix;
use crate::logistic::{Classifier, Scorer};

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Folds actually used; below the request when the minority class is
    /// too small.
    pub k: usize,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
    pub warning: Option<String>,
}

/// Assigns rows to `k` folds: each class is shuffled, the classes are
/// concatenated, and rows are dealt round-robin. Every fold receives at least
/// one row of each class. Returns the folds and a warning when `k` had to be
/// reduced.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Result<(Vec<Vec<usize>>, Option<String>)> {
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        classes[y as usize].push(i);
    }
    let minority = classes[0].len().min(classes[1].len());
    if minority < 2 || k < 2 {
        return Err(Error::DegenerateLabels(format!(
            "cross-validation needs at least 2 rows of each class (minority has {minority})"
        )));
    }
    let (k_used, warning) = if minority < k {
        (
            minority,
            Some(format!("reduced cross-validation from {k} to {minority} folds")),
        )
    } else {
        (k, None)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k_used];
    let mut pos = 0;
    for class in classes.iter_mut() {
        class.shuffle(&mut rng);
        for &i in class.iter() {
            folds[pos % k_used].push(i);
            pos += 1;
        }
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    Ok((folds, warning))
}

/// Trains on `k - 1` folds (normalized with their own statistics) and scores
/// the held-out fold, for every fold.
pub fn cross_validate<C: Classifier>(
    classifier: &C,
    x: &Matrix,
    y: &[u8],
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    let (folds, warning) = stratified_folds(y, k, seed)?;
    let mut fold_aucs = Vec::with_capacity(folds.len());
    let mut in_test = vec![false; y.len()];
    for fold in &folds {
        in_test.iter_mut().for_each(|v| *v = false);
        fold.iter().for_each(|&i| in_test[i] = true);
        let train_idx: Vec<usize> = (0..y.len()).filter(|&i| !in_test[i]).collect();
        let xtr = x.select_rows(&train_idx);
        let stats = NormStats::fit(&xtr);
        let xtr = stats.apply(&xtr);
        let ytr: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
        let model = classifier.fit(&xtr, &ytr)?;
        let xte = stats.apply(&x.select_rows(fold));
        let yte: Vec<u8> = fold.iter().map(|&i| y[i]).collect();
        fold_aucs.push(rank_auc(&model.score_all(&xte)?, &yte)?);
    }
    let mean_auc = fold_aucs.iter().sum::<f64>() / fold_aucs.len() as f64;
    Ok(CvResult {
        k: folds.len(),
        fold_aucs,
        mean_auc,
        warning,
    })
}
