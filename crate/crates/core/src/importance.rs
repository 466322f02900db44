//! Feature importance by stability selection.
//!
//! Each problem's design matrix is z-scored, then fitted `B` times by
//! l1-penalized logistic regression on random row subsamples with random
//! per-column penalty weights. A feature is selected in a fit when any of its
//! lag copies has a non-negligible coefficient; its frequency is the share of
//! fits selecting it, averaged over the cohort's problems.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::cohort::{Cohort, CohortTable};
use crate::dataset::{flatten, CohortFilter, DesignMatrix, NormStats, ProblemSpec};
use crate::error::{Error, Result};
use crate::eval::grid::CellStatus;
use crate::features::{FeatureId, FeatureMatrix, NUM_FEATURES};
use crate::linalg::{dot, Matrix};
use crate::logistic::logit;
use crate::rng::{derive_seed, rng_for};
use crate::tsv::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceConfig {
    /// Subsampled fits per problem.
    pub subsamples: usize,
    /// Share of rows in each subsample.
    pub fraction: f64,
    /// Penalty weights are drawn from `U[alpha, 1]`; the penalty on a column
    /// is `lambda / weight`.
    pub alpha: f64,
    /// Support size (in features) targeted when calibrating `lambda`.
    pub target_support: f64,
    /// Fixed penalty; calibrated per problem when absent.
    pub lambda: Option<f64>,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Problems with fewer eligible rows are skipped.
    pub min_rows: usize,
}

impl Default for ImportanceConfig {
    fn default() -> Self {
        ImportanceConfig {
            subsamples: 200,
            fraction: 0.75,
            alpha: 0.5,
            target_support: 8.0,
            lambda: None,
            epsilon: 1e-6,
            tol: 1e-7,
            max_iter: 5_000,
            min_rows: 10,
        }
    }
}

impl ImportanceConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("importance: {m}")));
        if self.subsamples == 0 {
            return bad("subsamples must be positive");
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return bad("fraction must lie in (0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.target_support >= 1.0) {
            return bad("target_support must be at least 1");
        }
        if self.lambda.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
            return bad("lambda must be positive");
        }
        if !(self.epsilon >= 0.0 && self.tol > 0.0) || self.max_iter == 0 {
            return bad("epsilon, tol and max_iter must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Fit {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest eigenvalue of `[1 X]ᵀ[1 X]`, overestimated slightly so that
/// `1 / L` stays a safe gradient step.
pub fn gram_spectral_bound(x: &Matrix) -> f64 {
    let p = x.cols();
    let mut v = vec![1.0; p + 1];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        let mut w = vec![0.0; p + 1];
        for r in x.iter_rows() {
            let s = v[0] + dot(r, &v[1..]);
            w[0] += s;
            for (wj, xj) in w[1..].iter_mut().zip(r) {
                *wj += s * xj;
            }
        }
        let next = dot(&w, &v);
        let done = (next - lambda).abs() <= 1e-9 * next.abs();
        lambda = next;
        v = w;
        if done {
            break;
        }
    }
    lambda * 1.05 + 1e-12
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Minimizes `mean(logistic loss) + Σ_j lambda / w_j · |β_j|` by accelerated
/// proximal gradient with adaptive restart. The intercept is unpenalized.
/// `spectral` is an upper bound on the largest eigenvalue of `[1 X]ᵀ[1 X]`.
#[allow(clippy::too_many_arguments)]
pub fn l1_logistic(
    x: &Matrix,
    y: &[u8],
    lambda: f64,
    weights: &[f64],
    spectral: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&L1Fit>,
) -> L1Fit {
    let (n, p) = (x.rows(), x.cols());
    let nf = n.max(1) as f64;
    let step = 4.0 * nf / spectral.max(1e-12);
    let thresholds: Vec<f64> = weights.iter().map(|w| step * lambda / w).collect();
    let (mut b0, mut beta) = match warm {
        Some(w) => (w.beta0, w.beta.clone()),
        None => {
            let ybar = y.iter().map(|&v| v as f64).sum::<f64>() / nf;
            let ybar = ybar.clamp(1e-6, 1.0 - 1e-6);
            ((ybar / (1.0 - ybar)).ln(), vec![0.0; p])
        }
    };
    let (mut z0, mut z) = (b0, beta.clone());
    let mut t = 1.0f64;
    let mut grad = vec![0.0; p];
    for it in 1..=max_iter {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut g0 = 0.0;
        for (r, &yi) in x.iter_rows().zip(y) {
            let resid = logit(z0 + dot(r, &z)) - yi as f64;
            g0 += resid;
            for (g, xj) in grad.iter_mut().zip(r) {
                *g += resid * xj;
            }
        }
        let nb0 = z0 - step * g0 / nf;
        let nbeta: Vec<f64> = (0..p)
            .map(|j| soft_threshold(z[j] - step * grad[j] / nf, thresholds[j]))
            .collect();

        let mut delta = (nb0 - b0).abs();
        let mut restart = (z0 - nb0) * (nb0 - b0);
        for j in 0..p {
            delta = delta.max((nbeta[j] - beta[j]).abs());
            restart += (z[j] - nbeta[j]) * (nbeta[j] - beta[j]);
        }
        if restart > 0.0 {
            t = 1.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        z0 = nb0 + momentum * (nb0 - b0);
        for j in 0..p {
            z[j] = nbeta[j] + momentum * (nbeta[j] - beta[j]);
        }
        t = t_next;
        b0 = nb0;
        beta = nbeta;
        if delta < tol {
            return L1Fit {
                beta0: b0,
                beta,
                iterations: it,
                converged: true,
            };
        }
    }
    L1Fit {
        beta0: b0,
        beta,
        iterations: max_iter,
        converged: false,
    }
}

fn selected_groups(beta: &[f64], groups: &[usize], num_groups: usize, epsilon: f64) -> Vec<bool> {
    let mut sel = vec![false; num_groups];
    for (b, &g) in beta.iter().zip(groups) {
        if b.abs() > epsilon {
            sel[g] = true;
        }
    }
    sel
}

/// Penalty for which the full-data fit with every weight at the mean of
/// `U[alpha, 1]` selects about `target_support` groups. A first bisection on
/// `ln lambda` finds where the support falls to the target (or just below);
/// a second finds where it falls further. The result is the log-midpoint of
/// that plateau, away from penalties where a coefficient is just entering.
pub fn calibrate_lambda(x: &Matrix, y: &[u8], groups: &[usize], num_groups: usize, cfg: &ImportanceConfig) -> f64 {
    let (n, p) = (x.rows(), x.cols());
    let nf = n as f64;
    let ybar = y.iter().map(|&v| v as f64).sum::<f64>() / nf;
    let w = 0.5 * (1.0 + cfg.alpha);
    let mut gmax = 0.0f64;
    for j in 0..p {
        let g: f64 = x.iter_rows().zip(y).map(|(r, &yi)| (ybar - yi as f64) * r[j]).sum::<f64>() / nf;
        gmax = gmax.max(g.abs());
    }
    let lambda_max = w * gmax;
    if lambda_max <= 0.0 {
        return 1.0;
    }
    let spectral = gram_spectral_bound(x);
    let weights = vec![w; p];
    let mut warm: Option<L1Fit> = None;
    let mut support_at = |ln_lambda: f64| {
        let fit = l1_logistic(x, y, ln_lambda.exp(), &weights, spectral, cfg.tol, cfg.max_iter, warm.as_ref());
        let s = selected_groups(&fit.beta, groups, num_groups, cfg.epsilon)
            .iter()
            .filter(|&&s| s)
            .count();
        warm = Some(fit);
        s
    };
    const STEPS: usize = 20;
    let top = lambda_max.ln();
    let (mut lo, mut hi) = ((lambda_max * 1e-4).ln(), top);
    for _ in 0..STEPS {
        let mid = 0.5 * (lo + hi);
        if support_at(mid) as f64 > cfg.target_support {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let plateau = support_at(hi);
    let (mut keep, mut drop) = (hi, top);
    for _ in 0..STEPS {
        let mid = 0.5 * (keep + drop);
        if support_at(mid) >= plateau {
            keep = mid;
        } else {
            drop = mid;
        }
    }
    (0.5 * (hi + keep)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub frequencies: Vec<f64>,
    pub lambda: f64,
    /// Subsample fits that stopped at `max_iter`.
    pub unconverged: usize,
}

/// Stability selection over the rows of `x` in the order given. Column `j`
/// belongs to group `groups[j]`. The subsample of fit `b` and its penalty
/// weights come from independent streams keyed by `(seed, b)`, with weights
/// drawn column by column, so appending a column leaves the other columns'
/// draws unchanged.
pub fn selection_frequencies(
    x: &Matrix,
    y: &[u8],
    groups: &[usize],
    num_groups: usize,
    cfg: &ImportanceConfig,
    seed: u64,
) -> Result<SelectionOutcome> {
    cfg.validate()?;
    let n = x.rows();
    if y.len() != n || groups.len() != x.cols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if n < cfg.min_rows.max(2) {
        return Err(Error::InsufficientData(format!("{n} rows, need {}", cfg.min_rows.max(2))));
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::DegenerateLabels("single label class".into()));
    }
    let x = NormStats::fit(x).apply(x);
    let lambda = match cfg.lambda {
        Some(l) => l,
        None => calibrate_lambda(&x, y, groups, num_groups, cfg),
    };
    let m = ((cfg.fraction * n as f64).round() as usize).clamp(2, n);
    // The Gram matrix of any row subset is dominated by the full one.
    let spectral = gram_spectral_bound(&x);
    // Subsample fits start from the full-data fit at the mean weight.
    let mean_weights = vec![0.5 * (1.0 + cfg.alpha); x.cols()];
    let start = l1_logistic(&x, y, lambda, &mean_weights, spectral, cfg.tol, cfg.max_iter, None);
    let fits: Vec<(Vec<bool>, bool)> = (0..cfg.subsamples)
        .into_par_iter()
        .map(|b| {
            let mut rows = if m == n {
                (0..n).collect::<Vec<_>>()
            } else {
                sample(&mut rng_for(seed, &[b as u64, 0]), n, m).into_vec()
            };
            rows.sort_unstable();
            let xs = x.select_rows(&rows);
            let ys: Vec<u8> = rows.iter().map(|&i| y[i]).collect();
            let mut wrng = rng_for(seed, &[b as u64, 1]);
            let weights: Vec<f64> = (0..x.cols())
                .map(|_| {
                    if cfg.alpha < 1.0 {
                        wrng.random_range(cfg.alpha..=1.0)
                    } else {
                        1.0
                    }
                })
                .collect();
            let fit = l1_logistic(&xs, &ys, lambda, &weights, spectral, cfg.tol, cfg.max_iter, Some(&start));
            (selected_groups(&fit.beta, groups, num_groups, cfg.epsilon), fit.converged)
        })
        .collect();
    let unconverged = fits.iter().filter(|f| !f.1).count();
    let mut frequencies = vec![0.0; num_groups];
    for (sel, _) in &fits {
        for (f, &s) in frequencies.iter_mut().zip(sel) {
            if s {
                *f += 1.0;
            }
        }
    }
    frequencies.iter_mut().for_each(|f| *f /= cfg.subsamples as f64);
    Ok(SelectionOutcome {
        frequencies,
        lambda,
        unconverged,
    })
}

/// Stability selection on one flattened problem, with rows put in learner-id
/// order first and columns grouped by feature.
pub fn problem_frequencies(dm: &DesignMatrix, cfg: &ImportanceConfig, seed: u64) -> Result<SelectionOutcome> {
    let mut order: Vec<usize> = (0..dm.rows()).collect();
    order.sort_by(|&a, &b| dm.learner_ids[a].cmp(&dm.learner_ids[b]));
    let x = dm.x.select_rows(&order);
    let y: Vec<u8> = order.iter().map(|&i| dm.labels[i]).collect();
    let groups: Vec<usize> = (0..x.cols()).map(|c| c % NUM_FEATURES).collect();
    selection_frequencies(&x, &y, &groups, NUM_FEATURES, cfg, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortImportance {
    pub cohort: Cohort,
    pub status: CellStatus,
    pub problems_used: usize,
    /// Indexed like [`FeatureId::ALL`]; all zero unless the status is ok.
    pub frequencies: [f64; NUM_FEATURES],
    /// Subsample fits, over all used problems, that stopped at `max_iter`.
    pub unconverged: usize,
}

impl CohortImportance {
    /// Features by decreasing frequency, ties in feature order.
    pub fn ranking(&self) -> Vec<(FeatureId, f64)> {
        let mut r: Vec<(FeatureId, f64)> = FeatureId::ALL.iter().copied().zip(self.frequencies).collect();
        r.sort_by(|a, b| b.1.total_cmp(&a.1));
        r
    }
}

/// Importance for one cohort, averaged over the problems with enough rows and
/// both label classes.
pub fn rank_features(
    features: &FeatureMatrix,
    cohorts: &CohortTable,
    cohort: Cohort,
    problems: &[ProblemSpec],
    cfg: &ImportanceConfig,
    seed: u64,
) -> Result<CohortImportance> {
    cfg.validate()?;
    let mut sum = [0.0; NUM_FEATURES];
    let mut used = 0;
    let mut unconverged = 0;
    let mut saw_rows = false;
    for &spec in problems {
        let filter = CohortFilter { table: cohorts, cohort };
        let dm = match flatten(features, spec, Some(filter)) {
            Ok(dm) => dm,
            Err(Error::InsufficientData(_)) => continue,
            Err(e) => return Err(e),
        };
        if dm.rows() < cfg.min_rows {
            continue;
        }
        saw_rows = true;
        let path = [cohort.index() as u64, spec.lag as u64, spec.lead as u64];
        match problem_frequencies(&dm, cfg, derive_seed(seed, &path)) {
            Ok(out) => {
                for (s, f) in sum.iter_mut().zip(&out.frequencies) {
                    *s += f;
                }
                used += 1;
                unconverged += out.unconverged;
            }
            Err(e) if e.is_degenerate() => {}
            Err(e) => return Err(e),
        }
    }
    let status = if used > 0 {
        sum.iter_mut().for_each(|s| *s /= used as f64);
        CellStatus::Ok
    } else if saw_rows {
        CellStatus::DegenerateLabels
    } else {
        CellStatus::InsufficientData
    };
    Ok(CohortImportance {
        cohort,
        status,
        problems_used: used,
        frequencies: sum,
        unconverged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub config: ImportanceConfig,
    pub cohorts: Vec<CohortImportance>,
}

impl ImportanceReport {
    /// `cohort, feature_id, frequency` rows for every cohort that produced
    /// frequencies.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("cohort\tfeature_id\tfrequency\n");
        for c in self.cohorts.iter().filter(|c| c.status == CellStatus::Ok) {
            for (f, v) in FeatureId::ALL.iter().zip(c.frequencies) {
                let _ = writeln!(out, "{}\t{}\t{}", c.cohort, f, fmt_f64(v));
            }
        }
        out
    }
}

/// Bar chart of one cohort's frequencies in feature order.
pub fn render_importance_svg(c: &CohortImportance) -> String {
    const BAR: usize = 22;
    const PLOT_H: f64 = 200.0;
    let (left, top) = (50usize, 40usize);
    let width = left + BAR * NUM_FEATURES + 20;
    let height = top + PLOT_H as usize + 60;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"10\">\n"
    );
    let _ = writeln!(
        s,
        "<text x=\"{left}\" y=\"20\" font-size=\"14\">{} selection frequency ({})</text>",
        c.cohort, c.status
    );
    let base = top as f64 + PLOT_H;
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{base}\" x2=\"{}\" y2=\"{base}\" stroke=\"#000000\"/>",
        left + BAR * NUM_FEATURES
    );
    for (tick, label) in [(0.0, "0"), (0.5, "0.5"), (1.0, "1")] {
        let y = base - tick * PLOT_H;
        let _ = writeln!(s, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{label}</text>", left - 4, y + 3.0);
    }
    for (i, (f, v)) in FeatureId::ALL.iter().zip(c.frequencies).enumerate() {
        let x = left + i * BAR + 2;
        let h = v.clamp(0.0, 1.0) * PLOT_H;
        let _ = writeln!(
            s,
            "<rect class=\"bar\" x=\"{x}\" y=\"{:.2}\" width=\"{}\" height=\"{h:.2}\" fill=\"rgb(65,105,160)\" data-feature=\"{f}\" data-frequency=\"{v:.4}\"/>",
            base - h,
            BAR - 4
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" transform=\"rotate(-60 {} {})\" text-anchor=\"end\">{f}</text>",
            x + BAR / 2,
            base as usize + 12,
            x + BAR / 2,
            base as usize + 12
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn planted(n: usize, p: usize, seed: u64) -> (Matrix, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n {
            let r: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
            let z = 2.0 * r[0] - 1.5 * r[1];
            y.push(u8::from(rng.random::<f64>() < logit(z)));
            rows.push(r);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn objective(x: &Matrix, y: &[u8], lambda: f64, f: &L1Fit) -> f64 {
        let n = x.rows() as f64;
        let loss: f64 = x
            .iter_rows()
            .zip(y)
            .map(|(r, &yi)| {
                let z = f.beta0 + dot(r, &f.beta);
                crate::logistic::softplus(z) - yi as f64 * z
            })
            .sum::<f64>()
            / n;
        loss + lambda * f.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    #[test]
    fn l1_fit_satisfies_optimality() {
        let (x, y) = planted(300, 6, 1);
        let lambda = 0.05;
        let fit = l1_logistic(&x, &y, lambda, &[1.0; 6], gram_spectral_bound(&x), 1e-10, 100_000, None);
        assert!(fit.converged);
        let n = x.rows() as f64;
        let mut g0 = 0.0;
        let mut g = [0.0; 6];
        for (r, &yi) in x.iter_rows().zip(&y) {
            let res = logit(fit.beta0 + dot(r, &fit.beta)) - yi as f64;
            g0 += res / n;
            for j in 0..6 {
                g[j] += res * r[j] / n;
            }
        }
        assert!(g0.abs() < 1e-6);
        for j in 0..6 {
            if fit.beta[j] == 0.0 {
                assert!(g[j].abs() <= lambda + 1e-6);
            } else {
                assert!((g[j] + lambda * fit.beta[j].signum()).abs() < 1e-6, "{j}: {}", g[j]);
            }
        }
        assert!(fit.beta[0] > 0.0 && fit.beta[1] < 0.0);
        // perturbing a coefficient never improves the objective
        let base = objective(&x, &y, lambda, &fit);
        for j in 0..6 {
            for d in [-1e-3, 1e-3] {
                let mut f = fit.clone();
                f.beta[j] += d;
                assert!(objective(&x, &y, lambda, &f) >= base - 1e-12);
            }
        }
    }

    #[test]
    fn calibration_hits_target_support() {
        let (x, y) = planted(400, 20, 2);
        let groups: Vec<usize> = (0..20).collect();
        let cfg = ImportanceConfig {
            target_support: 5.0,
            ..ImportanceConfig::default()
        };
        let lambda = calibrate_lambda(&x, &y, &groups, 20, &cfg);
        let w = 0.75;
        let fit = l1_logistic(&x, &y, lambda, &[w; 20], gram_spectral_bound(&x), cfg.tol, cfg.max_iter, None);
        let support = fit.beta.iter().filter(|b| b.abs() > cfg.epsilon).count();
        assert!((3..=5).contains(&support), "support {support}");
    }

    #[test]
    fn single_full_fit_matches_support() {
        let (x, y) = planted(200, 8, 3);
        let groups: Vec<usize> = (0..8).collect();
        let cfg = ImportanceConfig {
            subsamples: 1,
            fraction: 1.0,
            alpha: 1.0,
            lambda: Some(0.03),
            ..ImportanceConfig::default()
        };
        let out = selection_frequencies(&x, &y, &groups, 8, &cfg, 9).unwrap();
        let xs = NormStats::fit(&x).apply(&x);
        let fit = l1_logistic(&xs, &y, 0.03, &[1.0; 8], gram_spectral_bound(&xs), cfg.tol, cfg.max_iter, None);
        let expect: Vec<f64> = fit.beta.iter().map(|b| f64::from(u8::from(b.abs() > cfg.epsilon))).collect();
        assert_eq!(out.frequencies, expect);
    }

    #[test]
    fn planted_features_rank_first() {
        let (x, y) = planted(300, 10, 4);
        let groups: Vec<usize> = (0..10).collect();
        let cfg = ImportanceConfig {
            subsamples: 50,
            target_support: 4.0,
            ..ImportanceConfig::default()
        };
        let f = selection_frequencies(&x, &y, &groups, 10, &cfg, 5).unwrap().frequencies;
        assert_eq!(f[0], 1.0);
        assert_eq!(f[1], 1.0);
        assert!(f[2..].iter().all(|&v| v < 1.0));
    }

    #[test]
    fn deterministic_and_bounded() {
        let (x, y) = planted(120, 5, 6);
        let groups = vec![0, 0, 1, 1, 2];
        let cfg = ImportanceConfig {
            subsamples: 20,
            ..ImportanceConfig::default()
        };
        let a = selection_frequencies(&x, &y, &groups, 3, &cfg, 7).unwrap();
        let b = selection_frequencies(&x, &y, &groups, 3, &cfg, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.frequencies.iter().all(|f| (0.0..=1.0).contains(f)));
    }

    #[test]
    fn rejects_degenerate_input() {
        let (x, _) = planted(30, 3, 8);
        let err = selection_frequencies(&x, &[1; 30], &[0, 1, 2], 3, &ImportanceConfig::default(), 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateLabels(_)));
        let err = selection_frequencies(&x.select_rows(&[0, 1, 2]), &[0, 1, 0], &[0, 1, 2], 3, &ImportanceConfig::default(), 1)
            .unwrap_err();
        assert!(matches!(err, Error::InsufficientData(_)));
    }
}
