//! Binary logistic regression fitted by Newton's method (iteratively
//! reweighted least squares) on the ridge-penalized log-likelihood.
//!
//! The intercept is never penalized. If a fit breaks down (singular Hessian,
//! non-finite step, or no convergence, as under perfect separation) it is
//! restarted with the next larger ridge from [`TrainConfig::ridge_ladder`].

use std::path::Path;

use crate::dataset::NormStats;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_in_place, cholesky_solve, dot, Matrix};
use crate::tsv::{self, fmt_f64, parse_err};

/// Sigmoid link `1 / (1 + e^-z)`, never returning exactly 0.
pub fn logit(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.max(f64::MIN_POSITIVE)
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Decision rule: 1 iff `probability >= threshold`.
pub fn decide(probability: f64, threshold: f64) -> u8 {
    u8::from(probability >= threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub ridge: f64,
    pub ridge_ladder: Vec<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            tol: 1e-8,
            max_iter: 100,
            ridge: 0.0,
            ridge_ladder: vec![1e-6, 1e-4, 1e-2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub ridge_used: f64,
    /// Statistics the inputs were normalized with, if any.
    pub norm_stats: Option<NormStats>,
}

fn linear_score(beta0: f64, beta: &[f64], row: &[f64]) -> f64 {
    beta0 + dot(beta, row)
}

/// Unpenalized log-likelihood of labels `y` under coefficients `(beta0, beta)`.
pub fn log_likelihood(x: &Matrix, y: &[u8], beta0: f64, beta: &[f64]) -> f64 {
    x.iter_rows()
        .zip(y)
        .map(|(r, &yi)| {
            let z = linear_score(beta0, beta, r);
            yi as f64 * z - softplus(z)
        })
        .sum()
}

/// Log-likelihood minus `ridge / 2 * |beta|^2` (intercept excluded).
pub fn penalized_log_likelihood(x: &Matrix, y: &[u8], beta0: f64, beta: &[f64], ridge: f64) -> f64 {
    log_likelihood(x, y, beta0, beta) - 0.5 * ridge * dot(beta, beta)
}

/// Gradient of [`penalized_log_likelihood`] with respect to
/// `(beta0, beta_1..beta_m)`.
pub fn penalized_gradient(x: &Matrix, y: &[u8], beta0: f64, beta: &[f64], ridge: f64) -> Vec<f64> {
    let mut g = vec![0.0; beta.len() + 1];
    for (r, &yi) in x.iter_rows().zip(y) {
        let resid = yi as f64 - logit(linear_score(beta0, beta, r));
        g[0] += resid;
        for (gj, xj) in g[1..].iter_mut().zip(r) {
            *gj += resid * xj;
        }
    }
    for (gj, b) in g[1..].iter_mut().zip(beta) {
        *gj -= ridge * b;
    }
    g
}

fn check_inputs(x: &Matrix, y: &[u8]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::InsufficientData(format!("{} training rows", y.len())));
    }
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::DegenerateLabels("training labels hold a single class".into()));
    }
    Ok(())
}

struct Fit {
    coef: Vec<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn newton(x: &Matrix, y: &[u8], ridge: f64, cfg: &TrainConfig) -> Result<Fit> {
    let p = x.cols() + 1;
    let objective = |c: &[f64]| penalized_log_likelihood(x, y, c[0], &c[1..], ridge);
    let mut coef = vec![0.0; p];
    let mut obj = objective(&coef);
    let mut trace = vec![obj];
    let mut hess = vec![0.0; p * p];
    let mut grad = vec![0.0; p];
    let mut xt = vec![0.0; p];
    for iter in 1..=cfg.max_iter {
        hess.iter_mut().for_each(|h| *h = 0.0);
        grad.iter_mut().for_each(|g| *g = 0.0);
        xt[0] = 1.0;
        for (r, &yi) in x.iter_rows().zip(y) {
            xt[1..].copy_from_slice(r);
            let mu = logit(dot(&coef, &xt));
            let w = mu * (1.0 - mu);
            let resid = yi as f64 - mu;
            for j in 0..p {
                let xj = xt[j];
                if xj == 0.0 {
                    continue;
                }
                grad[j] += resid * xj;
                let a = w * xj;
                let row = &mut hess[j * p..(j + 1) * p];
                for (h, xk) in row[j..].iter_mut().zip(&xt[j..]) {
                    *h += a * xk;
                }
            }
        }
        for j in 1..p {
            grad[j] -= ridge * coef[j];
            hess[j * p + j] += ridge;
        }
        for j in 0..p {
            for k in (j + 1)..p {
                hess[k * p + j] = hess[j * p + k];
            }
        }
        cholesky_in_place(&mut hess, p)?;
        let delta = cholesky_solve(&hess, p, &grad);
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::Numerical("non-finite Newton step".into()));
        }

        // Step halving keeps the objective non-decreasing.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = coef.iter().zip(&delta).map(|(c, d)| c + step * d).collect();
            let o = objective(&cand);
            if o.is_finite() && o >= obj {
                accepted = Some((cand, o));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, o)) = accepted else {
            // No ascent direction left at working precision.
            return Ok(Fit {
                coef,
                iterations: iter,
                converged: true,
                trace,
            });
        };
        let change = delta.iter().map(|d| (step * d).abs()).fold(0.0, f64::max);
        coef = cand;
        obj = o;
        trace.push(obj);
        if coef.iter().any(|c| c.abs() > 1e8) {
            return Err(Error::Numerical("coefficients diverging".into()));
        }
        if change < cfg.tol {
            return Ok(Fit {
                coef,
                iterations: iter,
                converged: true,
                trace,
            });
        }
    }
    Ok(Fit {
        coef,
        iterations: cfg.max_iter,
        converged: false,
        trace,
    })
}

/// Fits the model and also returns the objective after every accepted
/// Newton step of the final (successful) ridge level.
pub fn train_traced(x: &Matrix, y: &[u8], cfg: &TrainConfig) -> Result<(TrainedModel, Vec<f64>)> {
    check_inputs(x, y)?;
    let ladder: Vec<f64> = std::iter::once(cfg.ridge)
        .chain(cfg.ridge_ladder.iter().copied().filter(|&r| r > cfg.ridge))
        .collect();
    let mut fallback = None;
    let mut last_err = None;
    for (k, &ridge) in ladder.iter().enumerate() {
        match newton(x, y, ridge, cfg) {
            Ok(fit) if fit.converged || k + 1 == ladder.len() => {
                return Ok((model_from(fit.coef, fit.iterations, fit.converged, ridge), fit.trace));
            }
            Ok(fit) => fallback = Some((fit, ridge)),
            Err(e) => last_err = Some(e),
        }
    }
    match (fallback, last_err) {
        (Some((fit, ridge)), _) => Ok((model_from(fit.coef, fit.iterations, false, ridge), fit.trace)),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("ladder is never empty"),
    }
}

pub fn train(x: &Matrix, y: &[u8], cfg: &TrainConfig) -> Result<TrainedModel> {
    train_traced(x, y, cfg).map(|(m, _)| m)
}

fn model_from(coef: Vec<f64>, iterations: usize, converged: bool, ridge: f64) -> TrainedModel {
    TrainedModel {
        beta0: coef[0],
        beta: coef[1..].to_vec(),
        iterations,
        converged,
        ridge_used: ridge,
        norm_stats: None,
    }
}

impl TrainedModel {
    /// Probability of label 1 for an already-normalized row.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.beta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.beta.len(),
                got: row.len(),
            });
        }
        Ok(logit(linear_score(self.beta0, &self.beta, row)))
    }

    /// Normalizes a raw row with the model's statistics, then predicts.
    pub fn predict_proba_raw(&self, row: &[f64]) -> Result<f64> {
        match &self.norm_stats {
            Some(s) => {
                if row.len() != s.mean.len() {
                    return Err(Error::DimensionMismatch {
                        expected: s.mean.len(),
                        got: row.len(),
                    });
                }
                let mut r = row.to_vec();
                s.apply_row(&mut r);
                self.predict_proba(&r)
            }
            None => self.predict_proba(row),
        }
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join("\t");
        let mut out = format!(
            "{MODEL_MAGIC}\t{MODEL_VERSION}\niterations\t{}\nconverged\t{}\nridge_used\t{}\ncolumns\t{}\n",
            self.iterations,
            u8::from(self.converged),
            fmt_f64(self.ridge_used),
            self.beta.len()
        );
        if let Some(s) = &self.norm_stats {
            out.push_str(&format!("norm_mean\t{}\nnorm_scale\t{}\n", join(&s.mean), join(&s.scale)));
        }
        out.push_str(&format!("beta0\t{}\nbeta\t{}\n", fmt_f64(self.beta0), join(&self.beta)));
        out
    }

    pub fn from_text(path: &Path, text: &str) -> Result<Self> {
        let mut fields = std::collections::BTreeMap::new();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, l)) if l == format!("{MODEL_MAGIC}\t{MODEL_VERSION}") => {}
            _ => return Err(parse_err(path, 1, "not a version-1 model file")),
        }
        for (n, l) in lines {
            let (k, v) = l.split_once('\t').unwrap_or((l, ""));
            fields.insert(k.to_owned(), (n + 1, v.to_owned()));
        }
        let get = |k: &str| {
            fields
                .get(k)
                .ok_or_else(|| parse_err(path, 0, format!("missing {k}")))
        };
        let floats = |k: &str| -> Result<Vec<f64>> {
            let (n, v) = get(k)?;
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split('\t')
                .map(|s| s.parse().map_err(|_| parse_err(path, *n, format!("invalid {k}"))))
                .collect()
        };
        let int = |k: &str| -> Result<usize> {
            let (n, v) = get(k)?;
            v.parse().map_err(|_| parse_err(path, *n, format!("invalid {k}")))
        };
        let beta = floats("beta")?;
        if beta.len() != int("columns")? {
            return Err(parse_err(path, 0, "beta length disagrees with columns"));
        }
        let norm_stats = if fields.contains_key("norm_mean") {
            let s = NormStats {
                mean: floats("norm_mean")?,
                scale: floats("norm_scale")?,
            };
            if s.mean.len() != beta.len() || s.scale.len() != beta.len() {
                return Err(parse_err(path, 0, "normalization length disagrees with columns"));
            }
            Some(s)
        } else {
            None
        };
        let one = |k: &str| -> Result<f64> {
            let v = floats(k)?;
            v.first().copied().ok_or_else(|| parse_err(path, 0, format!("empty {k}")))
        };
        Ok(TrainedModel {
            beta0: one("beta0")?,
            beta,
            iterations: int("iterations")?,
            converged: int("converged")? == 1,
            ridge_used: one("ridge_used")?,
            norm_stats,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        tsv::write_file(path, &self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(path, &text)
    }
}

const MODEL_MAGIC: &str = "stopout-logistic-model";
const MODEL_VERSION: u32 = 1;

/// Produces ranking scores for rows. Higher means more likely label 1.
pub trait Scorer {
    fn score(&self, row: &[f64]) -> Result<f64>;

    fn score_all(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.iter_rows().map(|r| self.score(r)).collect()
    }

    /// Ridge penalty the model was fitted with, if it has one.
    fn ridge_used(&self) -> Option<f64> {
        None
    }
}

/// A trainable binary classifier. Grid evaluation is generic over this
/// trait; only [`LogisticRegression`] ships.
pub trait Classifier: Sync {
    type Model: Scorer + Send;

    fn fit(&self, x: &Matrix, y: &[u8]) -> Result<Self::Model>;
}

impl Scorer for TrainedModel {
    fn score(&self, row: &[f64]) -> Result<f64> {
        self.predict_proba(row)
    }

    fn ridge_used(&self) -> Option<f64> {
        Some(self.ridge_used)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogisticRegression {
    pub config: TrainConfig,
}

impl Classifier for LogisticRegression {
    type Model = TrainedModel;

    fn fit(&self, x: &Matrix, y: &[u8]) -> Result<TrainedModel> {
        train(x, y, &self.config)
    }
}
