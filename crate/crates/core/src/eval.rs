//! Multi-label node classification: one-vs-rest L2 logistic regression on
//! raw embedding rows, top-k prediction with known label counts, and
//! micro/macro F1 over repeated random splits.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NodeLabels;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub train_ratios: Vec<f64>,
    pub repeats: usize,
    /// Inverse regularization strength; multiplies the loss term.
    pub c: f64,
    pub seed: u64,
    /// Stop once the gradient norm falls to this.
    pub convergence_tol: f64,
    pub max_iters: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            train_ratios: (1..=9).map(|i| i as f64 / 10.0).collect(),
            repeats: 10,
            c: 1.0,
            seed: 0,
            convergence_tol: 1e-6,
            max_iters: 1000,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.train_ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::invalid(format!("training ratio {r} must lie in (0, 1)")));
        }
        if self.repeats < 1 {
            return Err(Error::invalid("repeats must be at least 1"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::invalid(format!("C={} must be > 0", self.c)));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::invalid("convergence tolerance must be > 0"));
        }
        Ok(())
    }
}

/// Per-label binary scorer.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelModel {
    Fitted { weights: Array1<f64>, bias: f64 },
    /// No positive training example: probability 0 everywhere.
    ConstantNegative,
    /// No negative training example: probability 1 everywhere.
    ConstantPositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier {
    pub models: Vec<LabelModel>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl Classifier {
    pub fn num_labels(&self) -> usize {
        self.models.len()
    }

    /// `n × num_labels` matrix of membership probabilities.
    pub fn predict_proba(&self, features: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = Array2::zeros((features.nrows(), self.models.len()));
        for (l, model) in self.models.iter().enumerate() {
            let mut col = out.column_mut(l);
            match model {
                LabelModel::Fitted { weights, bias } => {
                    let z = features.dot(weights);
                    col.assign(&z.mapv(|z| sigmoid(z + bias)));
                }
                LabelModel::ConstantNegative => col.fill(0.0),
                LabelModel::ConstantPositive => col.fill(1.0),
            }
        }
        out
    }

    pub fn predict_top_k(&self, features: ArrayView2<'_, f64>, k_per_node: &[usize]) -> Result<Vec<Vec<usize>>> {
        predict_top_k(self.predict_proba(features).view(), k_per_node)
    }
}

/// Minimizes `½‖w‖² + C Σ log(1 + exp(-yᵢ(wᵀxᵢ + b)))` by damped Newton.
/// `x` carries the rows used for training; `y` is ±1.
fn fit_binary(x: ArrayView2<'_, f64>, y: &[f64], c: f64, tol: f64, max_iters: usize) -> Result<(Array1<f64>, f64)> {
    let (m, d) = x.dim();
    let mut aug = Array2::ones((m, d + 1));
    aug.slice_mut(s![.., ..d]).assign(&x);
    let y = Array1::from(y.to_vec());
    let mut theta = Array1::<f64>::zeros(d + 1);

    let objective = |theta: &Array1<f64>| -> f64 {
        let z = aug.dot(theta);
        let w = theta.slice(s![..d]);
        0.5 * w.dot(&w) + c * z.iter().zip(y.iter()).map(|(z, y)| softplus(-y * z)).sum::<f64>()
    };

    let mut f = objective(&theta);
    for _ in 0..max_iters {
        let z = aug.dot(&theta);
        // r = -y σ(-y z), per-sample derivative of the loss wrt z
        let r: Array1<f64> = z.iter().zip(y.iter()).map(|(z, y)| -y * sigmoid(-y * z)).collect();
        let mut grad = aug.t().dot(&r) * c;
        for j in 0..d {
            grad[j] += theta[j];
        }
        let gnorm = grad.dot(&grad).sqrt();
        if gnorm <= tol {
            break;
        }
        let weights: Array1<f64> = z.mapv(|z| {
            let p = sigmoid(z);
            c * p * (1.0 - p)
        });
        let mut scaled = aug.clone();
        for (mut row, &s) in scaled.axis_iter_mut(Axis(0)).zip(weights.iter()) {
            row.mapv_inplace(|v| v * s);
        }
        let mut hess = aug.t().dot(&scaled);
        for j in 0..d {
            hess[[j, j]] += 1.0;
        }
        let step = newton_direction(&hess, &grad)?;

        // Armijo backtracking along the Newton direction.
        let slope = -grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = &theta - &(&step * t);
            let fc = objective(&cand);
            if fc <= f + 1e-4 * t * slope {
                theta = cand;
                f = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let bias = theta[d];
    theta.slice_collapse(s![..d]);
    Ok((theta, bias))
}

/// Solves `H s = g` by Cholesky, adding a small ridge if `H` is not
/// numerically positive definite.
fn newton_direction(hess: &Array2<f64>, grad: &Array1<f64>) -> Result<Array1<f64>> {
    let n = grad.len();
    let rhs = Mat::from_fn(n, 1, |i, _| grad[i]);
    let mut ridge = 0.0;
    for _ in 0..8 {
        let h = Mat::from_fn(n, n, |i, j| hess[[i, j]] + if i == j { ridge } else { 0.0 });
        if let Ok(llt) = h.llt(Side::Lower) {
            let sol = llt.solve(&rhs);
            return Ok((0..n).map(|i| sol[(i, 0)]).collect());
        }
        ridge = if ridge == 0.0 { 1e-10 } else { ridge * 100.0 };
    }
    Err(Error::Numerical("logistic regression Hessian is not positive definite".into()))
}

/// Fits one binary logistic model per label on the rows in `train`.
pub fn train_logreg_ovr(
    features: ArrayView2<'_, f64>,
    labels: &NodeLabels,
    train: &[usize],
    cfg: &EvalConfig,
) -> Result<Classifier> {
    if train.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if features.nrows() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), actual: features.nrows() });
    }
    let x = features.select(Axis(0), train);
    let models = (0..labels.num_labels())
        .into_par_iter()
        .map(|l| {
            let y: Vec<f64> = train
                .iter()
                .map(|&i| if labels.sets[i].binary_search(&l).is_ok() { 1.0 } else { -1.0 })
                .collect();
            let positives = y.iter().filter(|&&v| v > 0.0).count();
            if positives == 0 {
                return Ok(LabelModel::ConstantNegative);
            }
            if positives == y.len() {
                return Ok(LabelModel::ConstantPositive);
            }
            let (weights, bias) = fit_binary(x.view(), &y, cfg.c, cfg.convergence_tol, cfg.max_iters)?;
            Ok(LabelModel::Fitted { weights, bias })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Classifier { models })
}

/// For each row, the `k` highest-probability labels (ties to the lower id),
/// returned ascending.
pub fn predict_top_k(probs: ArrayView2<'_, f64>, k_per_node: &[usize]) -> Result<Vec<Vec<usize>>> {
    if probs.nrows() != k_per_node.len() {
        return Err(Error::DimensionMismatch { expected: probs.nrows(), actual: k_per_node.len() });
    }
    let num_labels = probs.ncols();
    probs
        .rows()
        .into_iter()
        .zip(k_per_node)
        .map(|(row, &k)| {
            if k > num_labels {
                return Err(Error::invalid(format!("k={k} exceeds {num_labels} labels")));
            }
            let mut order: Vec<usize> = (0..num_labels).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            let mut top = order[..k].to_vec();
            top.sort_unstable();
            Ok(top)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    pub micro: f64,
    pub macro_: f64,
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Micro-F1 pools every (node, label) decision; macro-F1 averages per-label
/// F1 over labels that occur in `truth`.
pub fn f1_scores(predicted: &[Vec<usize>], truth: &[Vec<usize>], num_labels: usize) -> F1Scores {
    let width = predicted
        .iter()
        .chain(truth)
        .flatten()
        .map(|&l| l + 1)
        .max()
        .unwrap_or(0)
        .max(num_labels);
    let mut tp = vec![0usize; width];
    let mut fp = vec![0usize; width];
    let mut fn_ = vec![0usize; width];
    for (p, t) in predicted.iter().zip(truth) {
        for &l in p {
            if t.contains(&l) {
                tp[l] += 1;
            } else {
                fp[l] += 1;
            }
        }
        for &l in t {
            if !p.contains(&l) {
                fn_[l] += 1;
            }
        }
    }
    let micro = f1(tp.iter().sum(), fp.iter().sum(), fn_.iter().sum());
    let supported: Vec<f64> = (0..width)
        .filter(|&l| tp[l] + fn_[l] > 0)
        .map(|l| f1(tp[l], fp[l], fn_[l]))
        .collect();
    let macro_ = if supported.is_empty() { 0.0 } else { supported.iter().sum::<f64>() / supported.len() as f64 };
    F1Scores { micro, macro_ }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub method: String,
    pub ratio: f64,
    pub repeat_count: usize,
    pub micro_f1_mean: f64,
    pub micro_f1_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn row(&self, method: &str, ratio: f64) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.method == method && (r.ratio - ratio).abs() < 1e-12)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "method,ratio,repeat_count,micro_f1_mean,micro_f1_std,macro_f1_mean,macro_f1_std")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.method, r.ratio, r.repeat_count, r.micro_f1_mean, r.micro_f1_std, r.macro_f1_mean, r.macro_f1_std
            )?;
        }
        Ok(())
    }
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Random train/test split for `(ratio_index, repeat)`. Each pair owns a
/// ChaCha stream so adding ratios never perturbs existing splits.
pub fn split(n: usize, ratio: f64, seed: u64, ratio_index: usize, repeat: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((ratio_index as u64) << 32) | repeat as u64);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let n_train = ((ratio * n as f64).round() as usize).clamp(1, n.saturating_sub(1).max(1));
    let mut train = perm[..n_train].to_vec();
    let mut test = perm[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Scores one split: train on `train`, predict `test` with true label counts.
pub fn evaluate_split(
    features: ArrayView2<'_, f64>,
    labels: &NodeLabels,
    train: &[usize],
    test: &[usize],
    cfg: &EvalConfig,
) -> Result<F1Scores> {
    let clf = train_logreg_ovr(features, labels, train, cfg)?;
    let x_test = features.select(Axis(0), test);
    let k: Vec<usize> = test.iter().map(|&i| labels.sets[i].len()).collect();
    let predicted = clf.predict_top_k(x_test.view(), &k)?;
    let truth: Vec<Vec<usize>> = test.iter().map(|&i| labels.sets[i].clone()).collect();
    Ok(f1_scores(&predicted, &truth, labels.num_labels()))
}

/// Full ratio × repeat sweep for one embedding.
pub fn evaluate_sweep(
    features: ArrayView2<'_, f64>,
    labels: &NodeLabels,
    cfg: &EvalConfig,
    method: &str,
) -> Result<EvalReport> {
    cfg.validate()?;
    let n = features.nrows();
    if n != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), actual: n });
    }
    if n < 2 {
        return Err(Error::invalid("need at least two nodes to split"));
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.train_ratios.len())
        .flat_map(|r| (0..cfg.repeats).map(move |k| (r, k)))
        .collect();
    let scores = jobs
        .par_iter()
        .map(|&(r, k)| {
            let (train, test) = split(n, cfg.train_ratios[r], cfg.seed, r, k);
            evaluate_split(features, labels, &train, &test, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = cfg
        .train_ratios
        .iter()
        .enumerate()
        .map(|(r, &ratio)| {
            let chunk = &scores[r * cfg.repeats..(r + 1) * cfg.repeats];
            let micro: Vec<f64> = chunk.iter().map(|s| s.micro).collect();
            let macro_: Vec<f64> = chunk.iter().map(|s| s.macro_).collect();
            let (micro_f1_mean, micro_f1_std) = mean_std(&micro);
            let (macro_f1_mean, macro_f1_std) = mean_std(&macro_);
            EvalRow {
                method: method.to_string(),
                ratio,
                repeat_count: cfg.repeats,
                micro_f1_mean,
                micro_f1_std,
                macro_f1_mean,
                macro_f1_std,
            }
        })
        .collect();
    Ok(EvalReport { rows })
}
