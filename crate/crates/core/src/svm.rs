//! One-vs-rest linear SVMs trained by dual coordinate descent.
//!
//! Each class gets a binary L1-loss soft-margin problem (class = +1, rest =
//! -1) solved in the dual, one coordinate at a time, with the bias handled as
//! an augmented constant feature. Optimisation stops when the largest
//! projected-gradient KKT violation over a full pass drops below the
//! configured tolerance. Prediction takes the argmax of the per-class
//! decision values, breaking ties towards the lowest class index.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddedMatrix;
use crate::error::{Error, Result};

/// Training settings shared by all per-class problems.
#[derive(Debug, Clone, Copy)]
pub struct TrainConfig {
    /// Penalty parameter `C`.
    pub c: f64,
    /// Stopping tolerance on the KKT violation.
    pub tolerance: f64,
    /// Maximum full passes over the data.
    pub max_passes: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            tolerance: 1e-4,
            max_passes: 10_000,
            seed: 0,
        }
    }
}

/// Per-class hyperplanes of a one-vs-rest model.
#[derive(Debug, Clone)]
pub struct SvmModel {
    /// Class names, sorted; row `m` of `weights` belongs to `classes[m]`.
    pub classes: Vec<String>,
    /// `k x L` weight vectors.
    pub weights: Array2<f64>,
    /// `k` bias terms.
    pub biases: Array1<f64>,
    pub c: f64,
}

impl SvmModel {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights.ncols()
    }
}

/// Solution of one binary subproblem, dual variables included.
#[derive(Debug, Clone)]
pub struct BinaryFit {
    pub weights: Array1<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    pub passes: usize,
}

/// Solve one L1-loss soft-margin problem in the dual.
///
/// `y` entries must be +1 or -1. The bias is an augmented constant-1 feature,
/// so `q_ii = ||x_i||^2 + 1` and the bias update mirrors the weight update.
pub fn solve_binary(
    x: ArrayView2<f64>,
    y: &[f64],
    cfg: &TrainConfig,
) -> Result<BinaryFit> {
    let n = x.nrows();
    let dim = x.ncols();
    if y.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    if cfg.c <= 0.0 || cfg.tolerance <= 0.0 {
        return Err(Error::InvalidConfig {
            detail: format!("need C > 0 and tolerance > 0, got {} / {}", cfg.c, cfg.tolerance),
        });
    }

    let q_diag: Vec<f64> = (0..n)
        .map(|i| x.row(i).iter().map(|v| v * v).sum::<f64>() + 1.0)
        .collect();
    let mut w = Array1::<f64>::zeros(dim);
    let mut b = 0.0;
    let mut alphas = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut passes = 0;
    while passes < cfg.max_passes {
        order.shuffle(&mut rng);
        let mut max_violation = 0.0f64;
        for &i in &order {
            let xi = x.row(i);
            let grad = y[i] * (w.dot(&xi) + b) - 1.0;
            let pg = if alphas[i] <= 0.0 {
                grad.min(0.0)
            } else if alphas[i] >= cfg.c {
                grad.max(0.0)
            } else {
                grad
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() > 1e-12 {
                let old = alphas[i];
                alphas[i] = (old - grad / q_diag[i]).clamp(0.0, cfg.c);
                let delta = (alphas[i] - old) * y[i];
                if delta != 0.0 {
                    w.scaled_add(delta, &xi);
                    b += delta;
                }
            }
        }
        passes += 1;
        if max_violation <= cfg.tolerance {
            break;
        }
    }

    Ok(BinaryFit {
        weights: w,
        bias: b,
        alphas,
        passes,
    })
}

/// Train a one-vs-rest model on embedded training rows.
///
/// Deterministic for a fixed seed: classes are sorted and each binary
/// problem derives its shuffling stream from the seed and class index.
pub fn train(data: &EmbeddedMatrix, cfg: &TrainConfig) -> Result<SvmModel> {
    let n = data.rows.nrows();
    let dim = data.rows.ncols();
    if data.labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: data.labels.len(),
        });
    }
    if !data.rows.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite {
            context: "SVM training features".into(),
        });
    }
    let mut classes: Vec<String> = data.labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::NotEnoughClasses {
            found: classes.len(),
        });
    }

    let mut weights = Array2::zeros((classes.len(), dim));
    let mut biases = Array1::zeros(classes.len());
    for (m, class) in classes.iter().enumerate() {
        let y: Vec<f64> = data
            .labels
            .iter()
            .map(|l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let sub_cfg = TrainConfig {
            seed: cfg.seed.wrapping_add((m as u64).wrapping_mul(0x9E3779B97F4A7C15)),
            ..*cfg
        };
        let fit = solve_binary(data.rows.view(), &y, &sub_cfg)?;
        weights.row_mut(m).assign(&fit.weights);
        biases[m] = fit.bias;
    }
    Ok(SvmModel {
        classes,
        weights,
        biases,
        c: cfg.c,
    })
}

/// Decision values `w_m . x + b_m` for every class and the argmax class.
pub fn predict(model: &SvmModel, x: ArrayView1<f64>) -> Result<(String, Array1<f64>)> {
    if x.len() != model.input_dim() {
        return Err(Error::LengthMismatch {
            expected: model.input_dim(),
            actual: x.len(),
        });
    }
    let scores = model.weights.dot(&x) + &model.biases;
    let mut best = 0usize;
    for m in 1..scores.len() {
        if scores[m] > scores[best] {
            best = m;
        }
    }
    Ok((model.classes[best].clone(), scores))
}
