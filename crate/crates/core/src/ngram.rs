//! Skipgram transition statistics over decoded symbol sequences and their
//! assembly into the per-utterance n-gram matrix.
//!
//! A skip-`K` bigram counts symbol pairs `(SS_{t-K}, SS_t)`; `K = 1` is the
//! ordinary bigram. Rows of the transition matrix are conditional
//! frequencies, so each row with any counts sums to one and unseen rows stay
//! all-zero (no smoothing). Matrices flatten in row-major order, fixed for
//! model compatibility across save/load.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::gmm::SymbolSequence;

/// Skipgram settings: skip parameter and symbol alphabet size.
#[derive(Debug, Clone, Copy)]
pub struct SkipgramConfig {
    pub k: usize,
    pub m: usize,
}

impl SkipgramConfig {
    pub fn new(k: usize, m: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidConfig {
                detail: "skip parameter must be >= 1".into(),
            });
        }
        if m < 2 {
            return Err(Error::InvalidConfig {
                detail: "alphabet size must be >= 2".into(),
            });
        }
        Ok(SkipgramConfig { k, m })
    }
}

/// Conditional transition frequencies `B(i, j)` with the per-row denominator
/// counts they were computed from.
#[derive(Debug, Clone)]
pub struct SkipgramMatrix {
    pub probs: Array2<f64>,
    pub row_counts: Array1<u64>,
}

/// Count skip-`K` pairs over the sequence and normalise per row.
///
/// `B(i, j) = #{t : SS_{t-K} = i, SS_t = j} / #{t : SS_{t-K} = i}` with `t`
/// ranging over `K < t <= T` (no wrap-around), so only pairs actually formed
/// are counted and every nonzero row is exactly stochastic.
pub fn skipgram(seq: &SymbolSequence, cfg: &SkipgramConfig) -> Result<SkipgramMatrix> {
    let t_len = seq.len();
    if t_len <= cfg.k {
        return Err(Error::SequenceTooShort {
            length: t_len,
            skip: cfg.k,
        });
    }
    for &s in &seq.symbols {
        if s >= cfg.m {
            return Err(Error::InvalidConfig {
                detail: format!("symbol {s} out of range for alphabet {}", cfg.m),
            });
        }
    }
    let m = cfg.m;
    let mut counts = vec![0u64; m * m];
    let mut row_counts = Array1::<u64>::zeros(m);
    for t in cfg.k..t_len {
        let i = seq.symbols[t - cfg.k];
        let j = seq.symbols[t];
        counts[i * m + j] += 1;
        row_counts[i] += 1;
    }
    let mut probs = Array2::zeros((m, m));
    for i in 0..m {
        if row_counts[i] == 0 {
            continue;
        }
        let denom = row_counts[i] as f64;
        for j in 0..m {
            probs[[i, j]] = counts[i * m + j] as f64 / denom;
        }
    }
    Ok(SkipgramMatrix { probs, row_counts })
}

/// Flatten a skipgram matrix row-major: entry `(i, j)` lands at `M*i + j`.
pub fn flatten(matrix: &SkipgramMatrix) -> Array1<f64> {
    Array1::from_iter(matrix.probs.iter().cloned())
}

/// Reshape a flattened vector back into an `M x M` matrix.
pub fn unflatten(v: &Array1<f64>, m: usize) -> Result<Array2<f64>> {
    if v.len() != m * m {
        return Err(Error::LengthMismatch {
            expected: m * m,
            actual: v.len(),
        });
    }
    Ok(Array2::from_shape_vec((m, m), v.to_vec()).expect("shape checked"))
}

/// Flattened skipgram vectors stacked per utterance, with class labels.
#[derive(Debug, Clone)]
pub struct UtteranceMatrix {
    pub rows: Array2<f64>,
    pub labels: Vec<String>,
}

/// Build the utterance n-gram matrix: one flattened skipgram row per
/// sequence, rows in input order.
pub fn build_utterance_matrix(
    seqs: &[(SymbolSequence, String)],
    cfg: &SkipgramConfig,
) -> Result<UtteranceMatrix> {
    let m = cfg.m;
    let mut rows = Array2::zeros((seqs.len(), m * m));
    let mut labels = Vec::with_capacity(seqs.len());
    for (u, (seq, label)) in seqs.iter().enumerate() {
        let b = skipgram(seq, cfg)?;
        let flat = flatten(&b);
        rows.row_mut(u).assign(&flat);
        labels.push(label.clone());
    }
    Ok(UtteranceMatrix { rows, labels })
}
