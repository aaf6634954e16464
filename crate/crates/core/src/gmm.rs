//! Diagonal-covariance Gaussian mixture modelling: EM training of the
//! universal background model, mean-only MAP adaptation, log-likelihood
//! evaluation and frame-wise symbol decoding.
//!
//! All densities are evaluated in log space; mixture likelihoods use
//! log-sum-exp. Models are immutable once built, so evaluation, decoding and
//! adaptation can run concurrently from many threads.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

const LN_2PI: f64 = 1.8378770664093453;

/// Mixture weights, means and diagonal covariances of an `M`-component GMM.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagGmm {
    /// Component weights, summing to one.
    pub weights: Array1<f64>,
    /// `M x d` component means.
    pub means: Array2<f64>,
    /// `M x d` diagonal variances, strictly positive.
    pub variances: Array2<f64>,
}

impl DiagGmm {
    pub fn new(weights: Array1<f64>, means: Array2<f64>, variances: Array2<f64>) -> Result<Self> {
        let m = weights.len();
        if means.nrows() != m || variances.nrows() != m || means.ncols() != variances.ncols() {
            return Err(Error::InvalidConfig {
                detail: "inconsistent GMM parameter shapes".into(),
            });
        }
        let sum: f64 = weights.sum();
        if (sum - 1.0).abs() > 1e-10 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidConfig {
                detail: format!("weights must be non-negative and sum to 1, sum = {sum}"),
            });
        }
        if variances.iter().any(|&v| v <= 0.0) || !variances.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig {
                detail: "variances must be positive and finite".into(),
            });
        }
        Ok(DiagGmm {
            weights,
            means,
            variances,
        })
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.means.ncols()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: d,
            });
        }
        Ok(())
    }
}

/// Precomputed per-component terms for fast log-density evaluation.
struct Scorer {
    log_weights: Vec<f64>,
    log_consts: Vec<f64>,
    inv_vars: Array2<f64>,
    means: Array2<f64>,
}

impl Scorer {
    fn new(model: &DiagGmm) -> Scorer {
        let m = model.num_components();
        let d = model.dim();
        let mut log_consts = Vec::with_capacity(m);
        let mut inv_vars = Array2::zeros((m, d));
        for c in 0..m {
            let mut log_det = 0.0;
            for j in 0..d {
                let v = model.variances[[c, j]];
                log_det += v.ln();
                inv_vars[[c, j]] = 1.0 / v;
            }
            log_consts.push(-0.5 * (d as f64 * LN_2PI + log_det));
        }
        Scorer {
            log_weights: model.weights.iter().map(|w| w.max(1e-300).ln()).collect(),
            log_consts,
            inv_vars,
            means: model.means.clone(),
        }
    }

    /// Per-component scores for one frame: `log N(x; mu_c, var_c)`,
    /// optionally plus `log w_c`.
    fn frame_scores(&self, frame: &[f64], with_weights: bool, out: &mut [f64]) {
        let d = frame.len();
        for (c, slot) in out.iter_mut().enumerate() {
            let mean_row = self.means.row(c);
            let inv_row = self.inv_vars.row(c);
            let mean = mean_row.as_slice().unwrap();
            let inv = inv_row.as_slice().unwrap();
            let mut maha = 0.0;
            for j in 0..d {
                let diff = frame[j] - mean[j];
                maha += diff * diff * inv[j];
            }
            *slot = self.log_consts[c] - 0.5 * maha;
            if with_weights {
                *slot += self.log_weights[c];
            }
        }
    }
}

fn log_sum_exp(scores: &[f64]) -> f64 {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    max + sum.ln()
}

/// Decoded component indices, one per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSequence {
    pub symbols: Vec<usize>,
}

impl SymbolSequence {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// MAP adaptation settings. Only means are adapted; weights and variances are
/// copied from the prior model.
#[derive(Debug, Clone, Copy)]
pub struct MapConfig {
    /// Relevance factor `r` in the mixing coefficient `n / (n + r)`.
    pub relevance: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig { relevance: 16.0 }
    }
}

/// Outcome of UBM training, with the mean log-likelihood entering each EM
/// iteration and the number of re-seeded components.
#[derive(Debug, Clone)]
pub struct UbmFit {
    pub model: DiagGmm,
    pub log_likelihoods: Vec<f64>,
    pub reseeded: usize,
}

/// Train a diagonal-covariance UBM on pooled frames.
///
/// Initialisation is seeded k-means++ over an evenly strided subsample;
/// `em_iters` full EM iterations follow. Variances are floored at
/// `1e-4` times the global per-dimension variance each M-step. A component
/// whose weight collapses below `1e-10` is re-seeded on a random frame.
pub fn train_ubm(frames: ArrayView2<f64>, m: usize, em_iters: usize, seed: u64) -> Result<DiagGmm> {
    train_ubm_traced(frames, m, em_iters, seed).map(|fit| fit.model)
}

/// [`train_ubm`] variant that also reports the per-iteration log-likelihoods.
pub fn train_ubm_traced(
    frames: ArrayView2<f64>,
    m: usize,
    em_iters: usize,
    seed: u64,
) -> Result<UbmFit> {
    let n = frames.nrows();
    let d = frames.ncols();
    if m == 0 {
        return Err(Error::InvalidConfig {
            detail: "mixture count must be positive".into(),
        });
    }
    if n < 10 * m {
        return Err(Error::TooFewFrames {
            frames: n,
            mixtures: m,
            required: 10 * m,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Global per-dimension moments for the variance floor and initial spread.
    let mut global_mean = Array1::<f64>::zeros(d);
    for row in frames.rows() {
        global_mean += &row;
    }
    global_mean /= n as f64;
    let mut global_var = Array1::<f64>::zeros(d);
    for row in frames.rows() {
        for j in 0..d {
            let diff = row[j] - global_mean[j];
            global_var[j] += diff * diff;
        }
    }
    global_var /= n as f64;
    global_var.mapv_inplace(|v| v.max(1e-10));
    let floor = global_var.mapv(|v| (1e-4 * v).max(1e-10));

    // Evenly strided subsample for k-means++ seeding.
    let sub_size = n.min(2000.max(50 * m));
    let stride = n / sub_size;
    let subsample: Vec<ArrayView1<f64>> =
        (0..sub_size).map(|i| frames.row(i * stride)).collect();

    let mut means = Array2::zeros((m, d));
    let first = rng.random_range(0..sub_size);
    means.row_mut(0).assign(&subsample[first]);
    let mut min_dist: Vec<f64> = subsample
        .iter()
        .map(|p| squared_distance(p.view(), means.row(0)))
        .collect();
    for c in 1..m {
        let total: f64 = min_dist.iter().sum();
        let chosen = if total <= 0.0 {
            rng.random_range(0..sub_size)
        } else {
            let mut target = rng.random_range(0.0..total);
            let mut idx = sub_size - 1;
            for (i, &w) in min_dist.iter().enumerate() {
                if target < w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            idx
        };
        means.row_mut(c).assign(&subsample[chosen]);
        for (i, p) in subsample.iter().enumerate() {
            let dist = squared_distance(p.view(), means.row(c));
            if dist < min_dist[i] {
                min_dist[i] = dist;
            }
        }
    }

    // Lloyd refinement of the seeds; k-means++ alone leaves merged centres
    // often enough to distort the mixture fit.
    let mut assignment = vec![0usize; sub_size];
    for _ in 0..10 {
        let mut changed = false;
        for (i, p) in subsample.iter().enumerate() {
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for c in 0..m {
                let dist = squared_distance(p.view(), means.row(c));
                if dist < best_dist {
                    best_dist = dist;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut counts = vec![0usize; m];
        let mut sums = Array2::<f64>::zeros((m, d));
        for (i, p) in subsample.iter().enumerate() {
            counts[assignment[i]] += 1;
            let mut row = sums.row_mut(assignment[i]);
            row += p;
        }
        for c in 0..m {
            if counts[c] > 0 {
                let count = counts[c] as f64;
                means.row_mut(c).assign(&(&sums.row(c) / count));
            } else {
                // Empty cluster: restart it on the point farthest from its centre.
                let far = (0..sub_size)
                    .max_by(|&a, &b| {
                        squared_distance(subsample[a].view(), means.row(assignment[a]))
                            .partial_cmp(&squared_distance(
                                subsample[b].view(),
                                means.row(assignment[b]),
                            ))
                            .unwrap()
                    })
                    .unwrap();
                means.row_mut(c).assign(&subsample[far]);
            }
        }
    }

    let mut weights = Array1::from_elem(m, 1.0 / m as f64);
    let mut variances = Array2::zeros((m, d));
    for c in 0..m {
        variances.row_mut(c).assign(&global_var);
    }

    let mut model = DiagGmm::new(weights.clone(), means.clone(), variances.clone())?;
    let mut lls = Vec::with_capacity(em_iters);
    let mut reseeded_total = 0usize;

    let mut scores = vec![0.0; m];
    for _iter in 0..em_iters {
        let scorer = Scorer::new(&model);
        let mut occupancy = vec![0.0f64; m];
        let mut sum = Array2::<f64>::zeros((m, d));
        let mut sum_sq = Array2::<f64>::zeros((m, d));
        let mut total_ll = 0.0;
        for row in frames.rows() {
            let frame = row.as_slice().unwrap();
            scorer.frame_scores(frame, true, &mut scores);
            let lse = log_sum_exp(&scores);
            total_ll += lse;
            for c in 0..m {
                let resp = (scores[c] - lse).exp();
                if resp > 0.0 {
                    occupancy[c] += resp;
                    for j in 0..d {
                        let x = frame[j];
                        sum[[c, j]] += resp * x;
                        sum_sq[[c, j]] += resp * x * x;
                    }
                }
            }
        }
        lls.push(total_ll / n as f64);

        for c in 0..m {
            let occ = occupancy[c];
            weights[c] = occ / n as f64;
            if weights[c] < 1e-10 {
                // Collapsed component: re-seed on a random frame.
                let pick = rng.random_range(0..n);
                means.row_mut(c).assign(&frames.row(pick));
                variances.row_mut(c).assign(&global_var);
                weights[c] = 1.0 / n as f64;
                reseeded_total += 1;
                log::warn!("re-seeded collapsed mixture component {c}");
                continue;
            }
            for j in 0..d {
                let mean = sum[[c, j]] / occ;
                means[[c, j]] = mean;
                let var = (sum_sq[[c, j]] / occ - mean * mean).max(floor[j]);
                variances[[c, j]] = var;
            }
        }
        let wsum: f64 = weights.sum();
        weights.mapv_inplace(|w| w / wsum);
        model = DiagGmm::new(weights.clone(), means.clone(), variances.clone())?;
    }

    Ok(UbmFit {
        model,
        log_likelihoods: lls,
        reseeded: reseeded_total,
    })
}

fn squared_distance(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Posterior statistics of frames against a model: occupancy `n_m` and the
/// responsibility-weighted frame means `E_m`. Components with no occupancy
/// report the model's own mean.
pub fn posterior_stats(model: &DiagGmm, frames: ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    if frames.nrows() > 0 {
        model.check_dim(frames.ncols())?;
    }
    let m = model.num_components();
    let d = model.dim();
    let scorer = Scorer::new(model);
    let mut occupancy = Array1::<f64>::zeros(m);
    let mut sum = Array2::<f64>::zeros((m, d));
    let mut scores = vec![0.0; m];
    for row in frames.rows() {
        let frame = row.as_slice().unwrap();
        scorer.frame_scores(frame, true, &mut scores);
        let lse = log_sum_exp(&scores);
        for c in 0..m {
            let resp = (scores[c] - lse).exp();
            if resp > 0.0 {
                occupancy[c] += resp;
                for j in 0..d {
                    sum[[c, j]] += resp * frame[j];
                }
            }
        }
    }
    let mut expected = Array2::<f64>::zeros((m, d));
    for c in 0..m {
        if occupancy[c] > 0.0 {
            for j in 0..d {
                expected[[c, j]] = sum[[c, j]] / occupancy[c];
            }
        } else {
            expected.row_mut(c).assign(&model.means.row(c));
        }
    }
    Ok((occupancy, expected))
}

/// MAP-adapt the means of `ubm` towards `feats`.
///
/// For each component, `alpha = n / (n + r)` mixes the posterior mean with
/// the prior mean; weights and variances are copied unchanged.
pub fn map_adapt(ubm: &DiagGmm, feats: &FeatureMatrix, cfg: &MapConfig) -> Result<DiagGmm> {
    map_adapt_frames(ubm, feats.frames.view(), cfg)
}

/// [`map_adapt`] on a raw frame view; accepts an empty view, in which case
/// the adapted model equals the prior exactly.
pub fn map_adapt_frames(
    ubm: &DiagGmm,
    frames: ArrayView2<f64>,
    cfg: &MapConfig,
) -> Result<DiagGmm> {
    if !cfg.relevance.is_finite() || cfg.relevance < 0.0 {
        return Err(Error::InvalidConfig {
            detail: format!("relevance factor must be finite and >= 0, got {}", cfg.relevance),
        });
    }
    let (occupancy, expected) = posterior_stats(ubm, frames)?;
    let m = ubm.num_components();
    let d = ubm.dim();
    let mut means = ubm.means.clone();
    for c in 0..m {
        let n_c = occupancy[c];
        let denom = n_c + cfg.relevance;
        let alpha = if denom > 0.0 { n_c / denom } else { 0.0 };
        for j in 0..d {
            means[[c, j]] = alpha * expected[[c, j]] + (1.0 - alpha) * ubm.means[[c, j]];
        }
    }
    DiagGmm::new(ubm.weights.clone(), means, ubm.variances.clone())
}

/// Decode each frame to the index of its highest-scoring component.
///
/// With `with_weights` the score is `log w_m + log N(x_t; mu_m, var_m)`;
/// without it, the bare component log-density. Ties break to the smallest
/// index.
pub fn decode_symbols(
    model: &DiagGmm,
    feats: &FeatureMatrix,
    with_weights: bool,
) -> Result<SymbolSequence> {
    model.check_dim(feats.dim())?;
    let m = model.num_components();
    let scorer = Scorer::new(model);
    let mut scores = vec![0.0; m];
    let mut symbols = Vec::with_capacity(feats.num_frames());
    for row in feats.frames.rows() {
        scorer.frame_scores(row.as_slice().unwrap(), with_weights, &mut scores);
        let mut best = 0usize;
        for c in 1..m {
            if scores[c] > scores[best] {
                best = c;
            }
        }
        symbols.push(best);
    }
    Ok(SymbolSequence { symbols })
}

/// Mean per-frame log-likelihood of `feats` under the mixture, computed with
/// log-sum-exp.
pub fn log_likelihood(model: &DiagGmm, feats: &FeatureMatrix) -> Result<f64> {
    model.check_dim(feats.dim())?;
    let scorer = Scorer::new(model);
    let mut scores = vec![0.0; model.num_components()];
    let mut total = 0.0;
    for row in feats.frames.rows() {
        scorer.frame_scores(row.as_slice().unwrap(), true, &mut scores);
        total += log_sum_exp(&scores);
    }
    Ok(total / feats.num_frames() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand_distr::StandardNormal;

    fn feature_matrix(frames: Array2<f64>) -> FeatureMatrix {
        FeatureMatrix::new(frames, 10.0, None).unwrap()
    }

    fn sample_two_cluster(n: usize, seed: u64) -> (Array2<f64>, f64) {
        // Two spherical clusters at -5 and +5 with weight 0.4 / 0.6.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        let mut frames = Array2::zeros((n, d));
        let mut first = 0usize;
        for t in 0..n {
            let c0 = rng.random_range(0.0..1.0) < 0.4;
            if c0 {
                first += 1;
            }
            let centre = if c0 { -5.0 } else { 5.0 };
            for j in 0..d {
                let noise: f64 = rng.sample(StandardNormal);
                frames[[t, j]] = centre + noise;
            }
        }
        (frames, first as f64 / n as f64)
    }

    #[test]
    fn single_component_is_closed_form() {
        let (frames, _) = sample_two_cluster(2000, 1);
        let fit = train_ubm_traced(frames.view(), 1, 5, 7).unwrap();
        let n = frames.nrows() as f64;
        for j in 0..3 {
            let mean = frames.column(j).sum() / n;
            let var = frames.column(j).iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            assert_abs_diff_eq!(fit.model.means[[0, j]], mean, epsilon = 1e-9);
            assert_abs_diff_eq!(fit.model.variances[[0, j]], var, epsilon = 1e-9);
        }
    }

    #[test]
    fn recovers_two_separated_clusters() {
        let (frames, true_w0) = sample_two_cluster(4000, 2);
        let fit = train_ubm_traced(frames.view(), 2, 20, 3).unwrap();
        let model = fit.model;
        // Identify which component sits on the negative side.
        let (neg, pos) = if model.means[[0, 0]] < model.means[[1, 0]] {
            (0, 1)
        } else {
            (1, 0)
        };
        for j in 0..3 {
            assert!((model.means[[neg, j]] + 5.0).abs() < 0.1, "{}", model.means[[neg, j]]);
            assert!((model.means[[pos, j]] - 5.0).abs() < 0.1, "{}", model.means[[pos, j]]);
        }
        assert!((model.weights[neg] - true_w0).abs() < 0.05);
    }

    #[test]
    fn em_log_likelihood_is_monotone() {
        for seed in 0..5u64 {
            let (frames, _) = sample_two_cluster(1500, 100 + seed);
            let fit = train_ubm_traced(frames.view(), 4, 15, seed).unwrap();
            for pair in fit.log_likelihoods.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-8,
                    "seed {seed}: LL dropped {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn too_few_frames_is_an_error() {
        let frames = Array2::zeros((19, 2));
        assert!(matches!(
            train_ubm(frames.view(), 2, 3, 0),
            Err(Error::TooFewFrames { .. })
        ));
    }

    fn toy_ubm() -> DiagGmm {
        DiagGmm::new(
            array![0.5, 0.5],
            array![[-10.0, 0.0], [10.0, 0.0]],
            array![[1.0, 1.0], [1.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn map_with_no_frames_returns_prior_exactly() {
        let ubm = toy_ubm();
        let empty = Array2::<f64>::zeros((0, 2));
        let adapted = map_adapt_frames(&ubm, empty.view(), &MapConfig::default()).unwrap();
        assert_eq!(adapted.means, ubm.means);
        assert_eq!(adapted.weights, ubm.weights);
        assert_eq!(adapted.variances, ubm.variances);
    }

    #[test]
    fn huge_relevance_pins_means_to_prior() {
        let ubm = toy_ubm();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let frames = Array2::from_shape_fn((500, 2), |_| rng.random_range(-12.0..12.0));
        let adapted = map_adapt_frames(&ubm, frames.view(), &MapConfig { relevance: 1e12 }).unwrap();
        for (a, b) in adapted.means.iter().zip(ubm.means.iter()) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn zero_relevance_single_component_gives_data_mean() {
        let ubm = DiagGmm::new(array![1.0], array![[3.0, -4.0]], array![[2.0, 2.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let frames = Array2::from_shape_fn((10_000, 2), |_| rng.random_range(-1.0..5.0));
        let adapted = map_adapt_frames(&ubm, frames.view(), &MapConfig { relevance: 0.0 }).unwrap();
        for j in 0..2 {
            let mean = frames.column(j).sum() / 10_000.0;
            assert_abs_diff_eq!(adapted.means[[0, j]], mean, epsilon = 1e-9);
        }
    }

    #[test]
    fn adapted_mean_is_convex_combination() {
        let ubm = toy_ubm();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frames = Array2::from_shape_fn((300, 2), |(_, j)| {
            if j == 0 {
                rng.random_range(-12.0..12.0)
            } else {
                rng.random_range(-2.0..2.0)
            }
        });
        let cfg = MapConfig::default();
        let adapted = map_adapt_frames(&ubm, frames.view(), &cfg).unwrap();
        let (occ, expected) = posterior_stats(&ubm, frames.view()).unwrap();
        for c in 0..2 {
            let alpha = occ[c] / (occ[c] + cfg.relevance);
            for j in 0..2 {
                let reference = alpha * expected[[c, j]] + (1.0 - alpha) * ubm.means[[c, j]];
                assert_abs_diff_eq!(adapted.means[[c, j]], reference, epsilon = 1e-12);
                // Between prior mean and posterior mean, per dimension.
                let lo = ubm.means[[c, j]].min(expected[[c, j]]) - 1e-12;
                let hi = ubm.means[[c, j]].max(expected[[c, j]]) + 1e-12;
                assert!(adapted.means[[c, j]] >= lo && adapted.means[[c, j]] <= hi);
            }
        }
    }

    #[test]
    fn responsibilities_sum_to_one() {
        let ubm = toy_ubm();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let frames = Array2::from_shape_fn((200, 2), |_| rng.random_range(-12.0..12.0));
        let (occ, _) = posterior_stats(&ubm, frames.view()).unwrap();
        assert_abs_diff_eq!(occ.sum(), 200.0, epsilon = 1e-10);
    }

    #[test]
    fn single_component_decodes_to_zero() {
        let model = DiagGmm::new(array![1.0], array![[0.0]], array![[1.0]]).unwrap();
        let feats = feature_matrix(Array2::from_shape_fn((50, 1), |(t, _)| t as f64));
        let seq = decode_symbols(&model, &feats, true).unwrap();
        assert!(seq.symbols.iter().all(|&s| s == 0));
        assert_eq!(seq.len(), 50);
    }

    #[test]
    fn well_separated_components_decode_to_nearest() {
        let model = toy_ubm();
        let frames = array![[-10.0, 0.0], [10.0, 0.0], [-9.5, 0.3], [9.9, -0.2]];
        let feats = feature_matrix(frames);
        let seq = decode_symbols(&model, &feats, true).unwrap();
        assert_eq!(seq.symbols, vec![0, 1, 0, 1]);
    }

    #[test]
    fn decode_invariant_under_weight_scaling() {
        // Scaling all weights by a positive constant before renormalisation
        // leaves the argmax unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let means = Array2::from_shape_fn((4, 3), |_| rng.random_range(-3.0..3.0));
        let vars = Array2::from_elem((4, 3), 0.8);
        let weights = array![0.1, 0.2, 0.3, 0.4];
        let model = DiagGmm::new(weights.clone(), means.clone(), vars.clone()).unwrap();
        let scaled_raw = weights.mapv(|w| w * 7.3);
        let scaled = DiagGmm::new(&scaled_raw / scaled_raw.sum(), means, vars).unwrap();
        let frames = Array2::from_shape_fn((100, 3), |_| rng.random_range(-4.0..4.0));
        let feats = feature_matrix(frames);
        let a = decode_symbols(&model, &feats, true).unwrap();
        let b = decode_symbols(&scaled, &feats, true).unwrap();
        assert_eq!(a.symbols, b.symbols);
    }

    #[test]
    fn log_likelihood_at_own_mean() {
        let d = 4;
        let model = DiagGmm::new(
            array![1.0],
            Array2::zeros((1, d)),
            Array2::ones((1, d)),
        )
        .unwrap();
        let feats = feature_matrix(Array2::zeros((1, d)));
        let ll = log_likelihood(&model, &feats).unwrap();
        assert_abs_diff_eq!(ll, -(d as f64 / 2.0) * LN_2PI, epsilon = 1e-12);
    }

    #[test]
    fn log_likelihood_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let m = 3;
        let d = 2;
        let means = Array2::from_shape_fn((m, d), |_| rng.random_range(-2.0..2.0));
        let vars = Array2::from_shape_fn((m, d), |_| rng.random_range(0.5..2.0));
        let weights = array![0.2, 0.5, 0.3];
        let model = DiagGmm::new(weights.clone(), means.clone(), vars.clone()).unwrap();
        let frames = Array2::from_shape_fn((40, d), |_| rng.random_range(-3.0..3.0));
        let feats = feature_matrix(frames.clone());
        let ll = log_likelihood(&model, &feats).unwrap();

        // Naive direct-probability oracle, no log-sum-exp.
        let mut total = 0.0;
        for t in 0..40 {
            let mut p = 0.0;
            for c in 0..m {
                let mut dens = 1.0;
                for j in 0..d {
                    let v = vars[[c, j]];
                    let diff = frames[[t, j]] - means[[c, j]];
                    dens *= (-diff * diff / (2.0 * v)).exp()
                        / (2.0 * std::f64::consts::PI * v).sqrt();
                }
                p += weights[c] * dens;
            }
            total += p.ln();
        }
        assert_abs_diff_eq!(ll, total / 40.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_weight_equals_component_density() {
        let model = DiagGmm::new(
            array![1.0, 0.0],
            array![[0.0], [100.0]],
            array![[1.0], [1.0]],
        )
        .unwrap();
        let feats = feature_matrix(array![[0.5]]);
        let ll = log_likelihood(&model, &feats).unwrap();
        let expect = -0.5 * (LN_2PI + 0.25);
        assert_abs_diff_eq!(ll, expect, epsilon = 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let model = toy_ubm();
        let feats = feature_matrix(Array2::zeros((5, 3)));
        assert!(matches!(
            log_likelihood(&model, &feats),
            Err(Error::DimensionMismatch { expected: 2, actual: 3 })
        ));
    }
}
