//! Front-end features: 39-dimensional MFCC (13 cepstra + deltas + double
//! deltas), sliding-window cepstral mean normalisation, and Fisher-criterion
//! selection of the CMN window length.
//!
//! The MFCC chain is: pre-emphasis, Hamming window, power spectrum (FFT of
//! the zero-padded frame), triangular mel filterbank on the mel scale
//! `2595 log10(1 + f/700)`, natural log, orthonormal DCT-II keeping the
//! first `num_cepstra` coefficients (c0 included). Deltas use the standard
//! regression formula over a `+-delta_halfwidth` context with edge
//! replication, applied twice for the double deltas.

use ndarray::{Array1, Array2, ArrayView1};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::audio::AudioClip;
use crate::error::{Error, Result};

/// Frame-level feature matrix for one utterance (row = frame).
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub frames: Array2<f64>,
    pub frame_shift_ms: f64,
    pub label: Option<String>,
}

impl FeatureMatrix {
    pub fn new(frames: Array2<f64>, frame_shift_ms: f64, label: Option<String>) -> Result<Self> {
        if frames.nrows() == 0 {
            return Err(Error::ClipTooShort {
                samples: 0,
                required: 1,
            });
        }
        if !frames.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "feature matrix".into(),
            });
        }
        Ok(FeatureMatrix {
            frames,
            frame_shift_ms,
            label,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.frames.nrows()
    }

    pub fn dim(&self) -> usize {
        self.frames.ncols()
    }

    pub fn duration_s(&self) -> f64 {
        self.num_frames() as f64 * self.frame_shift_ms / 1000.0
    }

    /// Frames covering `[start_s, start_s + len_s)`, with the label carried over.
    pub fn slice_seconds(&self, start_s: f64, len_s: f64) -> Result<FeatureMatrix> {
        let shift_s = self.frame_shift_ms / 1000.0;
        let start = (start_s / shift_s).round() as usize;
        let count = (len_s / shift_s).round() as usize;
        let end = (start + count).min(self.num_frames());
        if start >= end {
            return Err(Error::StreamTooShort {
                duration_s: self.duration_s(),
                window_s: start_s + len_s,
            });
        }
        FeatureMatrix::new(
            self.frames.slice(ndarray::s![start..end, ..]).to_owned(),
            self.frame_shift_ms,
            self.label.clone(),
        )
    }
}

/// Analysis window shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Hamming,
    Hann,
}

impl WindowKind {
    fn coefficients(self, len: usize) -> Vec<f64> {
        let denom = (len - 1) as f64;
        (0..len)
            .map(|n| {
                let phase = 2.0 * std::f64::consts::PI * n as f64 / denom;
                match self {
                    WindowKind::Hamming => 0.54 - 0.46 * phase.cos(),
                    WindowKind::Hann => 0.5 - 0.5 * phase.cos(),
                }
            })
            .collect()
    }
}

/// MFCC extraction settings.
#[derive(Debug, Clone)]
pub struct MfccConfig {
    pub frame_ms: f64,
    pub shift_ms: f64,
    pub num_mel_filters: usize,
    pub num_cepstra: usize,
    pub pre_emphasis: f64,
    pub window: WindowKind,
    pub delta_halfwidth: usize,
}

impl Default for MfccConfig {
    fn default() -> Self {
        MfccConfig {
            frame_ms: 25.0,
            shift_ms: 10.0,
            num_mel_filters: 26,
            num_cepstra: 13,
            pre_emphasis: 0.97,
            window: WindowKind::Hamming,
            delta_halfwidth: 2,
        }
    }
}

impl MfccConfig {
    fn validate(&self) -> Result<()> {
        if self.num_cepstra > self.num_mel_filters {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "num_cepstra {} exceeds num_mel_filters {}",
                    self.num_cepstra, self.num_mel_filters
                ),
            });
        }
        if !(self.shift_ms > 0.0 && self.frame_ms > self.shift_ms) {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "need frame_ms > shift_ms > 0, got frame {} shift {}",
                    self.frame_ms, self.shift_ms
                ),
            });
        }
        Ok(())
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank evaluated at FFT bin centre frequencies.
///
/// Returns `num_filters` rows of length `fft_size / 2 + 1`. Edge points are
/// spaced linearly on the mel scale from 0 Hz to Nyquist.
pub fn mel_filterbank(num_filters: usize, fft_size: usize, sample_rate: f64) -> Vec<Vec<f64>> {
    let n_bins = fft_size / 2 + 1;
    let mel_max = hz_to_mel(sample_rate / 2.0);
    let edges: Vec<f64> = (0..num_filters + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (num_filters + 1) as f64))
        .collect();
    let mut bank = Vec::with_capacity(num_filters);
    for m in 0..num_filters {
        let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        let mut filt = vec![0.0; n_bins];
        for (k, w) in filt.iter_mut().enumerate() {
            let f = k as f64 * sample_rate / fft_size as f64;
            if f >= lo && f <= mid && mid > lo {
                *w = (f - lo) / (mid - lo);
            } else if f > mid && f <= hi && hi > mid {
                *w = (hi - f) / (hi - mid);
            }
        }
        bank.push(filt);
    }
    bank
}

/// Orthonormal DCT-II of `input`, truncated to `count` coefficients.
fn dct_ii_orthonormal(input: &[f64], count: usize) -> Vec<f64> {
    let n = input.len();
    let scale0 = (1.0 / n as f64).sqrt();
    let scale = (2.0 / n as f64).sqrt();
    (0..count)
        .map(|k| {
            let sum: f64 = input
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    x * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2 * n) as f64)
                        .cos()
                })
                .sum();
            sum * if k == 0 { scale0 } else { scale }
        })
        .collect()
}

/// Delta coefficients by the regression formula with clamped (replicated) edges:
/// `d_t = sum_n n (c_{t+n} - c_{t-n}) / (2 sum_n n^2)` for `n = 1..=halfwidth`.
pub fn delta_features(feats: &Array2<f64>, halfwidth: usize) -> Array2<f64> {
    let (t_len, d) = feats.dim();
    let denom: f64 = 2.0 * (1..=halfwidth).map(|n| (n * n) as f64).sum::<f64>();
    let mut out = Array2::zeros((t_len, d));
    for t in 0..t_len {
        for n in 1..=halfwidth {
            let fwd = (t + n).min(t_len - 1);
            let bwd = t.saturating_sub(n);
            for j in 0..d {
                out[[t, j]] += n as f64 * (feats[[fwd, j]] - feats[[bwd, j]]);
            }
        }
        if denom > 0.0 {
            for j in 0..d {
                out[[t, j]] /= denom;
            }
        }
    }
    out
}

/// Compute MFCC(+delta,+double-delta) features from an audio clip.
///
/// Produces `floor((N - frame_len) / shift_len) + 1` frames, each a row of
/// `3 * num_cepstra` values: cepstra, deltas, double deltas.
pub fn mfcc(clip: &AudioClip, cfg: &MfccConfig) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let rate = clip.sample_rate as f64;
    let frame_len = ((cfg.frame_ms / 1000.0) * rate).round() as usize;
    let shift_len = ((cfg.shift_ms / 1000.0) * rate).round() as usize;
    let n = clip.samples.len();
    if n < frame_len {
        return Err(Error::ClipTooShort {
            samples: n,
            required: frame_len,
        });
    }

    let fft_size = frame_len.next_power_of_two();
    let window = cfg.window.coefficients(frame_len);
    let bank = mel_filterbank(cfg.num_mel_filters, fft_size, rate);

    // Pre-emphasis over the whole signal, first sample kept as-is.
    let mut emphasized = Vec::with_capacity(n);
    emphasized.push(clip.samples[0]);
    for i in 1..n {
        emphasized.push(clip.samples[i] - cfg.pre_emphasis * clip.samples[i - 1]);
    }

    let num_frames = (n - frame_len) / shift_len + 1;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(fft_size);
    let mut cepstra = Array2::zeros((num_frames, cfg.num_cepstra));
    let mut buf = vec![Complex::new(0.0, 0.0); fft_size];

    for t in 0..num_frames {
        let start = t * shift_len;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < frame_len {
                Complex::new(emphasized[start + i] * window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        let power: Vec<f64> = buf[..fft_size / 2 + 1].iter().map(|c| c.norm_sqr()).collect();
        let log_energies: Vec<f64> = bank
            .iter()
            .map(|filt| {
                let e: f64 = filt.iter().zip(&power).map(|(w, p)| w * p).sum();
                e.max(1e-20).ln()
            })
            .collect();
        let ceps = dct_ii_orthonormal(&log_energies, cfg.num_cepstra);
        for (j, c) in ceps.iter().enumerate() {
            cepstra[[t, j]] = *c;
        }
    }

    let deltas = delta_features(&cepstra, cfg.delta_halfwidth);
    let double_deltas = delta_features(&deltas, cfg.delta_halfwidth);

    let mut frames = Array2::zeros((num_frames, 3 * cfg.num_cepstra));
    for t in 0..num_frames {
        for j in 0..cfg.num_cepstra {
            frames[[t, j]] = cepstra[[t, j]];
            frames[[t, cfg.num_cepstra + j]] = deltas[[t, j]];
            frames[[t, 2 * cfg.num_cepstra + j]] = double_deltas[[t, j]];
        }
    }
    FeatureMatrix::new(frames, cfg.shift_ms, Some(clip.source_id.clone()))
}

/// Sliding-window cepstral mean normalisation.
///
/// Each frame gets the mean of the frames within a centred window of
/// `window_s` seconds subtracted, per dimension. The window shrinks at the
/// utterance edges instead of padding.
pub fn cmn_sliding(feats: &FeatureMatrix, window_s: f64) -> Result<FeatureMatrix> {
    if window_s <= 0.0 {
        return Err(Error::InvalidConfig {
            detail: format!("CMN window must be positive, got {window_s}"),
        });
    }
    let shift_s = feats.frame_shift_ms / 1000.0;
    let half = ((window_s / 2.0) / shift_s).round() as usize;
    let (t_len, d) = feats.frames.dim();

    // Prefix sums per dimension for O(T d) window means.
    let mut prefix = Array2::<f64>::zeros((t_len + 1, d));
    for t in 0..t_len {
        for j in 0..d {
            prefix[[t + 1, j]] = prefix[[t, j]] + feats.frames[[t, j]];
        }
    }
    let mut out = feats.frames.clone();
    for t in 0..t_len {
        let lo = t.saturating_sub(half);
        let hi = (t + half + 1).min(t_len);
        let count = (hi - lo) as f64;
        for j in 0..d {
            let mean = (prefix[[hi, j]] - prefix[[lo, j]]) / count;
            out[[t, j]] -= mean;
        }
    }
    FeatureMatrix::new(out, feats.frame_shift_ms, feats.label.clone())
}

/// Within/between-class scatter accumulated over frames.
#[derive(Debug, Clone)]
pub struct FisherStats {
    pub within: Array2<f64>,
    pub between: Array2<f64>,
    pub class_means: Vec<(String, Array1<f64>)>,
    pub overall_mean: Array1<f64>,
    pub counts: Vec<usize>,
}

impl FisherStats {
    /// Scalar Fisher measure `trace(S_b) / trace(S_w)`.
    pub fn criterion(&self) -> f64 {
        self.between.diag().sum() / self.within.diag().sum()
    }
}

/// Accumulate Fisher scatter matrices over labelled feature sets.
pub fn fisher_stats(sets: &[(&FeatureMatrix, &str)]) -> Result<FisherStats> {
    let classes: Vec<&str> = {
        let mut seen = Vec::new();
        for (_, label) in sets {
            if !seen.contains(label) {
                seen.push(label);
            }
        }
        seen
    };
    if classes.len() < 2 {
        return Err(Error::NotEnoughClasses {
            found: classes.len(),
        });
    }
    let d = sets[0].0.dim();
    for (fm, _) in sets {
        if fm.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: fm.dim(),
            });
        }
    }

    let k = classes.len();
    let mut sums = vec![Array1::<f64>::zeros(d); k];
    let mut counts = vec![0usize; k];
    let mut second_moment = Array2::<f64>::zeros((d, d));
    for (fm, label) in sets {
        let ci = classes.iter().position(|c| c == label).unwrap();
        counts[ci] += fm.num_frames();
        for row in fm.frames.rows() {
            sums[ci] += &row;
            accumulate_outer(&mut second_moment, row);
        }
    }
    let total: usize = counts.iter().sum();
    let total_f = total as f64;
    let mut overall = Array1::<f64>::zeros(d);
    for s in &sums {
        overall += s;
    }
    overall /= total_f;

    // S_w = sum x x^T - sum_k n_k mu_k mu_k^T
    let mut within = second_moment;
    let mut between = Array2::<f64>::zeros((d, d));
    let mut class_means = Vec::with_capacity(k);
    for ci in 0..k {
        let n_k = counts[ci] as f64;
        let mean_k = &sums[ci] / n_k;
        for a in 0..d {
            for b in 0..d {
                within[[a, b]] -= n_k * mean_k[a] * mean_k[b];
                between[[a, b]] +=
                    n_k * (mean_k[a] - overall[a]) * (mean_k[b] - overall[b]);
            }
        }
        class_means.push((classes[ci].to_string(), mean_k));
    }
    Ok(FisherStats {
        within,
        between,
        class_means,
        overall_mean: overall,
        counts,
    })
}

fn accumulate_outer(acc: &mut Array2<f64>, row: ArrayView1<f64>) {
    let d = row.len();
    for a in 0..d {
        let ra = row[a];
        for b in 0..d {
            acc[[a, b]] += ra * row[b];
        }
    }
}

/// Pick the CMN window length that maximises the Fisher criterion.
///
/// Every candidate window is applied to all sets, scatter statistics are
/// accumulated over the normalised frames, and the candidate with the largest
/// `trace(S_b)/trace(S_w)` wins. Ties go to the smaller window.
pub fn fisher_select_window(
    sets: &[(&FeatureMatrix, &str)],
    candidate_windows_s: &[f64],
) -> Result<f64> {
    if candidate_windows_s.is_empty() {
        return Err(Error::InvalidConfig {
            detail: "no candidate windows".into(),
        });
    }
    for &w in candidate_windows_s {
        if w <= 0.0 {
            return Err(Error::InvalidConfig {
                detail: format!("candidate window {w} must be positive"),
            });
        }
    }
    let mut best: Option<(f64, f64)> = None; // (window, criterion)
    for &w in candidate_windows_s {
        let normalised: Vec<(FeatureMatrix, &str)> = sets
            .iter()
            .map(|(fm, label)| Ok((cmn_sliding(fm, w)?, *label)))
            .collect::<Result<_>>()?;
        let refs: Vec<(&FeatureMatrix, &str)> =
            normalised.iter().map(|(fm, l)| (fm, *l)).collect();
        let stats = fisher_stats(&refs)?;
        if stats.within.diag().sum() <= 0.0 {
            return Err(Error::DegenerateScatter { window_s: w });
        }
        let j = stats.criterion();
        best = match best {
            None => Some((w, j)),
            Some((bw, bj)) => {
                if j > bj || (j == bj && w < bw) {
                    Some((w, j))
                } else {
                    Some((bw, bj))
                }
            }
        };
    }
    Ok(best.unwrap().0)
}
