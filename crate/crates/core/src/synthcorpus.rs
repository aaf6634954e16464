//! Deterministic synthetic corpus generation.
//!
//! Each synthetic "language" pairs a diagonal-GMM emission density with a
//! row-stochastic Markov transition over the emission components, so both
//! feature schemes have signal to find: supervectors see the emission
//! constellation, skipgrams see the temporal dynamics. Generation happens at
//! the feature level; the audio path is exercised separately with tone WAVs.
//!
//! Sessions are reproducible in isolation: every (language, speaker, session)
//! triple derives its own RNG stream from the corpus seed by three rounds of
//! splitmix64, one per index.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::path::Path;

use crate::audio::{write_wav, AudioClip, WavEncoding};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::gmm::DiagGmm;

/// One synthetic language: emission density, temporal dynamics and
/// per-speaker mean shifts.
#[derive(Debug, Clone)]
pub struct SyntheticLanguage {
    pub id: String,
    pub emission: DiagGmm,
    /// Row-stochastic transition matrix over emission components.
    pub transition: Array2<f64>,
    /// One d-vector shift per speaker.
    pub speaker_offsets: Vec<Array1<f64>>,
}

impl SyntheticLanguage {
    pub fn validate(&self) -> Result<()> {
        let m = self.emission.num_components();
        if self.transition.dim() != (m, m) {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "language {}: transition is {:?}, emission has {m} components",
                    self.id,
                    self.transition.dim()
                ),
            });
        }
        for (i, row) in self.transition.rows().into_iter().enumerate() {
            let sum: f64 = row.sum();
            if (sum - 1.0).abs() > 1e-12 || row.iter().any(|&p| p < 0.0) {
                return Err(Error::InvalidConfig {
                    detail: format!("language {}: transition row {i} sums to {sum}", self.id),
                });
            }
        }
        let d = self.emission.dim();
        for off in &self.speaker_offsets {
            if off.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: off.len(),
                });
            }
        }
        Ok(())
    }
}

/// Corpus layout: languages x speakers x sessions of a fixed duration.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub languages: Vec<SyntheticLanguage>,
    pub speakers_per_language: usize,
    pub sessions_per_speaker: usize,
    pub session_duration_s: f64,
    pub frame_shift_ms: f64,
    pub seed: u64,
}

impl CorpusSpec {
    fn validate(&self) -> Result<()> {
        if self.languages.is_empty()
            || self.speakers_per_language == 0
            || self.sessions_per_speaker == 0
        {
            return Err(Error::InvalidConfig {
                detail: "corpus spec needs at least one language, speaker and session".into(),
            });
        }
        if self.session_duration_s <= 0.0 || self.frame_shift_ms <= 0.0 {
            return Err(Error::InvalidConfig {
                detail: "session duration and frame shift must be positive".into(),
            });
        }
        for lang in &self.languages {
            lang.validate()?;
            if lang.speaker_offsets.len() < self.speakers_per_language {
                return Err(Error::InvalidConfig {
                    detail: format!(
                        "language {} has {} speaker offsets, need {}",
                        lang.id,
                        lang.speaker_offsets.len(),
                        self.speakers_per_language
                    ),
                });
            }
        }
        Ok(())
    }
}

/// One generated session with its identity tags.
#[derive(Debug, Clone)]
pub struct SessionRecord {
    pub features: FeatureMatrix,
    pub language: String,
    pub speaker: usize,
    pub session: usize,
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for one (language, speaker, session) stream.
pub fn session_seed(base: u64, language: usize, speaker: usize, session: usize) -> u64 {
    let a = splitmix64(base ^ language as u64);
    let b = splitmix64(a ^ speaker as u64);
    splitmix64(b ^ session as u64)
}

/// Generate every session of the corpus. Fully reproducible from the seed;
/// sessions may be generated in any order without changing their content.
pub fn generate(spec: &CorpusSpec) -> Result<Vec<SessionRecord>> {
    spec.validate()?;
    let frames_per_session = (spec.session_duration_s * 1000.0 / spec.frame_shift_ms).round() as usize;
    let mut records = Vec::new();
    for (li, lang) in spec.languages.iter().enumerate() {
        for speaker in 0..spec.speakers_per_language {
            for session in 0..spec.sessions_per_speaker {
                let seed = session_seed(spec.seed, li, speaker, session);
                let features = generate_session(
                    lang,
                    &lang.speaker_offsets[speaker],
                    frames_per_session,
                    spec.frame_shift_ms,
                    seed,
                )?;
                records.push(SessionRecord {
                    features,
                    language: lang.id.clone(),
                    speaker,
                    session,
                });
            }
        }
    }
    Ok(records)
}

fn generate_session(
    lang: &SyntheticLanguage,
    offset: &Array1<f64>,
    frames: usize,
    frame_shift_ms: f64,
    seed: u64,
) -> Result<FeatureMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = lang.emission.num_components();
    let d = lang.emission.dim();
    let mut out = Array2::zeros((frames, d));
    let mut state = rng.random_range(0..m);
    for t in 0..frames {
        if t > 0 {
            state = sample_row(&mut rng, lang.transition.row(state));
        }
        for j in 0..d {
            let noise: f64 = rng.sample(StandardNormal);
            out[[t, j]] = lang.emission.means[[state, j]]
                + offset[j]
                + lang.emission.variances[[state, j]].sqrt() * noise;
        }
    }
    FeatureMatrix::new(out, frame_shift_ms, Some(lang.id.clone()))
}

fn sample_row(rng: &mut ChaCha8Rng, row: ndarray::ArrayView1<f64>) -> usize {
    let mut target: f64 = rng.random_range(0.0..1.0);
    for (i, &p) in row.iter().enumerate() {
        if target < p {
            return i;
        }
        target -= p;
    }
    row.len() - 1
}

/// Cyclic transition: from state `i`, advance by `advance` with probability
/// `stay_prob` plus the uniform residue, otherwise jump uniformly. Doubly
/// stochastic, so the stationary distribution is uniform.
pub fn cyclic_transition(m: usize, advance: usize, stay_prob: f64) -> Array2<f64> {
    let residue = (1.0 - stay_prob) / m as f64;
    let mut t = Array2::from_elem((m, m), residue);
    for i in 0..m {
        t[[i, (i + advance) % m]] += stay_prob;
    }
    t
}

/// Uniform transition matrix (iid component draws).
pub fn uniform_transition(m: usize) -> Array2<f64> {
    Array2::from_elem((m, m), 1.0 / m as f64)
}

/// Unit-variance emission whose component means sit on an axis lattice:
/// global component index `g` is placed at radius `separation * (1 + g/d)`
/// along axis `g % d`, so all components across all languages are pairwise
/// at least `separation` standard deviations apart.
fn lattice_means(lang_index: usize, components: usize, dim: usize, separation: f64) -> Array2<f64> {
    let mut means = Array2::zeros((components, dim));
    for c in 0..components {
        let g = lang_index * components + c;
        let axis = g % dim;
        let tier = (g / dim + 1) as f64;
        means[[c, axis]] = separation * tier;
    }
    means
}

/// Hierarchical constellation: `components` shared slots spaced four
/// separations apart, each language realising slot `c` at its own
/// `separation`-sized offset from the slot centre. Every pair of emission
/// means across all languages stays at least `separation` apart, while a UBM
/// with `components` mixtures straddles each slot, so MAP-adapted means pick
/// up the language offsets.
fn slot_variant_means(
    lang_index: usize,
    components: usize,
    dim: usize,
    separation: f64,
) -> Array2<f64> {
    let slot_gap = 4.0 * separation;
    let mut means = Array2::zeros((components, dim));
    for c in 0..components {
        let slot_axis = c % dim;
        let tier = (c / dim + 1) as f64;
        means[[c, slot_axis]] += slot_gap * tier;
        let shift_axis = (c + 1 + lang_index) % dim;
        means[[c, shift_axis]] += separation;
    }
    means
}

fn emission_from_means(means: Array2<f64>) -> DiagGmm {
    let m = means.nrows();
    let d = means.ncols();
    DiagGmm::new(
        Array1::from_elem(m, 1.0 / m as f64),
        means,
        Array2::ones((m, d)),
    )
    .expect("valid emission")
}

fn gaussian_offsets(
    count: usize,
    dim: usize,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Array1<f64>> {
    (0..count)
        .map(|_| Array1::from_shape_fn(dim, |_| scale * rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

/// Languages with disjoint emission means (pairwise component separation
/// >= `separation` sigmas across all languages) and distinct cyclic
/// dynamics. Languages realise shared acoustic slots at language-specific
/// offsets, which is what gives supervector differences their signal.
pub fn separated_languages(
    n_languages: usize,
    components: usize,
    dim: usize,
    separation: f64,
    speakers: usize,
    speaker_scale: f64,
    seed: u64,
) -> Vec<SyntheticLanguage> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    (0..n_languages)
        .map(|l| SyntheticLanguage {
            id: format!("lang{l:02}"),
            emission: emission_from_means(slot_variant_means(l, components, dim, separation)),
            transition: cyclic_transition(components, 1 + l % components.max(2), 0.5),
            speaker_offsets: gaussian_offsets(speakers, dim, speaker_scale, &mut rng),
        })
        .collect()
}

/// Languages sharing one emission density but with different temporal
/// dynamics: supervectors cannot tell them apart, skipgrams can.
pub fn shared_emission_languages(
    advances: &[usize],
    components: usize,
    dim: usize,
    separation: f64,
    speakers: usize,
    speaker_scale: f64,
    seed: u64,
) -> Vec<SyntheticLanguage> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let emission = emission_from_means(lattice_means(0, components, dim, separation));
    advances
        .iter()
        .enumerate()
        .map(|(l, &advance)| SyntheticLanguage {
            id: format!("lang{l:02}"),
            emission: emission.clone(),
            transition: cyclic_transition(components, advance, 0.8),
            speaker_offsets: gaussian_offsets(speakers, dim, speaker_scale, &mut rng),
        })
        .collect()
}

/// Write a sine tone as 16-bit PCM WAV, for audio-path tests.
pub fn write_tone(
    freq_hz: f64,
    amplitude: f64,
    sample_rate: u32,
    duration_s: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let n = (duration_s * sample_rate as f64).round() as usize;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            amplitude * (2.0 * std::f64::consts::PI * freq_hz * i as f64 / sample_rate as f64).sin()
        })
        .collect();
    let clip = AudioClip::new(samples, sample_rate, format!("tone-{freq_hz}hz"))?;
    write_wav(&clip, path, WavEncoding::Pcm16)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::read_wav;
    use tempfile::tempdir;

    fn small_spec(seed: u64) -> CorpusSpec {
        CorpusSpec {
            languages: separated_languages(2, 3, 4, 6.0, 2, 0.3, seed),
            speakers_per_language: 2,
            sessions_per_speaker: 2,
            session_duration_s: 10.0,
            frame_shift_ms: 10.0,
            seed,
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = generate(&small_spec(42)).unwrap();
        let b = generate(&small_spec(42)).unwrap();
        assert_eq!(a.len(), b.len());
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.language, rb.language);
            assert_eq!(ra.features.frames, rb.features.frames);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate(&small_spec(1)).unwrap();
        let b = generate(&small_spec(2)).unwrap();
        assert_ne!(a[0].features.frames, b[0].features.frames);
    }

    #[test]
    fn sixty_seconds_gives_six_thousand_frames() {
        let mut spec = small_spec(3);
        spec.session_duration_s = 60.0;
        let records = generate(&spec).unwrap();
        assert!(records.iter().all(|r| r.features.num_frames() == 6000));
    }

    #[test]
    fn empirical_moments_match_stationary_mixture() {
        // Fast-mixing chain so the iid standard-error bound applies.
        let dim = 3;
        let components = 4;
        let lang = SyntheticLanguage {
            id: "m".into(),
            emission: emission_from_means(lattice_means(0, components, dim, 4.0)),
            transition: cyclic_transition(components, 1, 0.2),
            speaker_offsets: vec![Array1::zeros(dim)],
        };
        let spec = CorpusSpec {
            languages: vec![lang.clone()],
            speakers_per_language: 1,
            sessions_per_speaker: 1,
            session_duration_s: 1000.0,
            frame_shift_ms: 10.0,
            seed: 7,
        };
        let records = generate(&spec).unwrap();
        let frames = &records[0].features.frames;
        let n = frames.nrows() as f64;

        // Stationary distribution of a doubly stochastic chain is uniform, so
        // the mixture moments are plain component averages.
        for j in 0..dim {
            let mixture_mean: f64 =
                (0..components).map(|c| lang.emission.means[[c, j]]).sum::<f64>()
                    / components as f64;
            let second: f64 = (0..components)
                .map(|c| {
                    lang.emission.variances[[c, j]] + lang.emission.means[[c, j]].powi(2)
                })
                .sum::<f64>()
                / components as f64;
            let mixture_var = second - mixture_mean * mixture_mean;

            let emp_mean = frames.column(j).sum() / n;
            let se = (mixture_var / n).sqrt();
            assert!(
                (emp_mean - mixture_mean).abs() <= 3.0 * se,
                "dim {j}: mean {emp_mean} vs {mixture_mean} (3se = {})",
                3.0 * se
            );

            let emp_var =
                frames.column(j).iter().map(|x| (x - emp_mean).powi(2)).sum::<f64>() / n;
            // SE of the variance ~ sqrt(2/n) * var for near-Gaussian data;
            // mixtures are heavier-tailed, so allow a kurtosis margin.
            let se_var = mixture_var * (8.0 / n).sqrt();
            assert!(
                (emp_var - mixture_var).abs() <= 3.0 * se_var,
                "dim {j}: var {emp_var} vs {mixture_var}"
            );
        }
    }

    #[test]
    fn lattice_separation_holds_across_languages() {
        let langs = separated_languages(3, 4, 5, 6.0, 1, 0.0, 0);
        let mut all_means = Vec::new();
        for lang in &langs {
            for c in 0..4 {
                all_means.push(lang.emission.means.row(c).to_owned());
            }
        }
        for i in 0..all_means.len() {
            for j in 0..i {
                let dist: f64 = (&all_means[i] - &all_means[j])
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt();
                assert!(dist >= 6.0 - 1e-9, "components {i},{j} at distance {dist}");
            }
        }
    }

    #[test]
    fn shared_emissions_are_identical_across_languages() {
        let langs = shared_emission_languages(&[1, 2], 4, 3, 6.0, 1, 0.0, 5);
        assert_eq!(langs[0].emission.means, langs[1].emission.means);
        assert_ne!(langs[0].transition, langs[1].transition);
    }

    #[test]
    fn zero_amplitude_tone_is_digital_silence() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("silent.wav");
        write_tone(440.0, 0.0, 16000, 1.0, &path).unwrap();
        let clip = read_wav(&path).unwrap();
        assert_eq!(clip.samples.len(), 16000);
        assert!(clip.samples.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn tone_sample_count_and_radio_oracle() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("a440.wav");
        write_tone(440.0, 0.5, 16000, 2.0, &path).unwrap();
        let clip = read_wav(&path).unwrap();
        assert_eq!(clip.samples.len(), 32000);
        for (i, &s) in clip.samples.iter().enumerate() {
            let expect =
                0.5 * (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 16000.0).sin();
            assert!((s - expect).abs() <= 2f64.powi(-15), "sample {i}");
        }
    }

    #[test]
    fn invalid_transition_is_rejected() {
        let mut langs = separated_languages(1, 3, 4, 6.0, 1, 0.0, 0);
        langs[0].transition[[0, 0]] += 0.5;
        let spec = CorpusSpec {
            languages: langs,
            speakers_per_language: 1,
            sessions_per_speaker: 1,
            session_duration_s: 1.0,
            frame_shift_ms: 10.0,
            seed: 0,
        };
        assert!(generate(&spec).is_err());
    }
}
