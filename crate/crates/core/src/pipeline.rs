//! End-to-end orchestration: training both identification schemes,
//! test-phase identification, sliding-window segmentation and model
//! persistence.
//!
//! Training runs feature normalisation, UBM estimation on the pooled
//! sessions, per-utterance MAP adaptation, the scheme's feature matrix
//! (flattened skipgrams or supervector differences), the energy-truncated
//! SVD embedding and the one-vs-rest SVMs. Every stage failure is labelled
//! with the stage that produced it. Identical seeds and inputs give
//! byte-identical model files.

use ndarray::{Array1, Array2};
use std::path::Path;

use crate::audio::{read_wav, remove_silence, VadConfig};
use crate::container::ModelContainer;
use crate::embedding::{self, EmbeddedMatrix, EmbeddingSpace};
use crate::error::{Error, Result, StageExt};
use crate::features::{cmn_sliding, mfcc, FeatureMatrix, MfccConfig};
use crate::gmm::{self, DiagGmm, MapConfig};
use crate::ngram::{self, SkipgramConfig};
use crate::segmentation::{segment_with, SegmentationConfig, SegmentationTrace};
use crate::supervector;
use crate::svm::{self, SvmModel, TrainConfig};

/// Which feature representation a system uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Flattened skipgram transition matrices of decoded symbol sequences.
    Ngram,
    /// UBM-centred mean supervector differences.
    Supervector,
}

impl Scheme {
    pub fn code(self) -> u8 {
        match self {
            Scheme::Ngram => 1,
            Scheme::Supervector => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(Scheme::Ngram),
            2 => Ok(Scheme::Supervector),
            other => Err(Error::InvalidConfig {
                detail: format!("unknown scheme {other}, expected 1 or 2"),
            }),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// Everything the training phase needs to know.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub scheme: Scheme,
    pub mixtures: usize,
    pub em_iters: usize,
    /// Cap on pooled UBM frames; larger pools are evenly strided down.
    pub ubm_max_frames: usize,
    pub skip_k: usize,
    pub energy_tau: f64,
    pub map_relevance: f64,
    /// Sliding CMN window; `None` disables normalisation.
    pub cmn_window_s: Option<f64>,
    pub svm_c: f64,
    pub svm_tolerance: f64,
    pub svm_max_passes: usize,
    /// Sessions are split into adaptation utterances of this length.
    pub utterance_duration_s: f64,
    pub min_test_duration_s: f64,
    pub decode_with_weights: bool,
    pub seed: u64,
    /// Audio front-end settings, used when ingesting WAV files.
    pub mfcc: MfccConfig,
    pub vad: VadConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            scheme: Scheme::Supervector,
            mixtures: 64,
            em_iters: 10,
            ubm_max_frames: 200_000,
            skip_k: 1,
            energy_tau: 0.60,
            map_relevance: 16.0,
            cmn_window_s: Some(1.0),
            svm_c: 1.0,
            svm_tolerance: 1e-4,
            svm_max_passes: 10_000,
            utterance_duration_s: 60.0,
            min_test_duration_s: 1.0,
            decode_with_weights: true,
            seed: 0,
            mfcc: MfccConfig::default(),
            vad: VadConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Apply one `key=value` setting from a plain-text config file.
    ///
    /// Keys: `frame_ms`, `shift_ms`, `cmn_window_s`, `mixtures`,
    /// `map_relevance`, `skip_k`, `energy_tau`, `svm_c`, `seed`.
    pub fn apply_key(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |detail: String| Error::InvalidConfig { detail };
        let parse_f64 = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| bad(format!("bad number for {key}: {v}")))
        };
        let parse_usize = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| bad(format!("bad integer for {key}: {v}")))
        };
        match key {
            "frame_ms" => self.mfcc.frame_ms = parse_f64(value)?,
            "shift_ms" => self.mfcc.shift_ms = parse_f64(value)?,
            "cmn_window_s" => {
                self.cmn_window_s = if value == "none" {
                    None
                } else {
                    Some(parse_f64(value)?)
                }
            }
            "mixtures" => self.mixtures = parse_usize(value)?,
            "map_relevance" => self.map_relevance = parse_f64(value)?,
            "skip_k" => self.skip_k = parse_usize(value)?,
            "energy_tau" => self.energy_tau = parse_f64(value)?,
            "svm_c" => self.svm_c = parse_f64(value)?,
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|_| bad(format!("bad seed: {value}")))?
            }
            other => return Err(bad(format!("unknown configuration key {other}"))),
        }
        Ok(())
    }

    /// Parse a whole `key=value` config file (one pair per line, `#` comments).
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::InvalidConfig {
                detail: format!("config line {}: expected key=value", lineno + 1),
            })?;
            self.apply_key(k.trim(), v.trim())?;
        }
        Ok(())
    }
}

/// A trained identification system: UBM, embedding space and classifiers,
/// plus the front-end settings they were trained with.
#[derive(Debug, Clone)]
pub struct TrainedSystem {
    pub scheme: Scheme,
    pub ubm: DiagGmm,
    pub skip_k: usize,
    pub embedding: EmbeddingSpace,
    pub svm: SvmModel,
    pub map_relevance: f64,
    pub cmn_window_s: Option<f64>,
    pub decode_with_weights: bool,
    pub min_test_duration_s: f64,
}

impl TrainedSystem {
    pub fn classes(&self) -> &[String] {
        &self.svm.classes
    }

    fn feature_dim(&self) -> usize {
        match self.scheme {
            Scheme::Ngram => self.ubm.num_components() * self.ubm.num_components(),
            Scheme::Supervector => self.ubm.num_components() * self.ubm.dim(),
        }
    }

    fn check_consistency(&self) -> Result<()> {
        if self.embedding.ambient_dim != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim(),
                actual: self.embedding.ambient_dim,
            });
        }
        if self.svm.input_dim() != self.embedding.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.embedding.rank(),
                actual: self.svm.input_dim(),
            });
        }
        Ok(())
    }

    /// Run the test phase up to the embedded coordinates.
    pub fn project_utterance(&self, utterance: &FeatureMatrix) -> Result<Array1<f64>> {
        if utterance.dim() != self.ubm.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ubm.dim(),
                actual: utterance.dim(),
            }
            .in_stage("identify/input"));
        }
        let normalised = match self.cmn_window_s {
            Some(w) => cmn_sliding(utterance, w).stage("identify/cmn")?,
            None => utterance.clone(),
        };
        let adapted = gmm::map_adapt(
            &self.ubm,
            &normalised,
            &MapConfig {
                relevance: self.map_relevance,
            },
        )
        .stage("identify/map")?;
        let vector = match self.scheme {
            Scheme::Ngram => {
                let symbols = gmm::decode_symbols(&adapted, &normalised, self.decode_with_weights)
                    .stage("identify/decode")?;
                let cfg = SkipgramConfig::new(self.skip_k, self.ubm.num_components())?;
                let b = ngram::skipgram(&symbols, &cfg).stage("identify/skipgram")?;
                ngram::flatten(&b)
            }
            Scheme::Supervector => {
                supervector::difference_vector(&adapted, &self.ubm).stage("identify/supervector")?
            }
        };
        embedding::project(&self.embedding, vector.view()).stage("identify/project")
    }

    /// Identify the language of one utterance: MAP adaptation, scheme
    /// features, projection and SVM argmax.
    pub fn identify(&self, utterance: &FeatureMatrix) -> Result<(String, Array1<f64>)> {
        let duration = utterance.duration_s();
        if duration + 1e-9 < self.min_test_duration_s {
            return Err(Error::UtteranceTooShort {
                duration_s: duration,
                min_s: self.min_test_duration_s,
            }
            .in_stage("identify/input"));
        }
        let coords = self.project_utterance(utterance)?;
        svm::predict(&self.svm, coords.view()).stage("identify/predict")
    }

    /// Sliding-window segmentation of a multi-language stream, classifying
    /// every window independently with the full test phase.
    pub fn segment(
        &self,
        stream: &FeatureMatrix,
        cfg: &SegmentationConfig,
    ) -> Result<SegmentationTrace> {
        segment_with(stream, cfg, |window| {
            self.identify(window)
                .map(|(class, scores)| (class, scores.to_vec()))
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_container().write(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedSystem> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::ModelNotFound {
                path: path.display().to_string(),
            });
        }
        let container = ModelContainer::read(path)?;
        Self::from_container(&container, &path.display().to_string())
    }

    pub fn to_container(&self) -> ModelContainer {
        let mut c = ModelContainer::new();
        let m = self.ubm.num_components();
        let d = self.ubm.dim();
        c.set_meta("kind", "model");
        c.set_meta("scheme", self.scheme.to_string());
        c.set_meta("mixtures", m.to_string());
        c.set_meta("feature_dim", d.to_string());
        c.set_meta("skip_k", self.skip_k.to_string());
        c.set_meta("energy_tau", format!("{:?}", self.embedding.energy_fraction));
        c.set_meta("map_relevance", format!("{:?}", self.map_relevance));
        c.set_meta(
            "cmn_window_s",
            match self.cmn_window_s {
                Some(w) => format!("{w:?}"),
                None => "none".to_string(),
            },
        );
        c.set_meta(
            "decode_with_weights",
            if self.decode_with_weights { "true" } else { "false" },
        );
        c.set_meta("svm_c", format!("{:?}", self.svm.c));
        c.set_meta("min_test_duration_s", format!("{:?}", self.min_test_duration_s));
        c.set_meta("classes", self.svm.classes.join(","));

        let push = |c: &mut ModelContainer, name: &str, shape: Vec<usize>, data: Vec<f64>| {
            c.push_array(name, shape, data).expect("consistent shapes");
        };
        push(&mut c, "ubm_weights", vec![m], self.ubm.weights.to_vec());
        push(
            &mut c,
            "ubm_means",
            vec![m, d],
            self.ubm.means.iter().cloned().collect(),
        );
        push(
            &mut c,
            "ubm_variances",
            vec![m, d],
            self.ubm.variances.iter().cloned().collect(),
        );
        push(
            &mut c,
            "spectrum",
            vec![self.embedding.spectrum.len()],
            self.embedding.spectrum.to_vec(),
        );
        push(
            &mut c,
            "singular_values",
            vec![self.embedding.rank()],
            self.embedding.singular_values.to_vec(),
        );
        push(
            &mut c,
            "basis",
            vec![self.embedding.ambient_dim, self.embedding.rank()],
            self.embedding.basis.iter().cloned().collect(),
        );
        push(
            &mut c,
            "svm_weights",
            vec![self.svm.num_classes(), self.svm.input_dim()],
            self.svm.weights.iter().cloned().collect(),
        );
        push(
            &mut c,
            "svm_biases",
            vec![self.svm.num_classes()],
            self.svm.biases.to_vec(),
        );
        c
    }

    pub fn from_container(c: &ModelContainer, path: &str) -> Result<TrainedSystem> {
        let integrity = |detail: String| Error::ContainerIntegrity {
            path: path.into(),
            detail,
        };
        if c.require_meta("kind", path)? != "model" {
            return Err(integrity("container does not hold a model".into()));
        }
        let scheme = Scheme::from_code(
            c.require_meta("scheme", path)?
                .parse::<u8>()
                .map_err(|_| integrity("bad scheme".into()))?,
        )?;
        let parse_f64 = |key: &str| -> Result<f64> {
            c.require_meta(key, path)?
                .parse::<f64>()
                .map_err(|_| integrity(format!("bad float for {key}")))
        };
        let parse_usize = |key: &str| -> Result<usize> {
            c.require_meta(key, path)?
                .parse::<usize>()
                .map_err(|_| integrity(format!("bad integer for {key}")))
        };
        let m = parse_usize("mixtures")?;
        let d = parse_usize("feature_dim")?;
        let skip_k = parse_usize("skip_k")?;
        let energy_tau = parse_f64("energy_tau")?;
        let map_relevance = parse_f64("map_relevance")?;
        let cmn_window_s = match c.require_meta("cmn_window_s", path)? {
            "none" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| integrity("bad float for cmn_window_s".into()))?,
            ),
        };
        let decode_with_weights = c.require_meta("decode_with_weights", path)? == "true";
        let svm_c = parse_f64("svm_c")?;
        let min_test_duration_s = parse_f64("min_test_duration_s")?;
        let classes: Vec<String> = c
            .require_meta("classes", path)?
            .split(',')
            .map(String::from)
            .collect();

        let to_array1 = |name: &str| -> Result<Array1<f64>> {
            let a = c.array(name, path)?;
            Ok(Array1::from_vec(a.data.clone()))
        };
        let to_array2 = |name: &str| -> Result<Array2<f64>> {
            let a = c.array(name, path)?;
            if a.shape.len() != 2 {
                return Err(integrity(format!("array {name} is not 2-d")));
            }
            Array2::from_shape_vec((a.shape[0], a.shape[1]), a.data.clone())
                .map_err(|_| integrity(format!("array {name} shape/data mismatch")))
        };

        let ubm = DiagGmm::new(
            to_array1("ubm_weights")?,
            to_array2("ubm_means")?,
            to_array2("ubm_variances")?,
        )?;
        if ubm.num_components() != m || ubm.dim() != d {
            return Err(integrity("UBM arrays disagree with manifest dimensions".into()));
        }
        let singular_values = to_array1("singular_values")?;
        let basis = to_array2("basis")?;
        if basis.ncols() != singular_values.len() {
            return Err(integrity("basis columns disagree with singular values".into()));
        }
        let embedding = EmbeddingSpace {
            singular_values,
            basis,
            spectrum: to_array1("spectrum")?,
            energy_fraction: energy_tau,
            ambient_dim: 0, // set below from the basis
        };
        let embedding = EmbeddingSpace {
            ambient_dim: embedding.basis.nrows(),
            ..embedding
        };
        let svm_weights = to_array2("svm_weights")?;
        let svm_biases = to_array1("svm_biases")?;
        if svm_weights.nrows() != classes.len() || svm_biases.len() != classes.len() {
            return Err(integrity("classifier arrays disagree with class list".into()));
        }
        if svm_weights.ncols() != embedding.rank() {
            return Err(integrity(format!(
                "classifier expects {} dimensions but embedding retains {}",
                svm_weights.ncols(),
                embedding.rank()
            )));
        }
        let system = TrainedSystem {
            scheme,
            ubm,
            skip_k,
            embedding,
            svm: SvmModel {
                classes,
                weights: svm_weights,
                biases: svm_biases,
                c: svm_c,
            },
            map_relevance,
            cmn_window_s,
            decode_with_weights,
            min_test_duration_s,
        };
        system.check_consistency().map_err(|e| match e {
            Error::DimensionMismatch { expected, actual } => integrity(format!(
                "inconsistent dimensions in container: expected {expected}, found {actual}"
            )),
            other => other,
        })?;
        Ok(system)
    }
}

/// Intermediate training products, exposed for inspection and tests.
#[derive(Debug, Clone)]
pub struct TrainingArtifacts {
    pub system: TrainedSystem,
    /// Scheme feature matrix dimensions (rows x columns).
    pub feature_matrix_shape: (usize, usize),
    /// Projected training coordinates.
    pub training_embedding: EmbeddedMatrix,
}

/// Train a system on labelled sessions (feature level).
pub fn train(sessions: &[(FeatureMatrix, String)], cfg: &PipelineConfig) -> Result<TrainedSystem> {
    train_with_artifacts(sessions, cfg).map(|a| a.system)
}

/// [`train`] variant that also returns the intermediate products.
pub fn train_with_artifacts(
    sessions: &[(FeatureMatrix, String)],
    cfg: &PipelineConfig,
) -> Result<TrainingArtifacts> {
    let mut languages: Vec<&str> = sessions.iter().map(|(_, l)| l.as_str()).collect();
    languages.sort();
    languages.dedup();
    if languages.len() < 2 {
        return Err(Error::NotEnoughClasses {
            found: languages.len(),
        }
        .in_stage("train/corpus"));
    }

    // Normalised sessions feed the UBM pool.
    let normalised: Vec<FeatureMatrix> = sessions
        .iter()
        .map(|(fm, _)| match cfg.cmn_window_s {
            Some(w) => cmn_sliding(fm, w),
            None => Ok(fm.clone()),
        })
        .collect::<Result<_>>()
        .stage("train/cmn")?;

    let dim = normalised[0].dim();
    for fm in &normalised {
        if fm.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: fm.dim(),
            }
            .in_stage("train/corpus"));
        }
    }
    let total_frames: usize = normalised.iter().map(|fm| fm.num_frames()).sum();
    let pool_size = total_frames.min(cfg.ubm_max_frames);
    let stride = (total_frames / pool_size).max(1);
    let mut pool = Array2::zeros((total_frames.div_ceil(stride), dim));
    let mut write = 0usize;
    let mut global_index = 0usize;
    for fm in &normalised {
        for row in fm.frames.rows() {
            if global_index % stride == 0 && write < pool.nrows() {
                pool.row_mut(write).assign(&row);
                write += 1;
            }
            global_index += 1;
        }
    }
    let pool = pool.slice(ndarray::s![..write, ..]).to_owned();

    let ubm = gmm::train_ubm(pool.view(), cfg.mixtures, cfg.em_iters, cfg.seed)
        .stage("train/ubm")?;

    // Split sessions into adaptation utterances and normalise each on its own,
    // mirroring the test phase.
    let mut utterances: Vec<(FeatureMatrix, String)> = Vec::new();
    for (fm, lang) in sessions {
        let clips = ((fm.duration_s() / cfg.utterance_duration_s).floor() as usize).max(1);
        for i in 0..clips {
            let clip = fm
                .slice_seconds(i as f64 * cfg.utterance_duration_s, cfg.utterance_duration_s)
                .stage("train/split")?;
            let clip = match cfg.cmn_window_s {
                Some(w) => cmn_sliding(&clip, w).stage("train/cmn")?,
                None => clip,
            };
            utterances.push((clip, lang.clone()));
        }
    }

    let map_cfg = MapConfig {
        relevance: cfg.map_relevance,
    };
    let adapted: Vec<(DiagGmm, String)> = utterances
        .iter()
        .map(|(fm, lang)| Ok((gmm::map_adapt(&ubm, fm, &map_cfg)?, lang.clone())))
        .collect::<Result<_>>()
        .stage("train/map")?;

    let (rows, labels) = match cfg.scheme {
        Scheme::Ngram => {
            let sg_cfg = SkipgramConfig::new(cfg.skip_k, cfg.mixtures)?;
            let seqs: Vec<(gmm::SymbolSequence, String)> = adapted
                .iter()
                .zip(&utterances)
                .map(|((model, lang), (fm, _))| {
                    Ok((
                        gmm::decode_symbols(model, fm, cfg.decode_with_weights)?,
                        lang.clone(),
                    ))
                })
                .collect::<Result<_>>()
                .stage("train/decode")?;
            let um = ngram::build_utterance_matrix(&seqs, &sg_cfg).stage("train/ngram")?;
            (um.rows, um.labels)
        }
        Scheme::Supervector => {
            let dm = supervector::build_difference_matrix(&adapted, &ubm)
                .stage("train/supervector")?;
            (dm.rows, dm.labels)
        }
    };
    let shape = rows.dim();

    let (space, embedded) =
        embedding::fit(&rows, &labels, cfg.energy_tau).stage("train/embedding")?;

    let svm_model = svm::train(
        &embedded,
        &TrainConfig {
            c: cfg.svm_c,
            tolerance: cfg.svm_tolerance,
            max_passes: cfg.svm_max_passes,
            seed: cfg.seed,
        },
    )
    .stage("train/svm")?;

    let system = TrainedSystem {
        scheme: cfg.scheme,
        ubm,
        skip_k: cfg.skip_k,
        embedding: space,
        svm: svm_model,
        map_relevance: cfg.map_relevance,
        cmn_window_s: cfg.cmn_window_s,
        decode_with_weights: cfg.decode_with_weights,
        min_test_duration_s: cfg.min_test_duration_s,
    };
    system.check_consistency().stage("train/consistency")?;
    Ok(TrainingArtifacts {
        system,
        feature_matrix_shape: shape,
        training_embedding: embedded,
    })
}

/// Full audio front-end for WAV input: read, strip silence, extract MFCCs.
pub fn features_from_wav(path: impl AsRef<Path>, cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    let clip = read_wav(path).stage("frontend/read")?;
    let voiced = remove_silence(&clip, &cfg.vad).stage("frontend/vad")?;
    mfcc(&voiced, &cfg.mfcc).stage("frontend/mfcc")
}

/// Write a corpus as one feature container per session plus a plain-text
/// manifest (`language speaker session path` per line). Returns the manifest
/// path.
pub fn save_corpus(
    records: &[crate::synthcorpus::SessionRecord],
    dir: impl AsRef<Path>,
) -> Result<std::path::PathBuf> {
    let dir = dir.as_ref();
    let feature_dir = dir.join("features");
    std::fs::create_dir_all(&feature_dir).map_err(|e| Error::Io {
        path: feature_dir.display().to_string(),
        source: e,
    })?;
    let mut manifest = String::new();
    for r in records {
        let file = feature_dir.join(format!(
            "{}_spk{:02}_sess{:02}.feat",
            r.language, r.speaker, r.session
        ));
        save_features(&r.features, &file)?;
        manifest.push_str(&format!(
            "{} {} {} {}\n",
            r.language,
            r.speaker,
            r.session,
            file.display()
        ));
    }
    let manifest_path = dir.join("corpus.manifest");
    std::fs::write(&manifest_path, manifest).map_err(|e| Error::Io {
        path: manifest_path.display().to_string(),
        source: e,
    })?;
    Ok(manifest_path)
}

/// Load the sessions listed in a corpus manifest.
pub fn load_corpus(manifest: impl AsRef<Path>) -> Result<Vec<(FeatureMatrix, String)>> {
    let manifest = manifest.as_ref();
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::Io {
        path: manifest.display().to_string(),
        source: e,
    })?;
    let mut sessions = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(4, ' ');
        let language = parts.next();
        let path = parts.nth(2);
        let (language, path) = match (language, path) {
            (Some(l), Some(p)) => (l, p),
            _ => {
                return Err(Error::InvalidConfig {
                    detail: format!(
                        "manifest line {}: expected `language speaker session path`",
                        lineno + 1
                    ),
                })
            }
        };
        let features = load_features(path)?;
        sessions.push((features, language.to_string()));
    }
    if sessions.is_empty() {
        return Err(Error::InvalidConfig {
            detail: format!("manifest {} lists no sessions", manifest.display()),
        });
    }
    Ok(sessions)
}

/// Save a feature matrix in the container format.
pub fn save_features(fm: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut c = ModelContainer::new();
    c.set_meta("kind", "features");
    c.set_meta("frame_shift_ms", format!("{:?}", fm.frame_shift_ms));
    c.set_meta("label", fm.label.as_deref().unwrap_or(""));
    c.push_array(
        "features",
        vec![fm.num_frames(), fm.dim()],
        fm.frames.iter().cloned().collect(),
    )?;
    c.write(path)
}

/// Load a feature matrix saved by [`save_features`].
pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let c = ModelContainer::read(path)?;
    let path_str = path.display().to_string();
    if c.require_meta("kind", &path_str)? != "features" {
        return Err(Error::ContainerIntegrity {
            path: path_str,
            detail: "container does not hold features".into(),
        });
    }
    let shift: f64 = c
        .require_meta("frame_shift_ms", &path_str)?
        .parse()
        .map_err(|_| Error::ContainerIntegrity {
            path: path_str.clone(),
            detail: "bad frame_shift_ms".into(),
        })?;
    let label = c.meta("label").filter(|l| !l.is_empty()).map(String::from);
    let a = c.array("features", &path_str)?;
    if a.shape.len() != 2 {
        return Err(Error::ContainerIntegrity {
            path: path_str,
            detail: "features array is not 2-d".into(),
        });
    }
    let frames = Array2::from_shape_vec((a.shape[0], a.shape[1]), a.data.clone()).map_err(|_| {
        Error::ContainerIntegrity {
            path: path_str,
            detail: "features shape/data mismatch".into(),
        }
    })?;
    FeatureMatrix::new(frames, shift, label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_codes_roundtrip() {
        assert_eq!(Scheme::from_code(1).unwrap(), Scheme::Ngram);
        assert_eq!(Scheme::from_code(2).unwrap(), Scheme::Supervector);
        assert!(Scheme::from_code(3).is_err());
        assert_eq!(Scheme::Ngram.code(), 1);
    }

    #[test]
    fn config_file_keys_apply() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_file_text(
            "# comment\nframe_ms=20\nshift_ms=5\ncmn_window_s=2.5\nmixtures=32\n\
             map_relevance=8\nskip_k=3\nenergy_tau=0.55\nsvm_c=10\nseed=77\n",
        )
        .unwrap();
        assert_eq!(cfg.mfcc.frame_ms, 20.0);
        assert_eq!(cfg.mfcc.shift_ms, 5.0);
        assert_eq!(cfg.cmn_window_s, Some(2.5));
        assert_eq!(cfg.mixtures, 32);
        assert_eq!(cfg.map_relevance, 8.0);
        assert_eq!(cfg.skip_k, 3);
        assert_eq!(cfg.energy_tau, 0.55);
        assert_eq!(cfg.svm_c, 10.0);
        assert_eq!(cfg.seed, 77);
    }

    #[test]
    fn cmn_none_and_unknown_keys() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_key("cmn_window_s", "none").unwrap();
        assert_eq!(cfg.cmn_window_s, None);
        assert!(cfg.apply_key("nonsense", "1").is_err());
        assert!(cfg.apply_key("mixtures", "abc").is_err());
    }

    #[test]
    fn single_language_corpus_is_rejected_with_stage() {
        let fm = FeatureMatrix::new(Array2::zeros((100, 3)), 10.0, None).unwrap();
        let err = train(&[(fm, "only".into())], &PipelineConfig::default()).unwrap_err();
        let text = err.to_string();
        assert!(text.starts_with("train/corpus"), "{text}");
    }
}
