//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("audio file not found: {path}")]
    AudioFileNotFound { path: String },

    #[error("malformed WAV file {path}: {detail}")]
    MalformedWav { path: String, detail: String },

    #[error("unsupported WAV encoding in {path}: {detail}")]
    UnsupportedWav { path: String, detail: String },

    #[error("empty after VAD: every frame is below the energy threshold")]
    EmptyAfterVad,

    #[error("clip too short: {samples} samples, need at least {required} for one frame")]
    ClipTooShort { samples: usize, required: usize },

    #[error("too few frames to train {mixtures} mixtures: {frames} < {required}")]
    TooFewFrames {
        frames: usize,
        mixtures: usize,
        required: usize,
    },

    #[error("feature dimension mismatch: model expects {expected}, input has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("symbol sequence of length {length} is too short for skip parameter {skip}")]
    SequenceTooShort { length: usize, skip: usize },

    #[error("degenerate within-class scatter (trace 0) for candidate window {window_s} s")]
    DegenerateScatter { window_s: f64 },

    #[error("need at least two classes, got {found}")]
    NotEnoughClasses { found: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("input matrix is entirely zero")]
    ZeroMatrix,

    #[error("vector length {actual} does not match expected dimension {expected}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("stream of {duration_s:.2} s is shorter than one {window_s:.2} s window")]
    StreamTooShort { duration_s: f64, window_s: f64 },

    #[error("utterance of {duration_s:.2} s is below the minimum test duration {min_s:.2} s")]
    UtteranceTooShort { duration_s: f64, min_s: f64 },

    #[error("trace covers {trace_s:.1} s but ground truth covers {truth_s:.1} s")]
    DurationMismatch { trace_s: f64, truth_s: f64 },

    #[error("invalid ground truth: {detail}")]
    InvalidGroundTruth { detail: String },

    #[error("insufficient material for language {language}: need {needed} frames, have {available}")]
    InsufficientMaterial {
        language: String,
        needed: usize,
        available: usize,
    },

    #[error("model not found: {path}")]
    ModelNotFound { path: String },

    #[error("container integrity error in {path}: {detail}")]
    ContainerIntegrity { path: String, detail: String },

    #[error("unsupported container version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("array {name}: manifest declares shape {expected:?} but stored shape is {actual:?}")]
    ArrayShapeMismatch {
        name: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("missing array {name} in container")]
    MissingArray { name: String },

    #[error("invalid configuration: {detail}")]
    InvalidConfig { detail: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Wraps an error with the pipeline stage it occurred in.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach a pipeline stage label to an error.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Extension for labelling results with the pipeline stage that produced them.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
