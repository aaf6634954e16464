//! Spoken language identification and segmentation toolkit.
//!
//! Two feature schemes share one acoustic front end (MFCC + sliding CMN) and
//! one GMM-UBM backbone:
//!
//! 1. **Skipgram scheme** — frames are decoded to the best-scoring mixture
//!    component of a MAP-adapted model; skip-`K` bigram transition matrices
//!    over the symbol stream are flattened into per-utterance vectors.
//! 2. **Supervector scheme** — the adapted component means are concatenated
//!    and centred on the UBM supervector.
//!
//! Either matrix of utterance vectors is embedded by a truncated SVD keeping
//! a configurable fraction of squared-singular-value energy, and classified
//! with one-vs-rest linear SVMs. A sliding-window driver applies the full
//! test phase to multi-language streams for segmentation.

pub mod audio;
pub mod container;
pub mod embedding;
pub mod error;
pub mod features;
pub mod gmm;
pub mod ngram;
pub mod pipeline;
pub mod segmentation;
pub mod supervector;
pub mod svm;
pub mod synthcorpus;

pub use error::{Error, Result};
pub use features::{FeatureMatrix, MfccConfig};
pub use gmm::{DiagGmm, MapConfig, SymbolSequence};
pub use pipeline::{PipelineConfig, Scheme, TrainedSystem};
pub use segmentation::{GroundTruth, SegmentationConfig, SegmentationTrace};
