//! Command-line front end: corpus synthesis, training, identification,
//! segmentation and CSV exports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lidsvd::error::Result;
use lidsvd::features::FeatureMatrix;
use lidsvd::pipeline::{
    self, features_from_wav, load_corpus, load_features, save_corpus, PipelineConfig, Scheme,
    TrainedSystem,
};
use lidsvd::segmentation::{frame_accuracy, GroundTruth, SegmentationConfig, SegmentationTrace};
use lidsvd::synthcorpus::{self, CorpusSpec};

#[derive(Parser)]
#[command(
    name = "lidsvd",
    about = "Spoken language identification and segmentation with SVD-embedded GMM-UBM features"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus and write its manifest.
    Synth(SynthArgs),
    /// Train a model from a corpus manifest.
    Train(TrainArgs),
    /// Identify the language of one utterance (feature container or WAV).
    Identify(IdentifyArgs),
    /// Segment a multi-language stream with a sliding window.
    Segment(SegmentArgs),
    /// Score segmentation traces against ground truth, as CSV.
    Eval(EvalArgs),
    /// Export projected training coordinates as CSV.
    ExportEmbedding(ExportEmbeddingArgs),
    /// Export the singular-value energy curve of a model as CSV.
    EnergyCurve(EnergyCurveArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the manifest and feature files.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    languages: usize,
    #[arg(long, default_value_t = 8)]
    speakers: usize,
    #[arg(long, default_value_t = 4)]
    sessions: usize,
    /// Session length in seconds.
    #[arg(long, default_value_t = 180.0)]
    session_duration: f64,
    /// Feature dimension of the synthetic emissions.
    #[arg(long, default_value_t = 39)]
    dim: usize,
    /// Mixture components per synthetic language.
    #[arg(long, default_value_t = 8)]
    components: usize,
    /// Minimum pairwise component separation, in standard deviations.
    #[arg(long, default_value_t = 6.0)]
    separation: f64,
    /// Scale of per-speaker mean shifts.
    #[arg(long, default_value_t = 0.5)]
    speaker_scale: f64,
    #[arg(long, default_value_t = 10.0)]
    frame_shift_ms: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus manifest written by `synth`.
    #[arg(long)]
    corpus: PathBuf,
    /// Where to write the trained model container.
    #[arg(long)]
    out: PathBuf,
    /// 1 = skipgram features, 2 = supervector differences.
    #[arg(long)]
    scheme: u8,
    /// Optional key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mixtures: Option<usize>,
    /// Skip parameter K of the skipgram (scheme 1).
    #[arg(long)]
    skip: Option<usize>,
    /// Retained singular-value energy fraction.
    #[arg(long)]
    energy: Option<f64>,
    #[arg(long)]
    em_iters: Option<usize>,
    #[arg(long)]
    relevance: Option<f64>,
    /// CMN window in seconds, or `none`.
    #[arg(long)]
    cmn_window: Option<String>,
    #[arg(long)]
    svm_c: Option<f64>,
    /// Length of the MAP-adaptation clips split from each session.
    #[arg(long)]
    utterance_duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct IdentifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Feature container (.feat) or WAV file.
    #[arg(long)]
    input: PathBuf,
    /// Truncate the utterance to its first N seconds before identifying.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long)]
    model: PathBuf,
    /// Feature container (.feat) or WAV file holding the stream.
    #[arg(long)]
    input: PathBuf,
    /// Sliding window duration in seconds.
    #[arg(long, default_value_t = 5.0)]
    window: f64,
    /// Window shift in seconds.
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    /// Optional ground-truth segment list (language,start_s,end_s per line).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Where to write the decision trace CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Ground-truth segment list.
    #[arg(long)]
    truth: PathBuf,
    /// Trace CSVs produced by `segment` (repeatable).
    #[arg(long = "trace", required = true)]
    traces: Vec<PathBuf>,
    /// Where to write the accuracy table; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportEmbeddingArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Split each session into clips of this many seconds before projecting.
    #[arg(long, default_value_t = 60.0)]
    utterance_duration: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnergyCurveArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Train(args) => run_train(args),
        Command::Identify(args) => run_identify(args),
        Command::Segment(args) => run_segment(args),
        Command::Eval(args) => run_eval(args),
        Command::ExportEmbedding(args) => run_export_embedding(args),
        Command::EnergyCurve(args) => run_energy_curve(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let spec = CorpusSpec {
        languages: synthcorpus::separated_languages(
            args.languages,
            args.components,
            args.dim,
            args.separation,
            args.speakers,
            args.speaker_scale,
            args.seed,
        ),
        speakers_per_language: args.speakers,
        sessions_per_speaker: args.sessions,
        session_duration_s: args.session_duration,
        frame_shift_ms: args.frame_shift_ms,
        seed: args.seed,
    };
    let records = synthcorpus::generate(&spec)?;
    let manifest = save_corpus(&records, &args.out_dir)?;
    println!(
        "wrote {} sessions ({} languages x {} speakers x {} sessions) to {}",
        records.len(),
        args.languages,
        args.speakers,
        args.sessions,
        manifest.display()
    );
    Ok(())
}

fn run_train(args: TrainArgs) -> Result<()> {
    let mut cfg = PipelineConfig {
        scheme: Scheme::from_code(args.scheme)?,
        ..PipelineConfig::default()
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| lidsvd::Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        cfg.apply_file_text(&text)?;
    }
    if let Some(v) = args.mixtures {
        cfg.mixtures = v;
    }
    if let Some(v) = args.skip {
        cfg.skip_k = v;
    }
    if let Some(v) = args.energy {
        cfg.energy_tau = v;
    }
    if let Some(v) = args.em_iters {
        cfg.em_iters = v;
    }
    if let Some(v) = args.relevance {
        cfg.map_relevance = v;
    }
    if let Some(v) = &args.cmn_window {
        cfg.apply_key("cmn_window_s", v)?;
    }
    if let Some(v) = args.svm_c {
        cfg.svm_c = v;
    }
    if let Some(v) = args.utterance_duration {
        cfg.utterance_duration_s = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }

    let sessions = load_corpus(&args.corpus)?;
    let artifacts = pipeline::train_with_artifacts(&sessions, &cfg)?;
    let system = artifacts.system;
    system.save(&args.out)?;
    println!(
        "trained scheme {} on {} sessions: feature matrix {}x{}, retained rank {} of {} ({}% energy), {} classes",
        system.scheme,
        sessions.len(),
        artifacts.feature_matrix_shape.0,
        artifacts.feature_matrix_shape.1,
        system.embedding.rank(),
        system.embedding.spectrum.len(),
        (cfg.energy_tau * 100.0).round(),
        system.classes().len()
    );
    println!("model written to {}", args.out.display());
    Ok(())
}

fn load_input(path: &Path, cfg: &PipelineConfig) -> Result<FeatureMatrix> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("wav") | Some("WAV") => features_from_wav(path, cfg),
        _ => load_features(path),
    }
}

fn run_identify(args: IdentifyArgs) -> Result<()> {
    let system = TrainedSystem::load(&args.model)?;
    let mut utterance = load_input(&args.input, &PipelineConfig::default())?;
    if let Some(duration) = args.duration {
        utterance = utterance.slice_seconds(0.0, duration)?;
    }
    let (language, scores) = system.identify(&utterance)?;
    println!("predicted: {language}");
    for (class, score) in system.classes().iter().zip(scores.iter()) {
        println!("  {class}: {score:.6}");
    }
    Ok(())
}

fn run_segment(args: SegmentArgs) -> Result<()> {
    let system = TrainedSystem::load(&args.model)?;
    let stream = load_input(&args.input, &PipelineConfig::default())?;
    let cfg = SegmentationConfig {
        window_s: args.window,
        shift_s: args.shift,
    };
    let trace = system.segment(&stream, &cfg)?;
    let csv = trace.to_csv(system.classes());
    match &args.out {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| lidsvd::Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            println!(
                "trace with {} windows written to {}",
                trace.decisions.len(),
                path.display()
            );
        }
        None => print!("{csv}"),
    }
    if let Some(truth_path) = &args.truth {
        let text = std::fs::read_to_string(truth_path).map_err(|e| lidsvd::Error::Io {
            path: truth_path.display().to_string(),
            source: e,
        })?;
        let truth = GroundTruth::parse(&text)?;
        let accuracy = frame_accuracy(&trace, &truth)?;
        println!("frame accuracy at window {} s: {:.4}", args.window, accuracy);
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.truth).map_err(|e| lidsvd::Error::Io {
        path: args.truth.display().to_string(),
        source: e,
    })?;
    let truth = GroundTruth::parse(&text)?;
    let mut rows = Vec::new();
    for path in &args.traces {
        let csv = std::fs::read_to_string(path).map_err(|e| lidsvd::Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let trace = SegmentationTrace::parse_csv(&csv)?;
        let accuracy = frame_accuracy(&trace, &truth)?;
        rows.push((trace.window_s, accuracy));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = String::from("window_s,accuracy\n");
    for (window, accuracy) in rows {
        out.push_str(&format!("{window:?},{accuracy:?}\n"));
    }
    match &args.out {
        Some(path) => std::fs::write(path, &out).map_err(|e| lidsvd::Error::Io {
            path: path.display().to_string(),
            source: e,
        })?,
        None => print!("{out}"),
    }
    Ok(())
}

fn run_export_embedding(args: ExportEmbeddingArgs) -> Result<()> {
    let system = TrainedSystem::load(&args.model)?;
    let sessions = load_corpus(&args.corpus)?;
    let mut out = String::from("language,clip");
    for c in 0..system.embedding.rank() {
        out.push_str(&format!(",c{}", c + 1));
    }
    out.push('\n');
    let mut clips_written = 0;
    for (session, language) in &sessions {
        let clip_count =
            ((session.duration_s() / args.utterance_duration).floor() as usize).max(1);
        for i in 0..clip_count {
            let clip = session
                .slice_seconds(i as f64 * args.utterance_duration, args.utterance_duration)?;
            let coords = system.project_utterance(&clip)?;
            out.push_str(&format!("{language},{clips_written}"));
            for v in coords.iter() {
                out.push_str(&format!(",{v:?}"));
            }
            out.push('\n');
            clips_written += 1;
        }
    }
    std::fs::write(&args.out, &out).map_err(|e| lidsvd::Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    println!("wrote {} projected clips to {}", clips_written, args.out.display());
    Ok(())
}

fn run_energy_curve(args: EnergyCurveArgs) -> Result<()> {
    let system = TrainedSystem::load(&args.model)?;
    let mut out = String::from("index,cumulative_energy\n");
    for (index, energy) in system.embedding.energy_curve() {
        out.push_str(&format!("{index},{energy:?}\n"));
    }
    std::fs::write(&args.out, &out).map_err(|e| lidsvd::Error::Io {
        path: args.out.display().to_string(),
        source: e,
    })?;
    println!(
        "wrote energy curve ({} singular values, retained {}) to {}",
        system.embedding.spectrum.len(),
        system.embedding.rank(),
        args.out.display()
    );
    Ok(())
}
