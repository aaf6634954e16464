use lidsvd::pipeline::{self, PipelineConfig, Scheme};
use lidsvd::synthcorpus::{self, CorpusSpec, SyntheticLanguage};
use lidsvd::features::FeatureMatrix;
use lidsvd::segmentation::{self, GroundTruth, Segment, SegmentationConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn make_langs(n: usize, comps: usize, dim: usize, sep: f64, speakers: usize, spk_scale: f64, stay: f64, seed: u64) -> Vec<SyntheticLanguage> {
    let mut langs = synthcorpus::separated_languages(n, comps, dim, sep, speakers, spk_scale, seed);
    for (l, lang) in langs.iter_mut().enumerate() {
        lang.transition = synthcorpus::cyclic_transition(comps, 1 + l % comps.max(2), stay);
    }
    langs
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let stay: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(0.8);
    let scheme = if args.get(2).map(|s| s.as_str()) == Some("2") { Scheme::Supervector } else { Scheme::Ngram };
    let comps = 8usize;
    let dim = 39;
    let n_langs = 4;
    let train_speakers = 6;
    let langs = make_langs(n_langs, comps, dim, 6.0, train_speakers + 2, 0.5, stay, 11);
    let spec = CorpusSpec {
        languages: langs, speakers_per_language: train_speakers + 2,
        sessions_per_speaker: 2, session_duration_s: 90.0, frame_shift_ms: 10.0, seed: 11,
    };
    let records = synthcorpus::generate(&spec).unwrap();
    let train_sessions: Vec<(FeatureMatrix, String)> = records.iter()
        .filter(|r| r.speaker < train_speakers)
        .map(|r| (r.features.clone(), r.language.clone())).collect();
    let cfg = PipelineConfig { scheme, mixtures: comps, em_iters: 8, skip_k: 2,
        energy_tau: 0.65, utterance_duration_s: 30.0, seed: 7, cmn_window_s: None,
        ..PipelineConfig::default() };
    let system = pipeline::train(&train_sessions, &cfg).unwrap();

    // Stream plan from held-out speakers: 3 segments per language, 6-30 s.
    let heldout: Vec<(FeatureMatrix, String)> = records.iter()
        .filter(|r| r.speaker >= train_speakers)
        .map(|r| (r.features.clone(), r.language.clone())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut order: Vec<usize> = (0..n_langs).flat_map(|l| [l, l, l]).collect();
    order.shuffle(&mut rng);
    let mut segments = Vec::new();
    let mut t = 0.0;
    for &l in &order {
        let dur = rng.random_range(6.0..30.0_f64).round();
        segments.push(Segment { language: format!("lang{l:02}"), start_s: t, end_s: t + dur });
        t += dur;
    }
    let plan = GroundTruth::new(segments).unwrap();
    let (stream, truth) = segmentation::concat_streams(&heldout, &plan).unwrap();
    println!("stream {} s, {} segments", stream.duration_s(), truth.segments.len());
    for window in [2.0, 3.0, 4.0, 5.0] {
        let trace = system.segment(&stream, &SegmentationConfig { window_s: window, shift_s: 1.0 }).unwrap();
        let acc = segmentation::frame_accuracy(&trace, &truth).unwrap();
        println!("scheme {} stay {stay} SWD {window}: accuracy {acc:.4}", system.scheme);
    }
}
