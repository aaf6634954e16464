use lidsvd::pipeline::{self, PipelineConfig, Scheme};
use lidsvd::synthcorpus::{self, CorpusSpec, SyntheticLanguage};
use lidsvd::features::FeatureMatrix;
use ndarray::Array2;

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
    let comps: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(8);
    let tau: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.60);
    let skip: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(2);

    let dim = 39;
    let n_langs = 4;
    let train_speakers = 6;
    let test_speakers = 2; // extra speakers, unseen in training
    let langs = make_langs(n_langs, comps, dim, 6.0, train_speakers + test_speakers, 0.5, stay, 11);
    let spec = CorpusSpec {
        languages: langs, speakers_per_language: train_speakers + test_speakers,
        sessions_per_speaker: 2, session_duration_s: 90.0, frame_shift_ms: 10.0, seed: 11,
    };
    let records = synthcorpus::generate(&spec).unwrap();
    let train_sessions: Vec<(FeatureMatrix, String)> = records.iter()
        .filter(|r| r.speaker < train_speakers)
        .map(|r| (r.features.clone(), r.language.clone())).collect();
    let test_records: Vec<_> = records.iter().filter(|r| r.speaker >= train_speakers).collect();

    for scheme in [Scheme::Ngram, Scheme::Supervector] {
        let cfg = PipelineConfig { scheme, mixtures: comps, em_iters: 8, skip_k: skip,
            energy_tau: tau, utterance_duration_s: 30.0, seed: 7, cmn_window_s: None, ..PipelineConfig::default() };
        let art = pipeline::train_with_artifacts(&train_sessions, &cfg).unwrap();
        let sys = &art.system;
        // training accuracy over 30s clips
        let mut correct = 0usize; let mut total = 0usize;
        for (fm, lang) in &train_sessions {
            for i in 0..3 {
                let clip = fm.slice_seconds(i as f64 * 30.0, 30.0).unwrap();
                let (pred, _) = sys.identify(&clip).unwrap();
                if &pred == lang { correct += 1; }
                total += 1;
            }
        }
        let train_acc = correct as f64 / total as f64;
        // held-out speakers
        let mut correct = 0usize; let mut total = 0usize;
        for r in &test_records {
            for i in 0..3 {
                let clip = r.features.slice_seconds(i as f64 * 30.0, 30.0).unwrap();
                let (pred, _) = sys.identify(&clip).unwrap();
                if pred == r.language { correct += 1; }
                total += 1;
            }
        }
        let test_acc = correct as f64 / total as f64;
        let head: Vec<f64> = sys.embedding.energy_curve().iter().take(4).map(|(_, e)| (e * 1000.0).round() / 1000.0).collect();
        println!("scheme {} stay {stay} comps {comps} tau {tau} K {skip}: L={} of {} curve={head:?} train_acc={train_acc:.3} heldout_acc={test_acc:.3}",
            sys.scheme, sys.embedding.rank(), sys.embedding.spectrum.len());
        let _ = Array2::<f64>::zeros((1,1));
    }
}

// segmentation sweep appended as a second binary would be cleaner; quick hack via env var
