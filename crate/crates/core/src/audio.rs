//! WAV input/output and energy-threshold voice activity detection.
//!
//! Audio enters the pipeline as mono sample streams in `[-1, 1]`. Multi-channel
//! files are averaged down to mono on read. Silence removal works on hop-sized
//! blocks: each block is kept if the analysis frame starting there has a mean
//! energy within `threshold_db` of the loudest frame in the clip.

use std::path::Path;

use crate::error::{Error, Result};

/// A mono audio clip with samples normalised to `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    /// Opaque language/speaker/session tag.
    pub source_id: String,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::ClipTooShort {
                samples: 0,
                required: 1,
            });
        }
        if sample_rate == 0 {
            return Err(Error::InvalidConfig {
                detail: "sample rate must be positive".into(),
            });
        }
        if !samples.iter().all(|s| s.is_finite()) {
            return Err(Error::NonFinite {
                context: "audio samples".into(),
            });
        }
        Ok(AudioClip {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Energy-threshold VAD settings.
///
/// The threshold is relative to the clip's own peak frame energy, so the
/// detector is insensitive to overall recording level.
#[derive(Debug, Clone, Copy)]
pub struct VadConfig {
    pub frame_ms: f64,
    pub shift_ms: f64,
    /// dB below the peak frame energy; frames quieter than this are dropped.
    pub threshold_db: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        VadConfig {
            frame_ms: 25.0,
            shift_ms: 10.0,
            threshold_db: -40.0,
        }
    }
}

impl VadConfig {
    fn validate(&self) -> Result<()> {
        if !(self.shift_ms > 0.0 && self.shift_ms <= self.frame_ms) {
            return Err(Error::InvalidConfig {
                detail: format!(
                    "VAD requires 0 < shift_ms <= frame_ms, got shift {} frame {}",
                    self.shift_ms, self.frame_ms
                ),
            });
        }
        if self.threshold_db >= 0.0 {
            return Err(Error::InvalidConfig {
                detail: format!("VAD threshold must be negative dB, got {}", self.threshold_db),
            });
        }
        Ok(())
    }
}

/// Sample encodings supported when writing WAV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm8,
    Pcm16,
    Float32,
}

/// Read a PCM WAV file (8/16/24/32-bit integer or 32-bit float), averaging
/// channels to mono and scaling samples to `[-1, 1]`.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    if !path.exists() {
        return Err(Error::AudioFileNotFound { path: path_str });
    }
    let mut reader = hound::WavReader::open(path).map_err(|e| map_hound_error(e, &path_str))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::MalformedWav {
            path: path_str,
            detail: "zero channels".into(),
        });
    }

    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::UnsupportedWav {
                    path: path_str,
                    detail: format!("{}-bit float", spec.bits_per_sample),
                });
            }
            let mut out = Vec::with_capacity(reader.len() as usize);
            for s in reader.samples::<f32>() {
                out.push(s.map_err(|e| map_hound_error(e, &path_str))? as f64);
            }
            out
        }
        hound::SampleFormat::Int => {
            let bits = spec.bits_per_sample;
            if !(bits == 8 || bits == 16 || bits == 24 || bits == 32) {
                return Err(Error::UnsupportedWav {
                    path: path_str,
                    detail: format!("{bits}-bit integer"),
                });
            }
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            let mut out = Vec::with_capacity(reader.len() as usize);
            for s in reader.samples::<i32>() {
                out.push(f64::from(s.map_err(|e| map_hound_error(e, &path_str))?) * scale);
            }
            out
        }
    };

    if interleaved.is_empty() {
        return Err(Error::MalformedWav {
            path: path_str,
            detail: "no samples in data chunk".into(),
        });
    }

    let mono = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks(channels)
            .map(|frame| frame.iter().sum::<f64>() / frame.len() as f64)
            .collect()
    };

    AudioClip::new(mono, spec.sample_rate, path_str)
}

/// Write a mono clip as little-endian RIFF WAV.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: match encoding {
            WavEncoding::Pcm8 => 8,
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Float32 => hound::SampleFormat::Float,
            _ => hound::SampleFormat::Int,
        },
    };
    let mut writer =
        hound::WavWriter::create(path, spec).map_err(|e| map_hound_error(e, &path_str))?;
    let write_err = |e: hound::Error| map_hound_error(e, &path_str);
    match encoding {
        WavEncoding::Pcm8 => {
            for &s in &clip.samples {
                let q = (s * 128.0).round().clamp(-128.0, 127.0) as i8;
                writer.write_sample(q).map_err(write_err)?;
            }
        }
        WavEncoding::Pcm16 => {
            for &s in &clip.samples {
                let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                writer.write_sample(q).map_err(write_err)?;
            }
        }
        WavEncoding::Float32 => {
            for &s in &clip.samples {
                writer.write_sample(s as f32).map_err(write_err)?;
            }
        }
    }
    writer.finalize().map_err(write_err)
}

fn map_hound_error(e: hound::Error, path: &str) -> Error {
    match e {
        hound::Error::IoError(io) => {
            // hound reports short reads as a custom io error.
            let truncated = io.kind() == std::io::ErrorKind::UnexpectedEof
                || io.to_string().contains("enough bytes");
            if io.kind() == std::io::ErrorKind::NotFound {
                Error::AudioFileNotFound { path: path.into() }
            } else if truncated {
                Error::MalformedWav {
                    path: path.into(),
                    detail: "truncated file".into(),
                }
            } else {
                Error::Io {
                    path: path.into(),
                    source: io,
                }
            }
        }
        hound::Error::FormatError(msg) => Error::MalformedWav {
            path: path.into(),
            detail: msg.into(),
        },
        hound::Error::Unsupported => Error::UnsupportedWav {
            path: path.into(),
            detail: "compressed or non-PCM encoding".into(),
        },
        other => Error::MalformedWav {
            path: path.into(),
            detail: other.to_string(),
        },
    }
}

/// Drop low-energy regions from a clip.
///
/// The clip is scanned in `shift_ms` hop blocks; the decision for a block uses
/// the mean-square energy of the `frame_ms` analysis frame starting at the
/// block (clipped at the end of the clip). Blocks whose frame energy is within
/// `threshold_db` of the peak frame energy are concatenated in order.
pub fn remove_silence(clip: &AudioClip, cfg: &VadConfig) -> Result<AudioClip> {
    cfg.validate()?;
    let rate = clip.sample_rate as f64;
    let frame_len = ((cfg.frame_ms / 1000.0) * rate).round() as usize;
    let shift_len = ((cfg.shift_ms / 1000.0) * rate).round().max(1.0) as usize;
    let n = clip.samples.len();
    if frame_len == 0 || n == 0 {
        return Err(Error::ClipTooShort {
            samples: n,
            required: frame_len.max(1),
        });
    }

    let num_blocks = n.div_ceil(shift_len);
    let mut energies = Vec::with_capacity(num_blocks);
    for b in 0..num_blocks {
        let start = b * shift_len;
        let end = (start + frame_len).min(n);
        let frame = &clip.samples[start..end];
        let e = frame.iter().map(|s| s * s).sum::<f64>() / frame.len() as f64;
        energies.push(e);
    }
    let peak = energies.iter().cloned().fold(0.0_f64, f64::max);
    if peak <= 0.0 {
        return Err(Error::EmptyAfterVad);
    }
    let floor = peak * 10f64.powf(cfg.threshold_db / 10.0);

    let mut kept = Vec::new();
    for (b, &e) in energies.iter().enumerate() {
        if e > floor {
            let start = b * shift_len;
            let end = ((b + 1) * shift_len).min(n);
            kept.extend_from_slice(&clip.samples[start..end]);
        }
    }
    if kept.is_empty() {
        return Err(Error::EmptyAfterVad);
    }
    AudioClip::new(kept, clip.sample_rate, clip.source_id.clone())
}
