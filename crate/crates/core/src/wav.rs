//! WAV file I/O: RIFF/WAVE containers holding 16-bit integer PCM or
//! 32-bit float samples, mono or multichannel with caller-selected
//! channel.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Sample encodings this crate reads and writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    /// 16-bit signed integer PCM; amplitudes clamp to [-1, 1] on write and
    /// normalize by 1/32768 on read.
    Pcm16,
    /// IEEE 754 32-bit float; round-trips bit-exactly.
    Float32,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn hound_err(path: &Path, err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => io_err(path, e),
        other => Error::WavFormat {
            path: path.to_path_buf(),
            detail: other.to_string(),
        },
    }
}

/// Reads one channel of a WAV file into a [`SampledSignal`].
///
/// Integer samples are normalized by 1/32768, so the most negative code
/// maps to exactly -1.0 and full-scale positive to 32767/32768.
pub fn read_wav(path: &Path, channel: usize) -> Result<SampledSignal> {
    let mut reader = WavReader::open(path).map_err(|e| hound_err(path, e))?;
    let spec = reader.spec();
    if channel >= spec.channels as usize {
        return Err(Error::parameter(
            "channel",
            format!(
                "requested channel {channel} but {} has {} channel(s)",
                path.display(),
                spec.channels
            ),
        ));
    }

    let stride = spec.channels as usize;
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => {
            let mut out = Vec::new();
            for (i, s) in reader.samples::<i16>().enumerate() {
                let s = s.map_err(|e| hound_err(path, e))?;
                if i % stride == channel {
                    out.push(s as f64 / 32768.0);
                }
            }
            out
        }
        (SampleFormat::Float, 32) => {
            let mut out = Vec::new();
            for (i, s) in reader.samples::<f32>().enumerate() {
                let s = s.map_err(|e| hound_err(path, e))?;
                if i % stride == channel {
                    out.push(s as f64);
                }
            }
            out
        }
        (format, bits) => {
            let name = match format {
                SampleFormat::Int => format!("{bits}-bit integer"),
                SampleFormat::Float => format!("{bits}-bit float"),
            };
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                encoding: name,
            });
        }
    };

    SampledSignal::new(samples, spec.sample_rate as f64)
}

/// Writes a mono signal to a WAV file in the requested encoding.
pub fn write_wav(signal: &SampledSignal, path: &Path, encoding: WavEncoding) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: signal.fs.round() as u32,
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| hound_err(path, e))?;
    match encoding {
        WavEncoding::Pcm16 => {
            for &s in &signal.samples {
                let q = (s.clamp(-1.0, 1.0) * 32768.0).round();
                let q = q.clamp(i16::MIN as f64, i16::MAX as f64) as i16;
                writer.write_sample(q).map_err(|e| hound_err(path, e))?;
            }
        }
        WavEncoding::Float32 => {
            for &s in &signal.samples {
                writer
                    .write_sample(s as f32)
                    .map_err(|e| hound_err(path, e))?;
            }
        }
    }
    writer.finalize().map_err(|e| hound_err(path, e))
}
