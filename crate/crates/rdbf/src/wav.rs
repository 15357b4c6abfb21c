//! Waveform files: 16-bit integer or 32-bit float PCM, any channel count.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pcm {
    Int16,
    Float32,
}

/// Writes `channels` (equal lengths) interleaved. 16-bit output clips to
/// `[-1, 1]`.
pub fn write_wav(path: &Path, channels: &[Vec<f64>], sample_rate: u32, pcm: Pcm) -> Result<()> {
    let n = channels.first().map_or(0, Vec::len);
    if channels.is_empty() || channels.iter().any(|c| c.len() != n) {
        return Err(Error::Config("wav channels must be non-empty and of equal length".into()));
    }
    let spec = WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: match pcm {
            Pcm::Int16 => 16,
            Pcm::Float32 => 32,
        },
        sample_format: match pcm {
            Pcm::Int16 => SampleFormat::Int,
            Pcm::Float32 => SampleFormat::Float,
        },
    };
    let mut w = WavWriter::create(path, spec)?;
    for i in 0..n {
        for c in channels {
            match pcm {
                Pcm::Int16 => w.write_sample((c[i].clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16)?,
                Pcm::Float32 => w.write_sample(c[i] as f32)?,
            }
        }
    }
    w.finalize()?;
    Ok(())
}

/// Reads a file into one vector per channel, scaled to `[-1, 1]` for
/// integer formats. Returns the sample rate alongside.
pub fn read_wav(path: &Path) -> Result<(Vec<Vec<f64>>, u32)> {
    let mut r = WavReader::open(path)?;
    let spec = r.spec();
    let nch = spec.channels as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => r.samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>()?,
        SampleFormat::Int => {
            let scale = (1_i64 << (spec.bits_per_sample - 1)) as f64 - 1.0;
            r.samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()?
        }
    };
    let mut out = vec![Vec::with_capacity(interleaved.len() / nch.max(1)); nch];
    for (i, v) in interleaved.into_iter().enumerate() {
        out[i % nch].push(v);
    }
    Ok((out, spec.sample_rate))
}
