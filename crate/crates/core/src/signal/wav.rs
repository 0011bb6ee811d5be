use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{Error, Result};

/// Reads a mono WAV (16-bit PCM or 32-bit float) at exactly `sample_rate`
/// and returns samples scaled to `[−1, 1]`.
pub fn read_wav(path: impl AsRef<Path>, sample_rate: u32) -> Result<Vec<f64>> {
    let reader = WavReader::open(path.as_ref())?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::Audio(format!(
            "expected mono audio, got {} channels",
            spec.channels
        )));
    }
    if spec.sample_rate != sample_rate {
        return Err(Error::Audio(format!(
            "expected {sample_rate} Hz audio, got {} Hz (no resampling)",
            spec.sample_rate
        )));
    }
    match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| Ok(f64::from(s?) / 32768.0))
            .collect(),
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| Ok(f64::from(s?)))
            .collect(),
        (fmt, bits) => Err(Error::Audio(format!(
            "unsupported sample format {fmt:?} at {bits} bits"
        ))),
    }
}

/// Writes mono 32-bit float WAV.
pub fn write_wav(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(path.as_ref(), spec)?;
    for s in samples {
        w.write_sample(*s as f32)?;
    }
    w.finalize()?;
    Ok(())
}
