use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Read, Seek, Write};
use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Float;

fn map_hound(err: hound::Error, path: &Path) -> Error {
    match err {
        hound::Error::IoError(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            Error::Parse(format!("unexpected end of file: {e}"))
        }
        hound::Error::IoError(e) => Error::io(path, e),
        hound::Error::FormatError(msg) => Error::Parse(msg.to_string()),
        hound::Error::UnfinishedSample => Error::Parse("data chunk ends mid-sample".into()),
        hound::Error::Unsupported => Error::UnsupportedFormat("codec not supported".into()),
        hound::Error::TooWide => Error::UnsupportedFormat("sample too wide".into()),
        hound::Error::InvalidSampleFormat => {
            Error::UnsupportedFormat("sample format does not match header".into())
        }
    }
}

/// Reads a RIFF/WAVE file (integer PCM or IEEE float), downmixing to mono.
pub fn read_wav<F: Float>(path: impl AsRef<Path>) -> Result<AudioClip<F>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let clip = decode_from(BufReader::new(file), path)?;
    Ok(clip.with_id(path.display().to_string()))
}

/// Decodes WAV bytes held in memory.
pub fn decode_wav<F: Float>(bytes: &[u8]) -> Result<AudioClip<F>> {
    decode_from(Cursor::new(bytes), Path::new("<memory>"))
}

fn decode_from<F: Float, R: Read>(reader: R, path: &Path) -> Result<AudioClip<F>> {
    let reader = WavReader::new(reader).map_err(|e| map_hound(e, path))?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Parse("zero channels".into()));
    }

    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            let scale = 1.0 / (1i64 << (spec.bits_per_sample - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| map_hound(e, path))?
        }
        SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| map_hound(e, path))?,
    };
    if interleaved.len() < channels {
        return Err(Error::EmptyAudio);
    }

    let inv = 1.0 / channels as f64;
    let samples: Vec<F> = interleaved
        .chunks_exact(channels)
        .map(|frame| F::cst(frame.iter().sum::<f64>() * inv))
        .collect();

    let mut clip = AudioClip::new(samples, spec.sample_rate)?;
    clip.source_bit_depth = spec.bits_per_sample;
    Ok(clip)
}

/// Quantizes one sample to 16-bit: clamp to `[-1, 1]`, scale by 32768,
/// round half away from zero, saturate at `i16` bounds.
pub fn quantize_sample<F: Float>(s: F) -> i16 {
    let x = super::clamp_unit(s).as_f64() * 32768.0;
    x.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

/// Writes 16-bit little-endian mono PCM.
pub fn write_wav<F: Float>(clip: &AudioClip<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    encode_into(clip, BufWriter::new(file), path)
}

/// Encodes a clip as 16-bit mono WAV bytes.
pub fn encode_wav<F: Float>(clip: &AudioClip<F>) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    encode_into(clip, &mut buf, Path::new("<memory>"))?;
    Ok(buf.into_inner())
}

fn encode_into<F: Float, W: Write + Seek>(clip: &AudioClip<F>, out: W, path: &Path) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate_hz,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::new(out, spec).map_err(|e| map_hound(e, path))?;
    {
        let mut w = writer.get_i16_writer(clip.samples.len() as u32);
        for &s in &clip.samples {
            w.write_sample(quantize_sample(s));
        }
        w.flush().map_err(|e| map_hound(e, path))?;
    }
    writer.finalize().map_err(|e| map_hound(e, path))
}
