//! Audio ingestion: WAV codec, one-second chunking and analysis framing.

mod frame;
mod wav;

pub use frame::{chunk_clip, frame_chunk, frame_count, Chunk, FrameSpec, WindowKind};
pub use wav::{decode_wav, encode_wav, quantize_sample, read_wav, write_wav};

use crate::error::{Error, Result};
use crate::scalar::Float;

/// Mono PCM audio normalized to `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip<F = f64> {
    pub samples: Vec<F>,
    pub sample_rate_hz: u32,
    pub source_bit_depth: u16,
    /// Opaque identifier carried onto chunks (usually the file path).
    pub id: String,
}

impl<F: Float> AudioClip<F> {
    /// Builds a clip, clamping samples into `[-1, 1]`.
    pub fn new(samples: Vec<F>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidRange("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        let samples = samples.into_iter().map(clamp_unit).collect();
        Ok(Self {
            samples,
            sample_rate_hz,
            source_bit_depth: 16,
            id: String::new(),
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Same metadata, new samples (clamped).
    pub fn map_samples(&self, samples: Vec<F>) -> Self {
        Self {
            samples: samples.into_iter().map(clamp_unit).collect(),
            sample_rate_hz: self.sample_rate_hz,
            source_bit_depth: self.source_bit_depth,
            id: self.id.clone(),
        }
    }

    pub fn rms(&self) -> F {
        let n = F::from_usize_lossy(self.samples.len());
        (self.samples.iter().map(|&s| s * s).sum::<F>() / n).sqrt()
    }
}

#[inline]
pub(crate) fn clamp_unit<F: Float>(s: F) -> F {
    if s.is_nan() {
        F::zero()
    } else {
        s.max(-F::one()).min(F::one())
    }
}
