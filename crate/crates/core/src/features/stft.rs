use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::{frame_chunk, FrameSpec};
use crate::error::{Error, Result};
use crate::scalar::Float;

/// Symmetric Hann window, `w[i] = 0.5 (1 - cos(2 pi i / (n - 1)))`.
pub fn hann_window<F: Float>(n: usize) -> Result<Vec<F>> {
    if n < 2 {
        return Err(Error::InvalidLength(n));
    }
    let denom = F::from_usize_lossy(n - 1);
    let half = F::cst(0.5);
    let mut w: Vec<F> = (0..n.div_ceil(2))
        .map(|i| half * (F::one() - (F::TAU() * F::from_usize_lossy(i) / denom).cos()))
        .collect();
    // mirror so that w[i] == w[n - 1 - i] holds exactly
    let mirrored: Vec<F> = w[..n / 2].iter().rev().copied().collect();
    w.extend(mirrored);
    Ok(w)
}

/// Centre frequency of each retained bin, `k * sr / fft_size`.
pub fn bin_frequencies<F: Float>(fft_size: usize, sample_rate_hz: u32) -> Vec<F> {
    let sr = F::from_u32(sample_rate_hz).unwrap();
    let n = F::from_usize_lossy(fft_size);
    (0..=fft_size / 2)
        .map(|k| F::from_usize_lossy(k) * sr / n)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpectrogram<F = f64> {
    /// `[n_frames][fft_size / 2 + 1]`
    pub power: Vec<Vec<F>>,
    pub bin_frequencies_hz: Vec<F>,
    pub frame_times_s: Vec<f64>,
}

impl<F: Float> PowerSpectrogram<F> {
    pub fn n_frames(&self) -> usize {
        self.power.len()
    }

    pub fn n_bins(&self) -> usize {
        self.bin_frequencies_hz.len()
    }
}

/// Reusable short-time transform: Hann window plus a planned FFT.
#[derive(Clone)]
pub struct Stft<F: Float> {
    spec: FrameSpec,
    sample_rate_hz: u32,
    window: Vec<F>,
    fft: Arc<dyn Fft<F>>,
    bins: Vec<F>,
}

impl<F: Float> Stft<F> {
    pub fn new(spec: FrameSpec, sample_rate_hz: u32) -> Result<Self> {
        if spec.win_length > spec.fft_size || spec.hop_length == 0 {
            return Err(Error::InvalidRange(format!("bad frame spec {spec:?}")));
        }
        let fft = FftPlanner::new().plan_fft_forward(spec.fft_size);
        Ok(Self {
            spec,
            sample_rate_hz,
            window: hann_window(spec.win_length)?,
            fft,
            bins: bin_frequencies(spec.fft_size, sample_rate_hz),
        })
    }

    pub fn spec(&self) -> &FrameSpec {
        &self.spec
    }

    pub fn window(&self) -> &[F] {
        &self.window
    }

    pub fn bin_frequencies(&self) -> &[F] {
        &self.bins
    }

    /// Power spectrum (half spectrum, `fft_size / 2 + 1` bins) of one frame.
    pub fn frame_power(&self, frame: &[F], scratch: &mut Vec<Complex<F>>) -> Vec<F> {
        scratch.clear();
        scratch.extend(
            frame
                .iter()
                .zip(&self.window)
                .map(|(&x, &w)| Complex::new(x * w, F::zero())),
        );
        scratch.resize(self.spec.fft_size, Complex::new(F::zero(), F::zero()));
        self.fft.process(scratch);
        scratch[..self.bins.len()].iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn power(&self, samples: &[F]) -> Result<PowerSpectrogram<F>> {
        self.power_of_frames(&frame_chunk(samples, &self.spec)?)
    }

    pub fn power_of_frames(&self, frames: &[Vec<F>]) -> Result<PowerSpectrogram<F>> {
        let mut scratch = Vec::with_capacity(self.spec.fft_size);
        let power = frames.iter().map(|f| self.frame_power(f, &mut scratch)).collect();
        let sr = self.sample_rate_hz as f64;
        Ok(PowerSpectrogram {
            power,
            bin_frequencies_hz: self.bins.clone(),
            frame_times_s: (0..frames.len())
                .map(|i| (i * self.spec.hop_length) as f64 / sr)
                .collect(),
        })
    }
}

/// Windowed, zero-padded magnitude-squared DFT of every frame of a chunk.
pub fn stft_power<F: Float>(
    samples: &[F],
    sample_rate_hz: u32,
    spec: &FrameSpec,
) -> Result<PowerSpectrogram<F>> {
    Stft::new(*spec, sample_rate_hz)?.power(samples)
}
