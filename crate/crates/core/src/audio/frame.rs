use super::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum WindowKind {
    #[default]
    Hann,
}

/// Analysis framing parameters. Hop is always half the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameSpec {
    pub win_length: usize,
    pub hop_length: usize,
    pub fft_size: usize,
    pub window_kind: WindowKind,
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            win_length: 1024,
            hop_length: 512,
            fft_size: 2048,
            window_kind: WindowKind::Hann,
        }
    }
}

impl FrameSpec {
    pub fn new(win_length: usize, fft_size: usize) -> Result<Self> {
        if win_length < 2 || win_length % 2 != 0 {
            return Err(Error::InvalidLength(win_length));
        }
        if win_length > fft_size {
            return Err(Error::InvalidRange(format!(
                "window {win_length} exceeds fft size {fft_size}"
            )));
        }
        Ok(Self {
            win_length,
            hop_length: win_length / 2,
            fft_size,
            window_kind: WindowKind::Hann,
        })
    }

    /// Checks the structural invariants plus the 20–40 ms window duration.
    pub fn validate(&self, sample_rate_hz: u32) -> Result<()> {
        if self.hop_length * 2 != self.win_length || self.win_length > self.fft_size {
            return Err(Error::InvalidRange(format!("inconsistent frame spec {self:?}")));
        }
        let ms = 1000.0 * self.win_length as f64 / sample_rate_hz as f64;
        if !(20.0..=40.0).contains(&ms) {
            return Err(Error::InvalidRange(format!(
                "window of {ms:.1} ms outside 20-40 ms"
            )));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }
}

/// Exactly one second of audio cut from a parent clip.
#[derive(Clone, Debug, PartialEq)]
pub struct Chunk<F = f64> {
    pub samples: Vec<F>,
    pub sample_rate_hz: u32,
    pub origin_offset_s: f64,
    pub parent_id: String,
}

/// Splits a clip into contiguous one-second chunks, discarding the tail.
pub fn chunk_clip<F: Float>(clip: &AudioClip<F>) -> Result<Vec<Chunk<F>>> {
    let rate = clip.sample_rate_hz as usize;
    if clip.samples.len() < rate {
        return Err(Error::TooShort {
            needed: rate,
            got: clip.samples.len(),
        });
    }
    Ok(clip
        .samples
        .chunks_exact(rate)
        .enumerate()
        .map(|(i, s)| Chunk {
            samples: s.to_vec(),
            sample_rate_hz: clip.sample_rate_hz,
            origin_offset_s: i as f64,
            parent_id: clip.id.clone(),
        })
        .collect())
}

/// `ceil((len - win) / hop) + 1`
pub fn frame_count(len: usize, spec: &FrameSpec) -> usize {
    (len - spec.win_length).div_ceil(spec.hop_length) + 1
}

/// Cuts samples into `win_length` frames starting every `hop_length`;
/// the final frame is zero-padded if it overruns.
pub fn frame_chunk<F: Float>(samples: &[F], spec: &FrameSpec) -> Result<Vec<Vec<F>>> {
    if samples.len() < spec.win_length {
        return Err(Error::TooShort {
            needed: spec.win_length,
            got: samples.len(),
        });
    }
    let n = frame_count(samples.len(), spec);
    Ok((0..n)
        .map(|i| {
            let start = i * spec.hop_length;
            let end = (start + spec.win_length).min(samples.len());
            let mut frame = samples[start..end].to_vec();
            frame.resize(spec.win_length, F::zero());
            frame
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::hann_window;

    fn clip(n: usize, rate: u32) -> AudioClip {
        let samples = (0..n).map(|i| ((i % 200) as f64 / 100.0) - 1.0).collect();
        AudioClip::new(samples, rate).unwrap()
    }

    #[test]
    fn tail_is_discarded() {
        let c = clip(44100 * 37 / 10, 44100);
        let chunks = chunk_clip(&c).unwrap();
        assert_eq!(chunks.len(), 3);
        assert!(chunks.iter().all(|ch| ch.samples.len() == 44100));
        assert_eq!(chunks[2].origin_offset_s, 2.0);
    }

    #[test]
    fn one_second_is_identity() {
        let c = clip(44100, 44100);
        let chunks = chunk_clip(&c).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].samples, c.samples);
    }

    #[test]
    fn concatenation_reproduces_prefix() {
        let c = clip(8000 * 10 + 1234, 8000);
        let joined: Vec<f64> = chunk_clip(&c).unwrap().into_iter().flat_map(|ch| ch.samples).collect();
        assert_eq!(joined.len(), 80000);
        assert_eq!(&joined[..], &c.samples[..80000]);
    }

    #[test]
    fn short_clip_rejected() {
        let c = clip(100, 44100);
        assert!(matches!(chunk_clip(&c), Err(Error::TooShort { .. })));
    }

    #[test]
    fn default_frame_count() {
        // brute force: count starts that lie before the last full-window start, plus the padded one
        let spec = FrameSpec::default();
        let len = 44100;
        let mut brute = 0;
        let mut start = 0;
        loop {
            brute += 1;
            if start + spec.win_length >= len {
                break;
            }
            start += spec.hop_length;
        }
        assert_eq!(brute, 86);
        assert_eq!(frame_count(len, &spec), 86);
        let frames = frame_chunk(&vec![1.0f64; len], &spec).unwrap();
        assert_eq!(frames.len(), 86);
        let last = frames.last().unwrap();
        assert_eq!(last.iter().filter(|&&v| v == 0.0).count(), 85 * 512 + 1024 - len);
        assert!(frames[..85].iter().all(|f| f.iter().all(|&v| v == 1.0)));
    }

    #[test]
    fn impulse_stays_in_first_frame() {
        let spec = FrameSpec::default();
        let mut x = vec![0.0f64; 44100];
        x[0] = 1.0;
        let frames = frame_chunk(&x, &spec).unwrap();
        assert_eq!(frames[0][0], 1.0);
        assert!(frames[1..].iter().all(|f| f.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn frame_too_short() {
        let spec = FrameSpec::default();
        assert!(matches!(frame_chunk(&[0.0f64; 10], &spec), Err(Error::TooShort { .. })));
    }

    #[test]
    fn spec_validation() {
        let spec = FrameSpec::default();
        spec.validate(44100).unwrap();
        assert!(spec.validate(8000).is_err());
        assert!(FrameSpec::new(4096, 2048).is_err());
        assert_eq!(FrameSpec::new(1024, 2048).unwrap(), spec);
    }

    #[test]
    fn hann_overlap_add_is_constant() {
        // Periodic Hann at 50% overlap satisfies constant-overlap-add; the symmetric
        // analysis window (denominator n-1) only approximates it.
        let n = 1024;
        let hop = n / 2;
        let w: Vec<f64> = (0..n)
            .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
            .collect();
        let total = 8 * hop + n;
        let mut acc = vec![0.0; total];
        for f in 0..=8 {
            for i in 0..n {
                acc[f * hop + i] += w[i];
            }
        }
        for &v in &acc[n..total - n] {
            assert!((v - 1.0).abs() < 1e-9);
        }
        let sym = hann_window::<f64>(n).unwrap();
        assert_eq!(sym[0], 0.0);
        assert_eq!(sym[n - 1], 0.0);
    }
}
