use std::cmp::Ordering;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::{chunk_clip, AudioClip};
use crate::error::Result;
use crate::features::hann_window;
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumPeak {
    pub frequency_hz: f64,
    pub power_db: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Strongest first.
    pub peaks: Vec<SpectrumPeak>,
    pub resolution_hz: f64,
}

/// Minimum rise (dB) of a peak over both neighbouring bins.
const PEAK_PROMINENCE_DB: f64 = 3.0;

/// Mean power spectrum (dB) of Hann-windowed one-second chunks.
/// Returns `(power_db per bin, resolution_hz)`.
pub fn averaged_power_spectrum<F: Float>(clip: &AudioClip<F>) -> Result<(Vec<f64>, f64)> {
    let chunks = chunk_clip(clip)?;
    let n = clip.sample_rate_hz as usize;
    let window: Vec<F> = hann_window(n)?;
    let fft = FftPlanner::<F>::new().plan_fft_forward(n);
    let mut acc = vec![0.0f64; n / 2 + 1];
    let mut buf = Vec::with_capacity(n);
    for chunk in &chunks {
        buf.clear();
        buf.extend(chunk.samples.iter().zip(&window).map(|(&x, &w)| Complex::new(x * w, F::zero())));
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr().as_f64();
        }
    }
    let k = chunks.len() as f64;
    let db = acc.into_iter().map(|p| 10.0 * (p / k + 1e-20).log10()).collect();
    Ok((db, clip.sample_rate_hz as f64 / n as f64))
}

/// Strongest local maxima of the averaged spectrum.
pub fn spectrum_peaks<F: Float>(clip: &AudioClip<F>, max_peaks: usize) -> Result<SpectrumReport> {
    let (db, resolution_hz) = averaged_power_spectrum(clip)?;
    let mut peaks: Vec<SpectrumPeak> = (1..db.len().saturating_sub(1))
        .filter(|&k| db[k] - db[k - 1] >= PEAK_PROMINENCE_DB && db[k] - db[k + 1] >= PEAK_PROMINENCE_DB)
        .map(|k| SpectrumPeak {
            frequency_hz: k as f64 * resolution_hz,
            power_db: db[k],
        })
        .collect();
    peaks.sort_by(|a, b| b.power_db.partial_cmp(&a.power_db).unwrap_or(Ordering::Equal));
    peaks.truncate(max_peaks);
    Ok(SpectrumReport {
        peaks,
        resolution_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    fn tones(parts: &[(f64, f64)], secs: usize) -> AudioClip {
        let n = 44100 * secs;
        let x = (0..n)
            .map(|i| {
                let t = i as f64 / 44100.0;
                parts.iter().map(|&(f, a)| a * (std::f64::consts::TAU * f * t).sin()).sum()
            })
            .collect();
        AudioClip::new(x, 44100).unwrap()
    }

    #[test]
    fn hum_and_motor_peaks() {
        let clip = tones(&[(60.0, 0.05), (150.0, 0.3), (200.0, 0.2)], 3);
        let r = spectrum_peaks(&clip, 3).unwrap();
        assert_eq!(r.resolution_hz, 1.0);
        let mut f: Vec<f64> = r.peaks.iter().map(|p| p.frequency_hz).collect();
        f.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in f.iter().zip([60.0, 150.0, 200.0]) {
            assert!((got - want).abs() <= r.resolution_hz);
        }
    }

    #[test]
    fn pure_tone_single_peak() {
        let clip = tones(&[(1000.0, 0.5)], 2);
        let r = spectrum_peaks(&clip, 10).unwrap();
        assert!((r.peaks[0].frequency_hz - 1000.0).abs() <= 1.0);
        // sidelobes of a bin-centred tone vanish; nothing else within 60 dB
        assert!(r.peaks[1..].iter().all(|p| p.power_db < r.peaks[0].power_db - 60.0));
    }

    #[test]
    fn white_noise_is_flat() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(0.0, 0.1).unwrap();
        let x: Vec<f64> = (0..44100 * 10).map(|_| normal.sample(&mut rng)).collect();
        let clip = AudioClip::new(x, 44100).unwrap();
        let (db, _) = averaged_power_spectrum(&clip).unwrap();
        let mut sorted = db[1..db.len() - 1].to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = sorted[sorted.len() / 2];
        let r = spectrum_peaks(&clip, 100).unwrap();
        assert!(r.peaks.iter().all(|p| p.power_db < median + 10.0));
    }

    #[test]
    fn too_short() {
        let clip = AudioClip::new(vec![0.1f64; 1000], 44100).unwrap();
        assert!(spectrum_peaks(&clip, 3).is_err());
    }
}
