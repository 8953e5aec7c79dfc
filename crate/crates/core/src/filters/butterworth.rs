use rustfft::num_complex::Complex64;

use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ButterworthSpec {
    pub order: usize,
    pub cutoff_hz: f64,
}

impl Default for ButterworthSpec {
    fn default() -> Self {
        Self {
            order: 4,
            cutoff_hz: 1000.0,
        }
    }
}

/// One second-order section, `a0` normalized to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Biquad<F = f64> {
    pub b: [F; 3],
    pub a: [F; 2],
}

/// Cascade of biquads run in transposed direct form II.
#[derive(Clone, Debug, PartialEq)]
pub struct SosFilter<F = f64> {
    pub sections: Vec<Biquad<F>>,
}

impl<F: Float> SosFilter<F> {
    /// Complex response at `freq_hz`.
    pub fn response(&self, freq_hz: f64, sample_rate_hz: u32) -> Complex64 {
        let w = std::f64::consts::TAU * freq_hz / sample_rate_hz as f64;
        let z1 = Complex64::from_polar(1.0, -w);
        let z2 = z1 * z1;
        self.sections.iter().fold(Complex64::new(1.0, 0.0), |acc, s| {
            let [b0, b1, b2] = s.b.map(F::as_f64);
            let [a1, a2] = s.a.map(F::as_f64);
            acc * (b0 + z1 * b1 + z2 * b2) / (1.0 + z1 * a1 + z2 * a2)
        })
    }

    pub fn magnitude_db(&self, freq_hz: f64, sample_rate_hz: u32) -> f64 {
        20.0 * self.response(freq_hz, sample_rate_hz).norm().log10()
    }

    /// Filters a signal with zero initial state. No clamping.
    pub fn filter(&self, input: &[F]) -> Vec<F> {
        let mut y = input.to_vec();
        for s in &self.sections {
            let (mut z1, mut z2) = (F::zero(), F::zero());
            for v in y.iter_mut() {
                let x = *v;
                let out = s.b[0] * x + z1;
                z1 = s.b[1] * x - s.a[0] * out + z2;
                z2 = s.b[2] * x - s.a[1] * out;
                *v = out;
            }
        }
        y
    }
}

/// Digital Butterworth low-pass via the prewarped bilinear transform.
pub fn butter_design<F: Float>(spec: &ButterworthSpec, sample_rate_hz: u32) -> Result<SosFilter<F>> {
    let fs = sample_rate_hz as f64;
    if !(spec.cutoff_hz > 0.0 && spec.cutoff_hz < fs / 2.0) {
        return Err(Error::InvalidCutoff {
            cutoff_hz: spec.cutoff_hz,
            sample_rate_hz,
        });
    }
    if !matches!(spec.order, 2 | 4 | 6 | 8) {
        return Err(Error::InvalidFilter(format!(
            "order must be one of 2, 4, 6, 8 (got {})",
            spec.order
        )));
    }
    let n = spec.order;
    let warped = 2.0 * fs * (std::f64::consts::PI * spec.cutoff_hz / fs).tan();

    // Upper-half-plane poles of each conjugate pair: k = 1..n/2 gives angles in (pi/2, pi).
    let sections = (1..=n / 2)
        .map(|k| {
            let theta = std::f64::consts::PI * (2 * k + n - 1) as f64 / (2 * n) as f64;
            let s = Complex64::from_polar(warped, theta);
            let z = (2.0 * fs + s) / (2.0 * fs - s);
            let a1 = -2.0 * z.re;
            let a2 = z.norm_sqr();
            // double zero at z = -1; gain sets H(1) = 1
            let g = (1.0 + a1 + a2) / 4.0;
            Biquad {
                b: [g, 2.0 * g, g].map(F::cst),
                a: [a1, a2].map(F::cst),
            }
        })
        .collect();
    Ok(SosFilter { sections })
}

/// Runs the cascade over a clip; output is clamped back into `[-1, 1]`.
pub fn apply_filter<F: Float>(clip: &AudioClip<F>, sos: &SosFilter<F>) -> AudioClip<F> {
    clip.map_samples(sos.filter(&clip.samples))
}
