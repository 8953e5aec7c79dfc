use crate::audio::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeGateSpec {
    pub threshold_dbfs: f64,
    pub attenuation_db: f64,
    pub window_ms: f64,
}

impl Default for AmplitudeGateSpec {
    fn default() -> Self {
        Self {
            threshold_dbfs: -30.0,
            attenuation_db: -60.0,
            window_ms: 10.0,
        }
    }
}

impl AmplitudeGateSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_dbfs < 0.0 && self.attenuation_db < 0.0 && self.window_ms > 0.0) {
            return Err(Error::InvalidFilter(format!("bad gate spec {self:?}")));
        }
        Ok(())
    }

    pub fn window_samples(&self, sample_rate_hz: u32) -> usize {
        ((self.window_ms * sample_rate_hz as f64 / 1000.0).round() as usize).max(1)
    }
}

fn dbfs<F: Float>(window: &[F]) -> f64 {
    let n = window.len() as f64;
    let rms = (window.iter().map(|&s| (s * s).as_f64()).sum::<f64>() / n).sqrt();
    20.0 * (rms + 1e-12).log10()
}

/// Hard gain step on fixed windows whose RMS level is under the threshold.
///
/// Windows already at or below `threshold + attenuation` count as gated and
/// pass unchanged, so the gate is idempotent on its own output.
pub fn amplitude_gate<F: Float>(clip: &AudioClip<F>, spec: &AmplitudeGateSpec) -> Result<AudioClip<F>> {
    spec.validate()?;
    let gain = F::cst(10f64.powf(spec.attenuation_db / 20.0));
    let floor = spec.threshold_dbfs + spec.attenuation_db;
    let mut out = clip.samples.clone();
    for window in out.chunks_mut(spec.window_samples(clip.sample_rate_hz)) {
        let level = dbfs(window);
        if level < spec.threshold_dbfs && level > floor {
            for s in window.iter_mut() {
                *s *= gain;
            }
        }
    }
    Ok(clip.map_samples(out))
}
