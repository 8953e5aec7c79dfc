//! Denoising: amplitude gating and Butterworth low-pass, plus the averaged
//! spectrum used to inspect hum and motor peaks.

mod butterworth;
mod gate;
mod spectrum;

pub use butterworth::{apply_filter, butter_design, Biquad, ButterworthSpec, SosFilter};
pub use gate::{amplitude_gate, AmplitudeGateSpec};
pub use spectrum::{averaged_power_spectrum, spectrum_peaks, SpectrumPeak, SpectrumReport};

use serde::{Deserialize, Serialize};

/// Which denoising stage to run before feature extraction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    #[default]
    None,
    Amplitude,
    Lowpass,
}

impl FilterMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterMode::None => "none",
            FilterMode::Amplitude => "amplitude",
            FilterMode::Lowpass => "lowpass",
        }
    }
}

impl std::str::FromStr for FilterMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "none" => Ok(FilterMode::None),
            "amplitude" => Ok(FilterMode::Amplitude),
            "lowpass" => Ok(FilterMode::Lowpass),
            other => Err(crate::Error::InvalidFilter(format!("unknown filter mode `{other}`"))),
        }
    }
}

/// A configured filter stage, applied to whole clips before chunking.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FilterStage {
    pub mode: FilterMode,
    pub gate: AmplitudeGateSpec,
    pub lowpass: ButterworthSpec,
}

impl FilterStage {
    pub fn new(mode: FilterMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn apply<F: crate::Float>(
        &self,
        clip: &crate::audio::AudioClip<F>,
    ) -> crate::Result<crate::audio::AudioClip<F>> {
        match self.mode {
            FilterMode::None => Ok(clip.clone()),
            FilterMode::Amplitude => amplitude_gate(clip, &self.gate),
            FilterMode::Lowpass => {
                let sos = butter_design::<F>(&self.lowpass, clip.sample_rate_hz)?;
                Ok(apply_filter(clip, &sos))
            }
        }
    }
}
