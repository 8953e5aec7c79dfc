//! Acoustic side-channel verification of robot movements: WAV ingestion,
//! spectral features, denoising filters, four classifier families, a
//! synthetic emission oracle and the experiment harness.
//!
//! Numeric code is generic over [`Float`] (`f32` or `f64`); the aliases
//! below name the common concrete instantiations.

pub mod audio;
pub mod cli;
pub mod error;
pub mod features;
pub mod filters;
pub mod harness;
pub mod models;
pub mod scalar;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Float;

pub type AudioClipF32 = audio::AudioClip<f32>;
pub type AudioClipF64 = audio::AudioClip<f64>;
pub type FeatureVectorF32 = features::FeatureVector<f32>;
pub type FeatureVectorF64 = features::FeatureVector<f64>;
pub type FeatureExtractorF32 = features::FeatureExtractor<f32>;
pub type FeatureExtractorF64 = features::FeatureExtractor<f64>;
pub type SosFilterF32 = filters::SosFilter<f32>;
pub type SosFilterF64 = filters::SosFilter<f64>;
pub type DatasetF32 = models::Dataset<f32>;
pub type DatasetF64 = models::Dataset<f64>;
pub type TrainedModelF32 = models::TrainedModel<f32>;
pub type TrainedModelF64 = models::TrainedModel<f64>;
pub type SvmModelF64 = models::SvmModel<f64>;
pub type MlpModelF64 = models::MlpModel<f64>;
pub type LstmModelF64 = models::LstmModel<f64>;
pub type CnnModelF64 = models::CnnModel<f64>;
