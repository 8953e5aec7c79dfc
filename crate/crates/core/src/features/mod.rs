//! Per-frame acoustic descriptors and their aggregation into the 27-slot
//! per-chunk feature vector.

mod mel;
mod spectral;
mod stft;
mod vector;

pub use mel::{hz_to_mel, mel_to_hz, mfcc, DctBasis, MelFilterbank};
pub use spectral::{
    chroma, contrast_bands, rmse, spectral_bandwidth, spectral_centroid, spectral_contrast,
    spectral_rolloff, zcr, CONTRAST_BANDS, CONTRAST_QUANTILE, ROLLOFF_FRACTION,
};
pub use stft::{bin_frequencies, hann_window, stft_power, PowerSpectrogram, Stft};
pub use vector::{
    extract_features, read_features_csv, write_features_csv, FeatureExtractor, FeatureVector,
    FEATURE_DIM, FEATURE_NAMES, N_MELS, N_MFCC,
};

/// Floor added to energies before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-10;
