use std::path::Path;

use rustfft::num_complex::Complex;

use super::mel::mfcc_row;
use super::spectral::{
    chroma, contrast_bands, rmse, spectral_bandwidth, spectral_centroid, spectral_contrast,
    spectral_rolloff, zcr, CONTRAST_BANDS, ROLLOFF_FRACTION,
};
use super::{DctBasis, MelFilterbank, Stft};
use crate::audio::{frame_chunk, Chunk, FrameSpec};
use crate::error::{Error, Result};
use crate::scalar::Float;

pub const FEATURE_DIM: usize = 27;
pub const N_MFCC: usize = 14;
pub const N_MELS: usize = 40;

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "mfcc_0", "mfcc_1", "mfcc_2", "mfcc_3", "mfcc_4", "mfcc_5", "mfcc_6", "mfcc_7", "mfcc_8",
    "mfcc_9", "mfcc_10", "mfcc_11", "mfcc_12", "mfcc_13", "rmse_mean", "zcr_mean",
    "centroid_mean_hz", "bandwidth_mean_hz", "rolloff_mean_hz", "contrast_0", "contrast_1",
    "contrast_2", "contrast_3", "contrast_4", "contrast_5", "contrast_6", "chroma_mean",
];

const RMSE: usize = 14;
const ZCR: usize = 15;
const CENTROID: usize = 16;
const BANDWIDTH: usize = 17;
const ROLLOFF: usize = 18;
const CONTRAST: usize = 19;
const CHROMA: usize = 26;

/// Chunk-level acoustic signature: frame means of every descriptor in a fixed layout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector<F = f64>(pub [F; FEATURE_DIM]);

impl<F: Float> FeatureVector<F> {
    pub fn as_slice(&self) -> &[F] {
        &self.0
    }

    pub fn mfcc(&self) -> &[F] {
        &self.0[..N_MFCC]
    }

    pub fn rmse_mean(&self) -> F {
        self.0[RMSE]
    }

    pub fn zcr_mean(&self) -> F {
        self.0[ZCR]
    }

    pub fn centroid_mean_hz(&self) -> F {
        self.0[CENTROID]
    }

    pub fn bandwidth_mean_hz(&self) -> F {
        self.0[BANDWIDTH]
    }

    pub fn rolloff_mean_hz(&self) -> F {
        self.0[ROLLOFF]
    }

    pub fn contrast(&self) -> &[F] {
        &self.0[CONTRAST..CONTRAST + CONTRAST_BANDS]
    }

    pub fn chroma_mean(&self) -> F {
        self.0[CHROMA]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn from_slice(values: &[F]) -> Result<Self> {
        let arr: [F; FEATURE_DIM] = values.try_into().map_err(|_| {
            Error::Shape(format!("expected {FEATURE_DIM} features, got {}", values.len()))
        })?;
        Ok(Self(arr))
    }
}

/// Precomputed window, FFT plan, mel filterbank and DCT for one sample rate.
#[derive(Clone)]
pub struct FeatureExtractor<F: Float> {
    stft: Stft<F>,
    bank: MelFilterbank<F>,
    dct: DctBasis<F>,
    bands: Vec<(usize, usize)>,
    sample_rate_hz: u32,
}

impl<F: Float> FeatureExtractor<F> {
    pub fn new(spec: FrameSpec, sample_rate_hz: u32) -> Result<Self> {
        let stft = Stft::new(spec, sample_rate_hz)?;
        let nyquist = F::from_u32(sample_rate_hz).unwrap() / F::cst(2.0);
        let bank = MelFilterbank::new(N_MELS, F::zero(), nyquist, spec.fft_size, sample_rate_hz)?;
        let bands = contrast_bands(stft.bin_frequencies(), sample_rate_hz);
        Ok(Self {
            stft,
            bank,
            dct: DctBasis::new(N_MFCC, N_MELS),
            bands,
            sample_rate_hz,
        })
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn filterbank(&self) -> &MelFilterbank<F> {
        &self.bank
    }

    pub fn extract(&self, samples: &[F]) -> Result<FeatureVector<F>> {
        let frames = frame_chunk(samples, self.stft.spec())?;
        let freqs = self.stft.bin_frequencies();
        let rolloff_fraction = F::cst(ROLLOFF_FRACTION);
        let mut acc = [F::zero(); FEATURE_DIM];
        let mut scratch: Vec<Complex<F>> = Vec::with_capacity(self.stft.spec().fft_size);

        for frame in &frames {
            let power = self.stft.frame_power(frame, &mut scratch);
            for (a, c) in acc.iter_mut().zip(mfcc_row(&power, &self.bank, &self.dct)) {
                *a += c;
            }
            acc[RMSE] += rmse(frame)?;
            acc[ZCR] += zcr(frame)?;
            acc[CENTROID] += spectral_centroid(&power, freqs);
            acc[BANDWIDTH] += spectral_bandwidth(&power, freqs);
            acc[ROLLOFF] += spectral_rolloff(&power, freqs, rolloff_fraction);
            for (a, c) in acc[CONTRAST..CONTRAST + CONTRAST_BANDS]
                .iter_mut()
                .zip(spectral_contrast(&power, &self.bands))
            {
                *a += c;
            }
            acc[CHROMA] += chroma(&power, freqs).iter().copied().sum::<F>() / F::cst(12.0);
        }

        let n = F::from_usize_lossy(frames.len());
        for a in &mut acc {
            *a /= n;
        }
        Ok(FeatureVector(acc))
    }

    pub fn extract_chunk(&self, chunk: &Chunk<F>) -> Result<FeatureVector<F>> {
        if chunk.sample_rate_hz != self.sample_rate_hz {
            return Err(Error::Shape(format!(
                "extractor built for {} Hz, chunk is {} Hz",
                self.sample_rate_hz, chunk.sample_rate_hz
            )));
        }
        self.extract(&chunk.samples)
    }
}

pub fn extract_features<F: Float>(chunk: &Chunk<F>, spec: &FrameSpec) -> Result<FeatureVector<F>> {
    FeatureExtractor::new(*spec, chunk.sample_rate_hz)?.extract_chunk(chunk)
}

/// Writes one row per vector under a header of the 27 canonical names,
/// followed by a `label` column when labels are supplied.
pub fn write_features_csv<F: Float>(
    path: impl AsRef<Path>,
    rows: &[FeatureVector<F>],
    labels: Option<&[String]>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = FEATURE_NAMES.to_vec();
    if labels.is_some() {
        header.push("label");
    }
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut rec: Vec<String> = row.0.iter().map(|v| format!("{}", v.as_f64())).collect();
        if let Some(l) = labels {
            rec.push(l[i].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_features_csv<F: Float>(
    path: impl AsRef<Path>,
) -> Result<(Vec<FeatureVector<F>>, Option<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.len() < FEATURE_DIM || header.iter().zip(FEATURE_NAMES).any(|(a, b)| a != b) {
        return Err(Error::Shape("feature CSV header does not match canonical layout".into()));
    }
    let has_label = header.get(FEATURE_DIM) == Some("label");
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = rec
            .iter()
            .take(FEATURE_DIM)
            .map(|s| s.parse::<f64>().map(F::cst))
            .collect::<std::result::Result<Vec<F>, _>>()
            .map_err(|e| Error::Shape(format!("bad feature value: {e}")))?;
        rows.push(FeatureVector::from_slice(&values)?);
        if has_label {
            labels.push(rec.get(FEATURE_DIM).unwrap_or_default().to_string());
        }
    }
    Ok((rows, has_label.then_some(labels)))
}
