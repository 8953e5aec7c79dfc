use super::{PowerSpectrogram, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::scalar::Float;

/// HTK mel scale.
pub fn hz_to_mel<F: Float>(hz: F) -> F {
    F::cst(2595.0) * (F::one() + hz / F::cst(700.0)).log10()
}

pub fn mel_to_hz<F: Float>(mel: F) -> F {
    F::cst(700.0) * (F::cst(10.0).powf(mel / F::cst(2595.0)) - F::one())
}

/// Triangular filters (linear in mel) equally spaced on the mel scale, peak weight 1.
#[derive(Clone, Debug, PartialEq)]
pub struct MelFilterbank<F = f64> {
    /// `[n_mels][n_bins]`
    pub weights: Vec<Vec<F>>,
    pub n_mels: usize,
    pub fmin_hz: F,
    pub fmax_hz: F,
    /// Lower edge, apex, upper edge of every filter in Hz.
    pub edges_hz: Vec<F>,
}

impl<F: Float> MelFilterbank<F> {
    pub fn new(n_mels: usize, fmin_hz: F, fmax_hz: F, fft_size: usize, sample_rate_hz: u32) -> Result<Self> {
        let nyquist = F::from_u32(sample_rate_hz).unwrap() / F::cst(2.0);
        if n_mels < 2 || fmin_hz < F::zero() || fmin_hz >= fmax_hz || fmax_hz > nyquist {
            return Err(Error::InvalidRange(format!(
                "mel filterbank n_mels={n_mels} fmin={fmin_hz} fmax={fmax_hz} nyquist={nyquist}"
            )));
        }
        let (mlo, mhi) = (hz_to_mel(fmin_hz), hz_to_mel(fmax_hz));
        let step = (mhi - mlo) / F::from_usize_lossy(n_mels + 1);
        let edges_mel: Vec<F> = (0..n_mels + 2)
            .map(|i| mlo + step * F::from_usize_lossy(i))
            .collect();
        let edges_hz: Vec<F> = edges_mel.iter().map(|&m| mel_to_hz(m)).collect();
        let bin_mels: Vec<F> = super::bin_frequencies::<F>(fft_size, sample_rate_hz)
            .into_iter()
            .map(hz_to_mel)
            .collect();

        let mut weights = Vec::with_capacity(n_mels);
        for m in 0..n_mels {
            let (l, c, r) = (edges_mel[m], edges_mel[m + 1], edges_mel[m + 2]);
            let row: Vec<F> = bin_mels
                .iter()
                .map(|&f| {
                    let up = (f - l) / (c - l);
                    let down = (r - f) / (r - c);
                    up.min(down).max(F::zero())
                })
                .collect();
            if row.iter().all(|&w| w == F::zero()) {
                return Err(Error::InvalidRange(format!(
                    "mel filter {m} ({:.1}-{:.1} Hz) covers no FFT bin",
                    edges_hz[m],
                    edges_hz[m + 2]
                )));
            }
            weights.push(row);
        }
        Ok(Self {
            weights,
            n_mels,
            fmin_hz,
            fmax_hz,
            edges_hz,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn apply(&self, power: &[F]) -> Vec<F> {
        self.weights
            .iter()
            .map(|row| row.iter().zip(power).map(|(&w, &p)| w * p).sum())
            .collect()
    }
}

/// Orthonormal DCT-II basis, `[n_coeffs][n_inputs]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DctBasis<F = f64> {
    pub rows: Vec<Vec<F>>,
}

impl<F: Float> DctBasis<F> {
    pub fn new(n_coeffs: usize, n_inputs: usize) -> Self {
        let n = F::from_usize_lossy(n_inputs);
        let s0 = (F::one() / n).sqrt();
        let sk = (F::cst(2.0) / n).sqrt();
        let rows = (0..n_coeffs)
            .map(|k| {
                let scale = if k == 0 { s0 } else { sk };
                (0..n_inputs)
                    .map(|i| {
                        let arg = F::PI() * F::from_usize_lossy(k) * F::from_usize_lossy(2 * i + 1)
                            / (F::cst(2.0) * n);
                        scale * arg.cos()
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn transform(&self, x: &[F]) -> Vec<F> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

/// Log-mel cepstrum of one power spectrum row.
pub(crate) fn mfcc_row<F: Float>(power: &[F], bank: &MelFilterbank<F>, dct: &DctBasis<F>) -> Vec<F> {
    let floor = F::cst(LOG_FLOOR);
    let log_mel: Vec<F> = bank.apply(power).into_iter().map(|e| (e + floor).ln()).collect();
    dct.transform(&log_mel)
}

/// `[n_frames][n_coeffs]` cepstral coefficients, zeroth coefficient retained.
pub fn mfcc<F: Float>(
    spec: &PowerSpectrogram<F>,
    bank: &MelFilterbank<F>,
    n_coeffs: usize,
) -> Result<Vec<Vec<F>>> {
    if bank.n_bins() != spec.n_bins() {
        return Err(Error::Shape(format!(
            "filterbank has {} bins, spectrogram has {}",
            bank.n_bins(),
            spec.n_bins()
        )));
    }
    if n_coeffs > bank.n_mels {
        return Err(Error::Shape(format!(
            "{n_coeffs} coefficients requested from {} mel bands",
            bank.n_mels
        )));
    }
    let dct = DctBasis::new(n_coeffs, bank.n_mels);
    Ok(spec.power.iter().map(|row| mfcc_row(row, bank, &dct)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_closed_form() {
        assert!((hz_to_mel(700.0f64) - 2595.0 * 2f64.log10()).abs() < 1e-12);
        assert!((hz_to_mel(700.0f64) - 781.17).abs() < 0.01);
        for f in [0.0f64, 60.0, 1000.0, 8000.0] {
            assert!((mel_to_hz(hz_to_mel(f)) - f).abs() < 1e-9);
        }
    }

    #[test]
    fn apex_is_maximum() {
        let bank = MelFilterbank::<f64>::new(40, 0.0, 22050.0, 2048, 44100).unwrap();
        let freqs = crate::features::bin_frequencies::<f64>(2048, 44100);
        for (m, row) in bank.weights.iter().enumerate() {
            assert!(row.iter().all(|&w| w >= 0.0));
            let centre = hz_to_mel(bank.edges_hz[m + 1]);
            let apex = freqs
                .iter()
                .map(|&f| (hz_to_mel(f) - centre).abs())
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap()
                .0;
            let max = row.iter().cloned().fold(0.0, f64::max);
            assert_eq!(row[apex], max, "filter {m}");
        }
    }

    #[test]
    fn invalid_ranges() {
        assert!(MelFilterbank::<f64>::new(1, 0.0, 8000.0, 2048, 44100).is_err());
        assert!(MelFilterbank::<f64>::new(40, 500.0, 400.0, 2048, 44100).is_err());
        assert!(MelFilterbank::<f64>::new(40, 0.0, 30000.0, 2048, 44100).is_err());
        // far too many filters for a tiny FFT leaves some empty
        assert!(MelFilterbank::<f64>::new(128, 0.0, 4000.0, 64, 8000).is_err());
    }

    #[test]
    fn dct_is_orthonormal() {
        let d = DctBasis::<f64>::new(40, 40);
        for i in 0..40 {
            for j in 0..40 {
                let dot: f64 = d.rows[i].iter().zip(&d.rows[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn constant_input_only_dc() {
        let d = DctBasis::<f64>::new(14, 40);
        let c = d.transform(&[3.0; 40]);
        assert!((c[0] - 3.0 * 40f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn shape_mismatch() {
        let bank = MelFilterbank::<f64>::new(40, 0.0, 22050.0, 2048, 44100).unwrap();
        let spec = PowerSpectrogram {
            power: vec![vec![1.0; 513]],
            bin_frequencies_hz: vec![0.0; 513],
            frame_times_s: vec![0.0],
        };
        assert!(matches!(mfcc(&spec, &bank, 14), Err(Error::Shape(_))));
    }
}
