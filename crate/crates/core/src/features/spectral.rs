use std::cmp::Ordering;

use super::LOG_FLOOR;
use crate::error::{Error, Result};
use crate::scalar::Float;

pub const ROLLOFF_FRACTION: f64 = 0.85;
pub const CONTRAST_QUANTILE: f64 = 0.02;
pub const CONTRAST_BANDS: usize = 7;
const CONTRAST_FMIN_HZ: f64 = 200.0;
const CHROMA_FMIN_HZ: f64 = 20.0;

pub fn rmse<F: Float>(frame: &[F]) -> Result<F> {
    if frame.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let n = F::from_usize_lossy(frame.len());
    Ok((frame.iter().map(|&x| x * x).sum::<F>() / n).sqrt())
}

/// Fraction of adjacent pairs whose sign differs; zero counts as non-negative.
pub fn zcr<F: Float>(frame: &[F]) -> Result<F> {
    if frame.len() < 2 {
        return Err(Error::InvalidLength(frame.len()));
    }
    let crossings = frame
        .windows(2)
        .filter(|w| (w[0] >= F::zero()) != (w[1] >= F::zero()))
        .count();
    Ok(F::from_usize_lossy(crossings) / F::from_usize_lossy(frame.len() - 1))
}

fn total<F: Float>(power: &[F]) -> F {
    power.iter().copied().sum()
}

/// Power-weighted mean frequency; 0 Hz for an all-zero spectrum.
pub fn spectral_centroid<F: Float>(power: &[F], freqs: &[F]) -> F {
    let t = total(power);
    if t <= F::zero() {
        return F::zero();
    }
    power.iter().zip(freqs).map(|(&p, &f)| p * f).sum::<F>() / t
}

/// Second-order spread around the centroid.
pub fn spectral_bandwidth<F: Float>(power: &[F], freqs: &[F]) -> F {
    let t = total(power);
    if t <= F::zero() {
        return F::zero();
    }
    let c = spectral_centroid(power, freqs);
    let var = power
        .iter()
        .zip(freqs)
        .map(|(&p, &f)| p * (f - c) * (f - c))
        .sum::<F>()
        / t;
    var.sqrt()
}

/// Frequency of the first bin at which cumulative power reaches `fraction` of the total.
pub fn spectral_rolloff<F: Float>(power: &[F], freqs: &[F], fraction: F) -> F {
    let t = total(power);
    if t <= F::zero() {
        return F::zero();
    }
    let target = fraction * t;
    let mut acc = F::zero();
    for (&p, &f) in power.iter().zip(freqs) {
        acc += p;
        if acc >= target {
            return f;
        }
    }
    *freqs.last().unwrap()
}

/// Bin index ranges `[start, end)` of the seven octave sub-bands:
/// `[0, 200)`, `[200, 400)`, ..., `[3200, 6400)`, `[6400, sr/2]`. Edges above
/// Nyquist are capped, which can leave trailing bands empty.
pub fn contrast_bands<F: Float>(freqs: &[F], sample_rate_hz: u32) -> Vec<(usize, usize)> {
    let nyquist = sample_rate_hz as f64 / 2.0;
    let mut edges = vec![0.0];
    for b in 0..CONTRAST_BANDS - 1 {
        edges.push((CONTRAST_FMIN_HZ * 2f64.powi(b as i32)).min(nyquist));
    }
    edges.push(nyquist);

    let index_of = |hz: f64| freqs.iter().position(|f| f.as_f64() >= hz).unwrap_or(freqs.len());
    (0..CONTRAST_BANDS)
        .map(|b| {
            let lo = index_of(edges[b]);
            let hi = if b + 1 == CONTRAST_BANDS {
                freqs.iter().rposition(|f| f.as_f64() <= nyquist).map_or(0, |i| i + 1)
            } else {
                index_of(edges[b + 1])
            };
            (lo, hi.max(lo))
        })
        .collect()
}

#[inline]
fn db<F: Float>(x: F) -> F {
    F::cst(10.0) * (x + F::cst(LOG_FLOOR)).log10()
}

/// Peak-minus-valley energy (dB) within each band.
pub fn spectral_contrast<F: Float>(power: &[F], bands: &[(usize, usize)]) -> Vec<F> {
    let q = F::cst(CONTRAST_QUANTILE);
    bands
        .iter()
        .map(|&(lo, hi)| {
            if hi <= lo || hi > power.len() {
                return F::zero();
            }
            let mut band = power[lo..hi].to_vec();
            band.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            let len = band.len();
            let k = ((q * F::from_usize_lossy(len)).round().to_usize().unwrap_or(0)).clamp(1, len);
            let kf = F::from_usize_lossy(k);
            let valley = band[..k].iter().copied().sum::<F>() / kf;
            let peak = band[len - k..].iter().copied().sum::<F>() / kf;
            db(peak) - db(valley)
        })
        .collect()
}

/// Pitch class (C = 0, ..., B = 11) of a frequency in Hz.
pub(crate) fn pitch_class<F: Float>(f: F) -> usize {
    let midi = (F::cst(12.0) * (f / F::cst(440.0)).log2()).round() + F::cst(69.0);
    midi.to_i64().unwrap().rem_euclid(12) as usize
}

/// Energy folded onto the 12 pitch classes, normalized to a maximum of 1.
pub fn chroma<F: Float>(power: &[F], freqs: &[F]) -> [F; 12] {
    let mut out = [F::zero(); 12];
    for (&p, &f) in power.iter().zip(freqs) {
        if f >= F::cst(CHROMA_FMIN_HZ) {
            out[pitch_class(f)] += p;
        }
    }
    let max = out.iter().copied().fold(F::zero(), F::max);
    if max > F::zero() {
        for v in &mut out {
            *v /= max;
        }
    }
    out
}
