use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::labels::{Axis, MovementLabel, Target, WorkflowLabel};
use crate::audio::AudioClip;
use crate::error::{Error, Result};

pub const SPEEDS_MM_S: [f64; 5] = [12.5, 25.0, 50.0, 75.0, 100.0];
pub const DISTANCES_MM: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 25.0, 50.0];
pub const MIC_DISTANCES_CM: [f64; 3] = [30.0, 50.0, 100.0];
pub const SYNTH_SAMPLE_RATE_HZ: u32 = 44_100;

/// Base level of a single axis tone stack at the 30 cm reference distance.
const AXIS_LEVEL: f64 = 0.2;
const HARMONIC_DB: [f64; 3] = [0.0, -6.0, -12.0];
const COMPOSITE_DB: f64 = -3.0;
/// Pitch drop on the return stroke of a pull; keeps it apart from a push,
/// whose mean features would otherwise match exactly.
pub const RETRACT_PITCH: f64 = 0.85;
/// Trapezoid breakpoints as fractions of one move: ramp up, hold, ramp down, rest.
const ENVELOPE: [f64; 4] = [0.3, 0.4, 0.15, 0.15];

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub target: Target,
    pub speed_mm_s: f64,
    pub move_distance_mm: f64,
    pub mic_distance_cm: f64,
    pub duration_s: f64,
    pub seed: u64,
    /// Peak level of the 60 Hz hum in dBFS; `-inf` disables it.
    pub hum_db: f64,
    /// RMS level of the white noise in dBFS; `-inf` disables it.
    pub noise_db: f64,
}

impl SynthSpec {
    /// Baseline cell: slowest speed, shortest move, closest microphone.
    pub fn movement(label: MovementLabel) -> Self {
        Self {
            target: Target::Movement(label),
            speed_mm_s: 12.5,
            move_distance_mm: 1.0,
            mic_distance_cm: 30.0,
            duration_s: 5.0,
            seed: 0,
            hum_db: -35.0,
            noise_db: -45.0,
        }
    }

    pub fn workflow(label: WorkflowLabel) -> Self {
        Self {
            target: Target::Workflow(label),
            speed_mm_s: 25.0,
            move_distance_mm: 10.0,
            ..Self::movement(MovementLabel::X)
        }
    }

    pub fn silent(mut self) -> Self {
        self.hum_db = f64::NEG_INFINITY;
        self.noise_db = f64::NEG_INFINITY;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let on_grid = |v: f64, grid: &[f64]| grid.iter().any(|&g| g == v);
        if !on_grid(self.speed_mm_s, &SPEEDS_MM_S) {
            return Err(Error::InvalidSpec(format!("speed {} mm/s is not in {SPEEDS_MM_S:?}", self.speed_mm_s)));
        }
        if !on_grid(self.move_distance_mm, &DISTANCES_MM) {
            return Err(Error::InvalidSpec(format!(
                "move distance {} mm is not in {DISTANCES_MM:?}",
                self.move_distance_mm
            )));
        }
        if !on_grid(self.mic_distance_cm, &MIC_DISTANCES_CM) {
            return Err(Error::InvalidSpec(format!(
                "mic distance {} cm is not in {MIC_DISTANCES_CM:?}",
                self.mic_distance_cm
            )));
        }
        if !(self.duration_s >= 1.0 && self.duration_s.is_finite()) {
            return Err(Error::InvalidSpec(format!("duration must be at least 1 s, got {}", self.duration_s)));
        }
        for (name, db) in [("hum_db", self.hum_db), ("noise_db", self.noise_db)] {
            if db.is_nan() || db > 0.0 {
                return Err(Error::InvalidSpec(format!("{name} must be a level at or below 0 dBFS, got {db}")));
            }
        }
        Ok(())
    }

    /// Seconds per movement segment.
    pub fn segment_s(&self) -> f64 {
        self.move_distance_mm / self.speed_mm_s
    }

    pub fn speed_factor(&self) -> f64 {
        (self.speed_mm_s / 12.5).powf(0.25)
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    movement: MovementLabel,
    reversed: bool,
    pitch: f64,
}

fn script(target: Target) -> Vec<Segment> {
    let seg = |movement| Segment {
        movement,
        reversed: false,
        pitch: 1.0,
    };
    match target {
        Target::Movement(m) => vec![seg(m)],
        Target::Workflow(WorkflowLabel::Push) => vec![seg(MovementLabel::X)],
        Target::Workflow(WorkflowLabel::Pull) => vec![Segment {
            movement: MovementLabel::X,
            reversed: true,
            pitch: RETRACT_PITCH,
        }],
        Target::Workflow(WorkflowLabel::PickAndPlace) => {
            vec![seg(MovementLabel::Z), seg(MovementLabel::XY), seg(MovementLabel::Z)]
        }
        Target::Workflow(WorkflowLabel::Packing) => {
            vec![seg(MovementLabel::XY), seg(MovementLabel::Z), seg(MovementLabel::XY)]
        }
    }
}

/// Asymmetric trapezoid over one move, `u` in `[0, 1)`.
pub fn envelope(u: f64) -> f64 {
    let [rise, hold, fall, _] = ENVELOPE;
    if u < rise {
        u / rise
    } else if u < rise + hold {
        1.0
    } else if u < rise + hold + fall {
        1.0 - (u - rise - hold) / fall
    } else {
        0.0
    }
}

fn axis_tone(axis: Axis, freq_scale: f64, t: f64, phase: f64) -> f64 {
    let f0 = axis.fundamental_hz() * freq_scale;
    HARMONIC_DB
        .iter()
        .enumerate()
        .map(|(h, &db)| db_to_amplitude(db) * (TAU * f0 * (h + 1) as f64 * t + phase * (h + 1) as f64).sin())
        .sum()
}

/// Renders one clip. Identical specs give bit-identical samples.
pub fn synth_emission(spec: &SynthSpec) -> Result<AudioClip<f64>> {
    spec.validate()?;
    let sr = SYNTH_SAMPLE_RATE_HZ;
    let n = (spec.duration_s * f64::from(sr)).round() as usize;
    let segments = script(spec.target);
    let seg_s = spec.segment_s();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let offset = rng.random::<f64>() * seg_s * segments.len() as f64;
    let phases: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>() * TAU);
    let gain = AXIS_LEVEL * 30.0 / spec.mic_distance_cm;
    let hum = db_to_amplitude(spec.hum_db);
    let hum_phase = rng.random::<f64>() * TAU;
    let noise = Normal::new(0.0, db_to_amplitude(spec.noise_db)).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let speed = spec.speed_factor();

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / f64::from(sr);
        let pos = (t + offset) / seg_s;
        let seg = segments[pos.floor() as usize % segments.len()];
        let u = pos.fract();
        let env = envelope(if seg.reversed { 1.0 - u } else { u });
        let axes = seg.movement.axes();
        let level = if axes.len() > 1 { db_to_amplitude(COMPOSITE_DB) } else { 1.0 };
        let mut s = 0.0;
        if env > 0.0 {
            for &axis in axes {
                s += axis_tone(axis, speed * seg.pitch, t, phases[axis as usize]);
            }
            s *= gain * level * env;
        }
        if hum > 0.0 {
            s += hum * (TAU * 60.0 * t + hum_phase).sin();
        }
        // always draw so the stream stays aligned across noise levels
        let w = noise.sample(&mut rng);
        samples.push(s + w);
    }
    Ok(AudioClip::new(samples, sr)?.with_id(format!("{}-{}", spec.target.label(), spec.seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::spectrum_peaks;

    #[test]
    fn harmonics_only_spectrum() {
        let spec = SynthSpec {
            move_distance_mm: 50.0,
            ..SynthSpec::movement(MovementLabel::X).silent()
        };
        let clip = synth_emission(&spec).unwrap();
        let report = spectrum_peaks(&clip, 3).unwrap();
        let mut found: Vec<f64> = report.peaks.iter().map(|p| p.frequency_hz).collect();
        found.sort_by(f64::total_cmp);
        assert_eq!(found.len(), 3);
        for (f, want) in found.iter().zip([140.0, 280.0, 420.0]) {
            assert!((f - want).abs() <= report.resolution_hz, "{found:?}");
        }
        let weakest = report.peaks.iter().map(|p| p.power_db).fold(f64::INFINITY, f64::min);
        let all = spectrum_peaks(&clip, 100).unwrap();
        for p in all.peaks.iter().skip(3) {
            assert!(p.power_db < weakest - 20.0, "{p:?}");
        }
    }

    #[test]
    fn inverse_distance_gain() {
        let near = synth_emission(&SynthSpec::movement(MovementLabel::XY).silent()).unwrap();
        let far = synth_emission(&SynthSpec {
            mic_distance_cm: 100.0,
            ..SynthSpec::movement(MovementLabel::XY).silent()
        })
        .unwrap();
        let ratio = far.rms() / near.rms();
        assert!((ratio - 0.3).abs() < 0.3 * 0.02, "{ratio}");
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = SynthSpec {
            seed: 42,
            ..SynthSpec::workflow(WorkflowLabel::Packing)
        };
        let a = synth_emission(&spec).unwrap();
        let b = synth_emission(&spec).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = synth_emission(&SynthSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn off_grid_values_rejected() {
        let base = SynthSpec::movement(MovementLabel::X);
        for bad in [
            SynthSpec { speed_mm_s: 30.0, ..base },
            SynthSpec { move_distance_mm: 3.0, ..base },
            SynthSpec { mic_distance_cm: 40.0, ..base },
            SynthSpec { duration_s: 0.5, ..base },
        ] {
            assert!(matches!(synth_emission(&bad), Err(Error::InvalidSpec(_))));
        }
    }

    #[test]
    fn length_and_headroom() {
        let clip = synth_emission(&SynthSpec::movement(MovementLabel::XYZ)).unwrap();
        assert_eq!(clip.len(), 5 * 44_100);
        assert!(clip.samples.iter().all(|s| s.abs() < 1.0));
    }

    #[test]
    fn envelope_shape() {
        assert_eq!(envelope(0.0), 0.0);
        assert_eq!(envelope(0.5), 1.0);
        assert_eq!(envelope(0.95), 0.0);
        assert!((envelope(0.15) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn speed_shifts_pitch_sub_octave() {
        let fast = SynthSpec {
            speed_mm_s: 100.0,
            ..SynthSpec::movement(MovementLabel::X)
        };
        assert!((fast.speed_factor() - 8f64.powf(0.25)).abs() < 1e-12);
        assert!(fast.speed_factor() < 2.0);
    }
}
