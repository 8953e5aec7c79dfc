//! Parametric stand-in for recorded robot emissions.

mod dataset;
mod emission;
mod labels;

pub use dataset::{derive_seed, synth_dataset};
pub use emission::{
    db_to_amplitude, envelope, synth_emission, SynthSpec, DISTANCES_MM, MIC_DISTANCES_CM, RETRACT_PITCH,
    SPEEDS_MM_S, SYNTH_SAMPLE_RATE_HZ,
};
pub use labels::{label_names, Axis, MovementLabel, Target, WorkflowLabel};
