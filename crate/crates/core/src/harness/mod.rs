//! Manifest ingestion, experiment grid, reports and model files.

mod experiment;
mod manifest;
mod meta;
mod persist;
mod report;

pub use experiment::{
    fit_and_evaluate, run_experiment, run_manifest_experiment, ExperimentAxis, ExperimentReport, ExperimentSpec,
    BASELINE_DISTANCE_MM, BASELINE_MIC_CM, BASELINE_SPEED_MM_S, GRID_DISTANCES_MM, GRID_MIC_CM, GRID_SPEEDS_MM_S,
};
pub use manifest::{load_manifest, load_manifest_with, read_manifest, write_manifest, IngestOptions, ManifestRow};
pub use meta::{LabelKind, RecordingMeta};
pub use persist::{load_model, load_model_as, model_from_bytes, model_to_bytes, save_model, FORMAT_VERSION, MAGIC};
pub use report::{percent, percentages, render_report, reports_to_jsonl};
