use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::manifest::{load_manifest_with, IngestOptions};
use super::meta::{LabelKind, RecordingMeta};
use crate::error::{Error, Result};
use crate::filters::{FilterMode, FilterStage};
use crate::models::{evaluate, stratified_group_split, ClassifierKind, Dataset, EvalReport, TrainConfig, TrainedModel};
use crate::scalar::Float;

pub const GRID_DISTANCES_MM: [f64; 5] = [2.0, 5.0, 10.0, 25.0, 50.0];
pub const GRID_SPEEDS_MM_S: [f64; 4] = [25.0, 50.0, 75.0, 100.0];
pub const GRID_MIC_CM: [f64; 3] = [30.0, 50.0, 100.0];
pub const BASELINE_SPEED_MM_S: f64 = 12.5;
pub const BASELINE_DISTANCE_MM: f64 = 1.0;
pub const BASELINE_MIC_CM: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentAxis {
    Baseline,
    MoveDistance,
    Speed,
    MicDistance,
    Workflow,
    Filter,
}

impl ExperimentAxis {
    pub const ALL: [ExperimentAxis; 6] = [
        Self::Baseline,
        Self::MoveDistance,
        Self::Speed,
        Self::MicDistance,
        Self::Workflow,
        Self::Filter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::MoveDistance => "move_distance",
            Self::Speed => "speed",
            Self::MicDistance => "mic_distance",
            Self::Workflow => "workflow",
            Self::Filter => "filter",
        }
    }
}

impl fmt::Display for ExperimentAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment axis '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub axis: ExperimentAxis,
    pub classifiers: Vec<ClassifierKind>,
    pub filter: FilterMode,
    pub train: TrainConfig,
    /// Drives the file-level split; `train.seed` drives model fitting.
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(axis: ExperimentAxis, seed: u64) -> Self {
        Self {
            axis,
            classifiers: ClassifierKind::ALL.to_vec(),
            filter: FilterMode::None,
            train: TrainConfig {
                seed,
                ..TrainConfig::default()
            },
            seed,
        }
    }
}

/// One classifier evaluated on one axis value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub axis: ExperimentAxis,
    pub axis_value: String,
    pub classifier: ClassifierKind,
    pub filter: FilterMode,
    pub train_rows: usize,
    pub validation_rows: usize,
    pub report: EvalReport,
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// `(label, row filter)` per axis value, in grid order.
fn axis_cells(axis: ExperimentAxis, filter: FilterMode) -> Vec<(String, Box<dyn Fn(&RecordingMeta) -> bool>)> {
    let movement = |m: &RecordingMeta| m.label_kind == LabelKind::Movement;
    match axis {
        ExperimentAxis::Baseline => vec![(
            "baseline".into(),
            Box::new(move |m: &RecordingMeta| {
                movement(m)
                    && m.speed_mm_s == BASELINE_SPEED_MM_S
                    && m.move_distance_mm == BASELINE_DISTANCE_MM
                    && m.mic_distance_cm == BASELINE_MIC_CM
            }),
        )],
        ExperimentAxis::MoveDistance => GRID_DISTANCES_MM
            .iter()
            .map(|&d| {
                let cell: Box<dyn Fn(&RecordingMeta) -> bool> =
                    Box::new(move |m: &RecordingMeta| movement(m) && m.move_distance_mm == d);
                (fmt_value(d), cell)
            })
            .collect(),
        ExperimentAxis::Speed => GRID_SPEEDS_MM_S
            .iter()
            .map(|&s| {
                let cell: Box<dyn Fn(&RecordingMeta) -> bool> =
                    Box::new(move |m: &RecordingMeta| movement(m) && m.speed_mm_s == s);
                (fmt_value(s), cell)
            })
            .collect(),
        ExperimentAxis::MicDistance => GRID_MIC_CM
            .iter()
            .map(|&c| {
                let cell: Box<dyn Fn(&RecordingMeta) -> bool> =
                    Box::new(move |m: &RecordingMeta| movement(m) && m.mic_distance_cm == c);
                (fmt_value(c), cell)
            })
            .collect(),
        ExperimentAxis::Workflow => vec![(
            "workflow".into(),
            Box::new(|m: &RecordingMeta| m.label_kind == LabelKind::Workflow),
        )],
        ExperimentAxis::Filter => vec![(filter.as_str().into(), Box::new(|_: &RecordingMeta| true))],
    }
}

/// Fits the scaler and classifier on `train` only, then scores `validation`.
pub fn fit_and_evaluate<F: Float>(
    kind: ClassifierKind,
    train: &Dataset<F>,
    validation: &Dataset<F>,
    config: &TrainConfig,
) -> Result<(TrainedModel<F>, EvalReport)> {
    let model = TrainedModel::fit(kind, train, config)?;
    let report = evaluate(&model, validation)?;
    Ok((model, report))
}

/// Runs every axis value present in `dataset` against every classifier.
/// Grid values with no rows are skipped; an axis with no rows at all is an error.
pub fn run_experiment<F: Float>(spec: &ExperimentSpec, dataset: &Dataset<F>) -> Result<Vec<ExperimentReport>> {
    if spec.classifiers.is_empty() {
        return Err(Error::InvalidConfig("no classifiers requested".into()));
    }
    if dataset.meta.is_none() {
        return Err(Error::InvalidConfig("experiments need per-row recording metadata".into()));
    }
    let mut reports = Vec::new();
    for (value, keep) in axis_cells(spec.axis, spec.filter) {
        let cell = dataset.filter_meta(|m| keep(m));
        if cell.is_empty() {
            continue;
        }
        let (train, val) = stratified_group_split(&cell, spec.train.validation_fraction, spec.seed)?;
        for &kind in &spec.classifiers {
            let (_, report) = fit_and_evaluate(kind, &train, &val, &spec.train)?;
            reports.push(ExperimentReport {
                axis: spec.axis,
                axis_value: value.clone(),
                classifier: kind,
                filter: spec.filter,
                train_rows: train.len(),
                validation_rows: val.len(),
                report,
            });
        }
    }
    if reports.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(reports)
}

/// Ingests the manifest and runs the experiment. The filter axis ingests
/// once per filter mode so the modes can be compared side by side.
pub fn run_manifest_experiment<F: Float>(
    spec: &ExperimentSpec,
    manifest: impl AsRef<Path>,
) -> Result<Vec<ExperimentReport>> {
    let modes = if spec.axis == ExperimentAxis::Filter {
        vec![FilterMode::None, FilterMode::Amplitude, FilterMode::Lowpass]
    } else {
        vec![spec.filter]
    };
    let mut reports = Vec::new();
    for mode in modes {
        let opts = IngestOptions {
            filter: FilterStage::new(mode),
            ..IngestOptions::default()
        };
        let ds: Dataset<F> = load_manifest_with(manifest.as_ref(), &opts)?;
        let sub = ExperimentSpec {
            filter: mode,
            ..spec.clone()
        };
        reports.extend(run_experiment(&sub, &ds)?);
    }
    Ok(reports)
}
