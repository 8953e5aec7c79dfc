//! `asca` command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audio::{read_wav, write_wav};
use crate::error::{Error, Result};
use crate::features::{write_features_csv, FeatureVector};
use crate::filters::{AmplitudeGateSpec, ButterworthSpec, FilterMode, FilterStage};
use crate::harness::{
    load_manifest_with, load_model, render_report, reports_to_jsonl, run_manifest_experiment, save_model,
    ExperimentAxis, ExperimentSpec, IngestOptions,
};
use crate::models::{ClassifierKind, Dataset, TrainConfig, TrainedModel};
use crate::synth::{synth_dataset, MovementLabel, SynthSpec, WorkflowLabel};
use crate::verify::{verify_clip, VerifyOptions, DEFAULT_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "asca", version, about = "Acoustic side-channel verification of robot movements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic dataset and its manifest
    Synth(SynthArgs),
    /// Write chunk feature vectors to CSV
    Extract(ExtractArgs),
    /// Denoise a WAV file
    Filter(FilterArgs),
    /// Fit a classifier on every row of a manifest
    Train(TrainArgs),
    /// Score a saved model on a manifest
    Eval(EvalArgs),
    /// Run an experiment axis with a file-level split
    Experiment(ExperimentArgs),
    /// Check a recording against the expected label
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Movement,
    Workflow,
}

#[derive(Args, Debug)]
struct FilterFlags {
    /// Denoising applied before feature extraction
    #[arg(long, default_value = "none")]
    filter: FilterMode,
}

impl FilterFlags {
    fn ingest(&self) -> IngestOptions {
        IngestOptions {
            filter: FilterStage::new(self.filter),
            ..IngestOptions::default()
        }
    }
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "movement")]
    kind: Kind,
    /// Clips per label
    #[arg(long, default_value_t = 10)]
    clips: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long)]
    distance: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    mic: f64,
    #[arg(long, default_value_t = 5.0)]
    duration: f64,
    #[arg(long, default_value_t = -35.0, allow_hyphen_values = true)]
    hum_db: f64,
    #[arg(long, default_value_t = -45.0, allow_hyphen_values = true)]
    noise_db: f64,
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    filter: FilterFlags,
}

#[derive(Args, Debug)]
struct FilterArgs {
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    mode: FilterMode,
    #[arg(long, allow_hyphen_values = true)]
    threshold_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    attenuation_db: Option<f64>,
    #[arg(long)]
    cutoff_hz: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    classifier: ClassifierKind,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
    #[command(flatten)]
    filter: FilterFlags,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[command(flatten)]
    filter: FilterFlags,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value = "baseline")]
    axis: ExperimentAxis,
    /// Comma-separated; defaults to all four
    #[arg(long, value_delimiter = ',')]
    classifier: Vec<ClassifierKind>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    filter: FilterFlags,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    input: PathBuf,
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    expected: String,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[command(flatten)]
    filter: FilterFlags,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn config(seed: u64, epochs: Option<usize>) -> TrainConfig {
    let mut c = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    if let Some(e) = epochs {
        c.epochs = e;
    }
    c
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Synth(a) => {
            let grid: Vec<SynthSpec> = match a.kind {
                Kind::Movement => MovementLabel::ALL.iter().map(|&m| SynthSpec::movement(m)).collect(),
                Kind::Workflow => WorkflowLabel::ALL.iter().map(|&w| SynthSpec::workflow(w)).collect(),
            };
            let grid: Vec<SynthSpec> = grid
                .into_iter()
                .map(|s| SynthSpec {
                    speed_mm_s: a.speed.unwrap_or(s.speed_mm_s),
                    move_distance_mm: a.distance.unwrap_or(s.move_distance_mm),
                    mic_distance_cm: a.mic,
                    duration_s: a.duration,
                    hum_db: a.hum_db,
                    noise_db: a.noise_db,
                    ..s
                })
                .collect();
            let rows = synth_dataset(&grid, a.clips, a.seed, &a.out)?;
            eprintln!("wrote {} clips and {}", rows.len(), a.out.join("manifest.csv").display());
        }
        Command::Extract(a) => {
            let ds: Dataset = load_manifest_with(&a.manifest, &a.filter.ingest())?;
            let rows = ds.x.iter().map(|r| FeatureVector::from_slice(r)).collect::<Result<Vec<_>>>()?;
            let labels: Vec<String> = ds.y.iter().map(|&c| ds.label_names[c].clone()).collect();
            write_features_csv(&a.out, &rows, Some(&labels))?;
            eprintln!("wrote {} feature rows to {}", rows.len(), a.out.display());
        }
        Command::Filter(a) => {
            let mut stage = FilterStage::new(a.mode);
            stage.gate = AmplitudeGateSpec {
                threshold_dbfs: a.threshold_db.unwrap_or(stage.gate.threshold_dbfs),
                attenuation_db: a.attenuation_db.unwrap_or(stage.gate.attenuation_db),
                ..stage.gate
            };
            stage.gate.validate()?;
            stage.lowpass = ButterworthSpec {
                cutoff_hz: a.cutoff_hz.unwrap_or(stage.lowpass.cutoff_hz),
                order: a.order.unwrap_or(stage.lowpass.order),
            };
            let clip = read_wav::<f64>(&a.input)?;
            write_wav(&stage.apply(&clip)?, &a.out)?;
        }
        Command::Train(a) => {
            let ds: Dataset = load_manifest_with(&a.manifest, &a.filter.ingest())?;
            let model = TrainedModel::fit(a.classifier, &ds, &config(a.seed, a.epochs))?;
            save_model(&model, &a.out)?;
            eprintln!("trained {} on {} rows, saved {}", a.classifier, ds.len(), a.out.display());
        }
        Command::Eval(a) => {
            let model: TrainedModel = load_model(&a.model)?;
            let ds: Dataset = load_manifest_with(&a.manifest, &a.filter.ingest())?;
            let report = model.evaluate(&ds)?;
            match a.format {
                Format::Json => emit(&(serde_json::to_string(&report)? + "\n"))?,
                Format::Text => {
                    let mut s = format!("accuracy {:.4}\n", report.accuracy);
                    for (c, name) in report.label_names.iter().enumerate() {
                        s += &format!(
                            "{name}\tP {:.4}\tR {:.4}\tF1 {:.4}\tn {}\n",
                            report.precision[c], report.recall[c], report.f1[c], report.support[c]
                        );
                    }
                    emit(&s)?;
                }
            }
        }
        Command::Experiment(a) => {
            let spec = ExperimentSpec {
                classifiers: if a.classifier.is_empty() {
                    ClassifierKind::ALL.to_vec()
                } else {
                    a.classifier
                },
                filter: a.filter.filter,
                train: config(a.seed, a.epochs),
                ..ExperimentSpec::new(a.axis, a.seed)
            };
            let reports = run_manifest_experiment::<f64>(&spec, &a.manifest)?;
            match a.format {
                Format::Json => emit(&reports_to_jsonl(&reports)?)?,
                Format::Text => emit(&render_report(&reports))?,
            }
        }
        Command::Verify(a) => {
            let model: TrainedModel = load_model(&a.model)?;
            let opts = VerifyOptions {
                threshold: a.threshold,
                filter: FilterStage::new(a.filter.filter),
                ..VerifyOptions::default()
            };
            let clip = read_wav::<f64>(&a.input)?;
            let v = verify_clip(&clip, &a.expected, &model, &opts)?;
            match a.format {
                Format::Json => emit(&(serde_json::to_string(&v)? + "\n"))?,
                Format::Text => emit(&format!(
                    "{}: expected {}, predicted {} ({:.0}% of {} chunks{})\n",
                    if v.is_match { "MATCH" } else { "MISMATCH" },
                    v.expected_label,
                    v.predicted_label,
                    100.0 * v.agreement_fraction,
                    v.per_chunk_votes.len(),
                    if v.tied { ", tied" } else { "" }
                ))?,
            }
            return Ok(if v.is_match { EXIT_OK } else { EXIT_MISMATCH });
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(dispatch(["asca"]), EXIT_USAGE);
        assert_eq!(dispatch(["asca", "frobnicate"]), EXIT_USAGE);
        assert_eq!(dispatch(["asca", "train", "--classifier", "knn"]), EXIT_USAGE);
        assert_eq!(dispatch(["asca", "--help"]), EXIT_OK);
    }

    #[test]
    fn domain_errors_exit_1() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("none.csv");
        let code = dispatch([
            "asca".as_ref(),
            "eval".as_ref(),
            "--model".as_ref(),
            dir.path().join("m.asca").as_os_str(),
            "--manifest".as_ref(),
            missing.as_os_str(),
        ]);
        assert_eq!(code, EXIT_ERROR);
    }
}
