use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::meta::{LabelKind, RecordingMeta};
use crate::audio::{chunk_clip, read_wav, FrameSpec};
use crate::error::{Error, Result};
use crate::features::FeatureExtractor;
use crate::filters::FilterStage;
use crate::models::Dataset;
use crate::scalar::Float;
use crate::synth::label_names;

/// One manifest line; `path` is relative to the manifest's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: String,
    pub label_kind: LabelKind,
    pub label: String,
    pub speed_mm_s: f64,
    pub move_distance_mm: f64,
    pub mic_distance_cm: f64,
    pub seed: Option<u64>,
}

impl ManifestRow {
    pub fn meta(&self) -> RecordingMeta {
        RecordingMeta {
            label_kind: self.label_kind,
            label: self.label.clone(),
            speed_mm_s: self.speed_mm_s,
            move_distance_mm: self.move_distance_mm,
            mic_distance_cm: self.mic_distance_cm,
            seed: self.seed,
        }
    }
}

pub fn write_manifest(path: impl AsRef<Path>, rows: &[ManifestRow]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Parses the manifest text only; audio is not touched.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .enumerate()
        .map(|(row, r)| {
            r.map_err(|e| match e.kind() {
                csv::ErrorKind::Deserialize { .. } if e.to_string().contains("label_kind") => {
                    Error::Label(format!("row {row}: {e}"))
                }
                _ => Error::Ingest {
                    row,
                    message: e.to_string(),
                },
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IngestOptions {
    pub filter: FilterStage,
    pub frame: FrameSpec,
}

/// Reads, filters, chunks and featurizes every file in a manifest; one row
/// per one-second chunk. Files are processed in parallel, rows come back in
/// manifest order.
pub fn load_manifest_with<F: Float>(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<Dataset<F>> {
    let path = path.as_ref();
    let rows = read_manifest(path)?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let kind = rows[0].label_kind;
    let names = label_names(kind);
    let mut labels = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.label_kind != kind {
            return Err(Error::Label(format!("row {i}: mixes {} and {} labels", kind, row.label_kind)));
        }
        row.meta().validate().map_err(|e| match e {
            Error::Label(m) => Error::Label(format!("row {i}: {m}")),
            other => Error::Ingest {
                row: i,
                message: other.to_string(),
            },
        })?;
        labels.push(names.iter().position(|n| *n == row.label).expect("validated label"));
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let features = ingest_files(&rows, &base, opts)?;

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut meta = Vec::new();
    let mut groups = Vec::new();
    for (i, file_rows) in features.into_iter().enumerate() {
        for r in file_rows {
            x.push(r);
            y.push(labels[i]);
            meta.push(rows[i].meta());
            groups.push(i);
        }
    }
    let mut ds = Dataset::new(x, y, names.iter().map(|s| s.to_string()).collect())?;
    ds.meta = Some(meta);
    ds.groups = Some(groups);
    Ok(ds)
}

pub fn load_manifest<F: Float>(path: impl AsRef<Path>) -> Result<Dataset<F>> {
    load_manifest_with(path, &IngestOptions::default())
}

fn ingest_one<F: Float>(path: &Path, extractor: &FeatureExtractor<F>, opts: &IngestOptions) -> Result<Vec<Vec<F>>> {
    let clip = read_wav::<F>(path)?;
    if clip.sample_rate_hz != extractor.sample_rate_hz() {
        return Err(Error::UnsupportedFormat(format!(
            "sample rate {} Hz differs from the first file's {} Hz",
            clip.sample_rate_hz,
            extractor.sample_rate_hz()
        )));
    }
    let clip = opts.filter.apply(&clip)?;
    chunk_clip(&clip)?
        .iter()
        .map(|c| extractor.extract_chunk(c).map(|v| v.as_slice().to_vec()))
        .collect()
}

fn ingest_files<F: Float>(rows: &[ManifestRow], base: &Path, opts: &IngestOptions) -> Result<Vec<Vec<Vec<F>>>> {
    let paths: Vec<PathBuf> = rows.iter().map(|r| base.join(&r.path)).collect();
    let row_err = |row: usize, e: Error| Error::Ingest {
        row,
        message: format!("{}: {e}", paths[row].display()),
    };
    // the first file fixes the sample rate for the extractor
    let first = crate::audio::read_wav::<F>(&paths[0]).map_err(|e| row_err(0, e))?;
    let extractor = FeatureExtractor::new(opts.frame, first.sample_rate_hz).map_err(|e| row_err(0, e))?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(paths.len());
    let mut out: Vec<Option<Result<Vec<Vec<F>>>>> = (0..paths.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (paths, extractor) = (&paths, &extractor);
                s.spawn(move || {
                    (w..paths.len())
                        .step_by(workers)
                        .map(|i| (i, ingest_one(&paths[i], extractor, opts)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("ingest worker panicked") {
                out[i] = Some(r);
            }
        }
    });
    out.into_iter()
        .enumerate()
        .map(|(i, r)| r.expect("every row visited").map_err(|e| row_err(i, e)))
        .collect()
}
