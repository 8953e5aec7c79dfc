//! Clip-level verdict: does the recording match the commanded behaviour?

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::{chunk_clip, read_wav, AudioClip, FrameSpec};
use crate::error::{Error, Result};
use crate::features::FeatureExtractor;
use crate::filters::FilterStage;
use crate::harness::load_model;
use crate::models::{argmax, TrainedModel};
use crate::scalar::Float;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChunkVote {
    pub chunk: usize,
    pub label: String,
    pub confidence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub expected_label: String,
    pub predicted_label: String,
    pub per_chunk_votes: Vec<ChunkVote>,
    pub agreement_fraction: f64,
    /// `predicted == expected && agreement_fraction >= threshold`.
    #[serde(rename = "match")]
    pub is_match: bool,
    /// The plurality was shared; the lowest class index won.
    pub tied: bool,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub threshold: f64,
    /// Must match the filter the model's training data went through.
    pub filter: FilterStage,
    pub frame: FrameSpec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            filter: FilterStage::default(),
            frame: FrameSpec::default(),
        }
    }
}

/// Plurality winner over class votes (lowest index on ties) and whether it tied.
pub fn plurality(votes: &[usize], n_classes: usize) -> (usize, usize, bool) {
    let mut counts = vec![0; n_classes];
    for &v in votes {
        counts[v] += 1;
    }
    let best = argmax(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
    let tied = counts.iter().filter(|&&c| c == counts[best]).count() > 1;
    (best, counts[best], tied)
}

pub fn verify_clip<F: Float>(
    clip: &AudioClip<F>,
    expected_label: &str,
    model: &TrainedModel<F>,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    if !(0.0..=1.0).contains(&opts.threshold) {
        return Err(Error::InvalidConfig(format!("threshold {} outside [0, 1]", opts.threshold)));
    }
    model.label_index(expected_label)?;
    let clip = opts.filter.apply(clip)?;
    let extractor = FeatureExtractor::<F>::new(opts.frame, clip.sample_rate_hz)?;
    let mut per_chunk_votes = Vec::new();
    let mut classes = Vec::new();
    for (i, chunk) in chunk_clip(&clip)?.iter().enumerate() {
        let features = extractor.extract_chunk(chunk)?;
        let probs = model.predict(features.as_slice())?;
        let c = argmax(&probs);
        classes.push(c);
        per_chunk_votes.push(ChunkVote {
            chunk: i,
            label: model.label_names[c].clone(),
            confidence: probs[c].as_f64(),
        });
    }
    let (winner, votes, tied) = plurality(&classes, model.label_names.len());
    let agreement_fraction = votes as f64 / classes.len() as f64;
    let predicted_label = model.label_names[winner].clone();
    Ok(Verdict {
        is_match: predicted_label == expected_label && agreement_fraction >= opts.threshold,
        expected_label: expected_label.to_string(),
        predicted_label,
        per_chunk_votes,
        agreement_fraction,
        tied,
        threshold: opts.threshold,
    })
}

pub fn verify(
    audio_path: impl AsRef<Path>,
    expected_label: &str,
    model_path: impl AsRef<Path>,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    let model: TrainedModel<f64> = load_model(model_path)?;
    let clip = read_wav::<f64>(audio_path)?;
    verify_clip(&clip, expected_label, &model, opts)
}
