//! Classifiers over chunk feature vectors.

pub mod adam;
pub mod cnn;
pub mod dataset;
pub mod lstm;
pub mod metrics;
pub mod mlp;
pub mod nn;
pub mod svm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState};
pub use cnn::{cnn_fit, CnnModel};
pub use dataset::{minmax_apply, minmax_fit, stratified_group_split, stratified_indices, stratified_split, Dataset, ScalerParams};
pub use lstm::{lstm_fit, LstmModel};
pub use metrics::EvalReport;
pub use mlp::{mlp_fit, MlpModel};
pub use nn::{FitHistory, Network};
pub use svm::{svm_fit, SvmModel, SvmPair};

use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub early_stop_patience: usize,
    pub lr_reduce_factor: f64,
    pub lr_reduce_patience: usize,
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            early_stop_patience: 5,
            lr_reduce_factor: 0.5,
            lr_reduce_patience: 3,
            validation_fraction: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.early_stop_patience == 0 || self.lr_reduce_patience == 0 {
            return bad("patience values must be positive");
        }
        if !(self.lr_reduce_factor > 0.0 && self.lr_reduce_factor < 1.0) {
            return bad("lr_reduce_factor must lie in (0, 1)");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Index of the first maximum.
pub fn argmax<F: Float>(v: &[F]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Svm,
    Dnn,
    Rnn,
    Cnn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [Self::Svm, Self::Dnn, Self::Rnn, Self::Cnn];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Svm => "svm",
            Self::Dnn => "dnn",
            Self::Rnn => "rnn",
            Self::Cnn => "cnn",
        }
    }

    pub fn tag(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(usize::from(tag).checked_sub(1)?).copied()
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Classifier<F = f64> {
    Svm(SvmModel<F>),
    Dnn(MlpModel<F>),
    Rnn(LstmModel<F>),
    Cnn(CnnModel<F>),
}

impl<F: Float> Classifier<F> {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Self::Svm(_) => ClassifierKind::Svm,
            Self::Dnn(_) => ClassifierKind::Dnn,
            Self::Rnn(_) => ClassifierKind::Rnn,
            Self::Cnn(_) => ClassifierKind::Cnn,
        }
    }

    pub fn n_inputs(&self) -> usize {
        match self {
            Self::Svm(m) => m.n_features,
            Self::Dnn(m) => m.n_inputs(),
            Self::Rnn(m) => m.n_inputs(),
            Self::Cnn(m) => m.n_inputs(),
        }
    }

    /// Class probabilities for an already scaled row.
    pub fn predict_proba(&self, x: &[F]) -> Vec<F> {
        match self {
            Self::Svm(m) => m.predict_proba(x),
            Self::Dnn(m) => m.predict_proba(x),
            Self::Rnn(m) => m.predict_proba(x),
            Self::Cnn(m) => m.predict_proba(x),
        }
    }

    /// Fits on an already scaled dataset.
    pub fn fit(kind: ClassifierKind, dataset: &Dataset<F>, config: &TrainConfig) -> Result<Self> {
        Ok(match kind {
            ClassifierKind::Svm => Self::Svm(svm_fit(dataset, svm::SVM_C)?),
            ClassifierKind::Dnn => Self::Dnn(mlp_fit(dataset, config)?.0),
            ClassifierKind::Rnn => Self::Rnn(lstm_fit(dataset, config)?.0),
            ClassifierKind::Cnn => Self::Cnn(cnn_fit(dataset, config)?.0),
        })
    }
}

/// A classifier bundled with the scaler fitted on its training rows.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel<F = f64> {
    pub scaler: ScalerParams<F>,
    pub label_names: Vec<String>,
    pub classifier: Classifier<F>,
}

impl<F: Float> TrainedModel<F> {
    /// Fits the scaler on `train`, then the classifier on the scaled rows.
    pub fn fit(kind: ClassifierKind, train: &Dataset<F>, config: &TrainConfig) -> Result<Self> {
        let scaler = minmax_fit(&train.x)?;
        let scaled = train.map_x(|r| scaler.apply_row(r));
        let classifier = Classifier::fit(kind, &scaled, config)?;
        Ok(Self {
            scaler,
            label_names: train.label_names.clone(),
            classifier,
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        self.classifier.kind()
    }

    /// Probabilities for an unscaled feature row.
    pub fn predict(&self, x: &[F]) -> Result<Vec<F>> {
        if x.len() != self.scaler.dim() || x.len() != self.classifier.n_inputs() {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.classifier.n_inputs(),
                x.len()
            )));
        }
        Ok(self.classifier.predict_proba(&self.scaler.apply_row(x)))
    }

    pub fn predict_class(&self, x: &[F]) -> Result<usize> {
        self.predict(x).map(|p| argmax(&p))
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.label_names
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Label(format!("'{label}' is not one of {:?}", self.label_names)))
    }

    pub fn evaluate(&self, dataset: &Dataset<F>) -> Result<EvalReport> {
        evaluate(self, dataset)
    }
}

/// Confusion matrix and per-class metrics on unscaled rows.
pub fn evaluate<F: Float>(model: &TrainedModel<F>, dataset: &Dataset<F>) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.label_names != model.label_names {
        return Err(Error::Label(format!(
            "dataset labels {:?} differ from model labels {:?}",
            dataset.label_names, model.label_names
        )));
    }
    let predicted = dataset.x.iter().map(|r| model.predict_class(r)).collect::<Result<Vec<_>>>()?;
    EvalReport::from_predictions(&dataset.y, &predicted, model.label_names.clone())
}
