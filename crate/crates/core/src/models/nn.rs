//! Shared pieces of the gradient-trained networks: the `Network` contract,
//! softmax/cross-entropy, dropout, initialisers and the Adam training loop.

use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use super::dataset::{stratified_split, Dataset};
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::scalar::Float;

/// Result of one forward/backward pass over a batch.
#[derive(Clone, Debug)]
pub struct Pass<F> {
    /// Mean loss over the batch.
    pub loss: F,
    /// Gradient of `loss` with respect to `params()`.
    pub grad: Vec<F>,
    /// Batch statistics to fold into running buffers (batch norm).
    pub aux: Vec<F>,
}

/// A differentiable classifier whose trainable weights live in one flat vector.
pub trait Network<F: Float>: Clone {
    fn params(&self) -> &[F];
    fn params_mut(&mut self) -> &mut [F];
    fn n_inputs(&self) -> usize;
    fn n_classes(&self) -> usize;

    /// Training-mode pass. Dropout masks are drawn from `dropout` when given;
    /// with `None` the pass is deterministic.
    fn loss_grad(&self, xs: &[&[F]], ys: &[usize], dropout: Option<&mut ChaCha8Rng>) -> Pass<F>;

    /// Folds batch statistics from a training pass into inference buffers.
    fn absorb(&mut self, _aux: &[F]) {}

    /// Inference-mode class probabilities.
    fn predict_proba(&self, x: &[F]) -> Vec<F>;

    /// Inference-mode mean cross-entropy.
    fn eval_loss(&self, xs: &[&[F]], ys: &[usize]) -> F {
        let total: F = xs
            .iter()
            .zip(ys)
            .map(|(x, &y)| sparse_cross_entropy(&self.predict_proba(x), y))
            .sum();
        total / F::from_usize_lossy(xs.len().max(1))
    }
}

pub(crate) fn softmax<F: Float>(logits: &[F]) -> Vec<F> {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let exps: Vec<F> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: F = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn log_clip<F: Float>(p: F) -> F {
    p.max(F::cst(1e-15)).ln()
}

/// `-ln p[label]`
pub fn sparse_cross_entropy<F: Float>(probs: &[F], label: usize) -> F {
    -log_clip(probs[label])
}

/// `-sum target * ln p`
pub fn categorical_cross_entropy<F: Float>(probs: &[F], target: &[F]) -> F {
    -probs
        .iter()
        .zip(target)
        .filter(|(_, &t)| t != F::zero())
        .map(|(&p, &t)| t * log_clip(p))
        .sum::<F>()
}

pub(crate) fn one_hot<F: Float>(label: usize, n: usize) -> Vec<F> {
    let mut v = vec![F::zero(); n];
    v[label] = F::one();
    v
}

/// Inverted-dropout mask: kept units are scaled by `1 / (1 - rate)`.
pub(crate) fn dropout_mask<F: Float>(n: usize, rate: F, rng: Option<&mut ChaCha8Rng>) -> Option<Vec<F>> {
    let rng = rng?;
    if rate <= F::zero() {
        return None;
    }
    let keep = F::one() - rate;
    let scale = F::one() / keep;
    let r = rate.as_f64();
    Some((0..n).map(|_| if rng.random::<f64>() >= r { scale } else { F::zero() }).collect())
}

/// Uniform in `[-limit, limit]`.
pub(crate) fn uniform_fill<F: Float>(out: &mut [F], limit: f64, rng: &mut ChaCha8Rng) {
    for v in out {
        *v = F::cst(rng.random_range(-limit..=limit));
    }
}

#[inline]
pub(crate) fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    let mut acc = [F::zero(); 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..a.len() {
        s += a[j] * b[j];
    }
    s
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy<F: Float>(alpha: F, x: &[F], y: &mut [F]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub(crate) fn sigmoid<F: Float>(x: F) -> F {
    F::one() / (F::one() + (-x).exp())
}

/// Per-epoch trace of a training run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub stopped_early: bool,
}

/// Mini-batch Adam with early stopping (best weights restored) and
/// learning-rate reduction on a validation-loss plateau.
pub fn fit_network<F: Float, N: Network<F>>(
    mut net: N,
    dataset: &Dataset<F>,
    config: &TrainConfig,
) -> Result<(N, FitHistory)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if dataset.n_features() != net.n_inputs() {
        return Err(Error::Shape(format!(
            "network expects {} inputs, dataset has {}",
            net.n_inputs(),
            dataset.n_features()
        )));
    }
    let (train, val) = stratified_split(dataset, config.validation_fraction, config.seed)?;
    let val_x: Vec<&[F]> = val.x.iter().map(Vec::as_slice).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);
    let mut adam = AdamState::new(net.params().len());
    let mut lr = config.learning_rate;
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut history = FitHistory {
        best_val_loss: f64::INFINITY,
        ..FitHistory::default()
    };
    let mut best = net.clone();
    let mut since_best = 0;
    let mut plateau = 0;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let xs: Vec<&[F]> = batch.iter().map(|&i| train.x[i].as_slice()).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| train.y[i]).collect();
            let pass = net.loss_grad(&xs, &ys, Some(&mut rng));
            if !pass.loss.is_finite() || pass.grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence(format!("non-finite loss at epoch {epoch}")));
            }
            epoch_loss += pass.loss.as_f64() * batch.len() as f64;
            adam_step(net.params_mut(), &pass.grad, &mut adam, F::cst(lr));
            net.absorb(&pass.aux);
        }
        let val_loss = net.eval_loss(&val_x, &val.y).as_f64();
        if !val_loss.is_finite() {
            return Err(Error::Divergence(format!("non-finite validation loss at epoch {epoch}")));
        }
        history.train_loss.push(epoch_loss / train.len() as f64);
        history.val_loss.push(val_loss);
        history.learning_rate.push(lr);

        if val_loss < history.best_val_loss {
            history.best_val_loss = val_loss;
            history.best_epoch = epoch;
            best = net.clone();
            since_best = 0;
            plateau = 0;
        } else {
            since_best += 1;
            plateau += 1;
            if plateau >= config.lr_reduce_patience {
                lr *= config.lr_reduce_factor;
                plateau = 0;
            }
            if since_best >= config.early_stop_patience {
                history.stopped_early = true;
                break;
            }
        }
    }
    Ok((best, history))
}
