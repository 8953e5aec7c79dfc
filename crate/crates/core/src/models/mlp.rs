use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::nn::{axpy, dot, dropout_mask, fit_network, softmax, uniform_fill, FitHistory, Network, Pass};
use super::TrainConfig;
use crate::error::Result;
use crate::scalar::Float;

pub const MLP_HIDDEN: [usize; 2] = [128, 64];
pub const MLP_DROPOUT: f64 = 0.3;

/// Dense ReLU network with a softmax head. Each layer stores `W [out x in]`
/// row-major followed by `b [out]` in one flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel<F = f64> {
    /// Layer widths from input to output, e.g. `[27, 128, 64, 7]`.
    pub sizes: Vec<usize>,
    pub dropout: F,
    pub params: Vec<F>,
}

impl<F: Float> MlpModel<F> {
    pub fn n_params_for(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// All-zero weights; outputs a uniform distribution.
    pub fn zeros(sizes: Vec<usize>, dropout: F) -> Self {
        let n = Self::n_params_for(&sizes);
        Self {
            sizes,
            dropout,
            params: vec![F::zero(); n],
        }
    }

    /// Kaiming-uniform hidden layers, LeCun-uniform output layer, zero biases.
    pub fn init(sizes: Vec<usize>, dropout: F, seed: u64) -> Self {
        let mut m = Self::zeros(sizes, dropout);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let n_layers = m.sizes.len() - 1;
        let mut off = 0;
        for l in 0..n_layers {
            let (fan_in, fan_out) = (m.sizes[l], m.sizes[l + 1]);
            let gain = if l + 1 == n_layers { 3.0 } else { 6.0 };
            uniform_fill(&mut m.params[off..off + fan_in * fan_out], (gain / fan_in as f64).sqrt(), &mut rng);
            off += fan_in * fan_out + fan_out;
        }
        m
    }

    fn layer(&self, l: usize) -> (usize, usize, usize) {
        let off: usize = self.sizes[..l + 1]
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum();
        (off, self.sizes[l], self.sizes[l + 1])
    }

    fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    fn affine(&self, l: usize, input: &[F]) -> Vec<F> {
        let (off, n_in, n_out) = self.layer(l);
        let w = &self.params[off..off + n_in * n_out];
        let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
        (0..n_out).map(|o| dot(&w[o * n_in..(o + 1) * n_in], input) + b[o]).collect()
    }
}

struct Trace<F> {
    /// Input to each layer (post-activation, post-dropout).
    inputs: Vec<Vec<F>>,
    /// Pre-activations of hidden layers.
    pre: Vec<Vec<F>>,
    masks: Vec<Option<Vec<F>>>,
    probs: Vec<F>,
}

impl<F: Float> MlpModel<F> {
    fn forward(&self, x: &[F], mut rng: Option<&mut ChaCha8Rng>) -> Trace<F> {
        let mut inputs = vec![x.to_vec()];
        let mut pre = Vec::new();
        let mut masks = Vec::new();
        for l in 0..self.n_layers() - 1 {
            let z = self.affine(l, inputs.last().unwrap());
            let mut h: Vec<F> = z.iter().map(|&v| v.max(F::zero())).collect();
            let mask = dropout_mask(h.len(), self.dropout, rng.as_deref_mut());
            if let Some(m) = &mask {
                for (v, &k) in h.iter_mut().zip(m) {
                    *v *= k;
                }
            }
            pre.push(z);
            masks.push(mask);
            inputs.push(h);
        }
        let logits = self.affine(self.n_layers() - 1, inputs.last().unwrap());
        Trace {
            inputs,
            pre,
            masks,
            probs: softmax(&logits),
        }
    }
}

impl<F: Float> Network<F> for MlpModel<F> {
    fn params(&self) -> &[F] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    fn n_inputs(&self) -> usize {
        self.sizes[0]
    }

    fn n_classes(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn loss_grad(&self, xs: &[&[F]], ys: &[usize], mut dropout: Option<&mut ChaCha8Rng>) -> Pass<F> {
        let mut grad = vec![F::zero(); self.params.len()];
        let mut loss = F::zero();
        let inv_b = F::one() / F::from_usize_lossy(xs.len());
        for (x, &y) in xs.iter().zip(ys) {
            let t = self.forward(x, dropout.as_deref_mut());
            loss += super::nn::sparse_cross_entropy(&t.probs, y);
            // d loss / d logits
            let mut delta: Vec<F> = t.probs.clone();
            delta[y] -= F::one();
            for d in &mut delta {
                *d *= inv_b;
            }
            for l in (0..self.n_layers()).rev() {
                let (off, n_in, n_out) = self.layer(l);
                let input = &t.inputs[l];
                for o in 0..n_out {
                    axpy(delta[o], input, &mut grad[off + o * n_in..off + (o + 1) * n_in]);
                    grad[off + n_in * n_out + o] += delta[o];
                }
                if l == 0 {
                    break;
                }
                let w = &self.params[off..off + n_in * n_out];
                let mut back = vec![F::zero(); n_in];
                for o in 0..n_out {
                    axpy(delta[o], &w[o * n_in..(o + 1) * n_in], &mut back);
                }
                let z = &t.pre[l - 1];
                if let Some(m) = &t.masks[l - 1] {
                    for (b, &k) in back.iter_mut().zip(m) {
                        *b *= k;
                    }
                }
                for (b, &zv) in back.iter_mut().zip(z) {
                    if zv <= F::zero() {
                        *b = F::zero();
                    }
                }
                delta = back;
            }
        }
        Pass {
            loss: loss * inv_b,
            grad,
            aux: Vec::new(),
        }
    }

    fn predict_proba(&self, x: &[F]) -> Vec<F> {
        self.forward(x, None).probs
    }
}

pub fn mlp_fit<F: Float>(dataset: &Dataset<F>, config: &TrainConfig) -> Result<(MlpModel<F>, FitHistory)> {
    let mut sizes = vec![dataset.n_features()];
    sizes.extend(MLP_HIDDEN);
    sizes.push(dataset.n_classes());
    let net = MlpModel::init(sizes, F::cst(MLP_DROPOUT), config.seed);
    fit_network(net, dataset, config)
}
