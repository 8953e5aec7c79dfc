use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::nn::{categorical_cross_entropy, dot, fit_network, one_hot, softmax, uniform_fill, FitHistory, Network, Pass};
use super::TrainConfig;
use crate::error::Result;
use crate::scalar::Float;

pub const CNN_CHANNELS: [usize; 2] = [16, 32];
pub const CNN_KERNEL: usize = 3;
pub const BN_MOMENTUM: f64 = 0.9;
pub const BN_EPS: f64 = 1e-5;

/// `conv(16, 3) -> BN -> ReLU -> maxpool(2) -> conv(32, 3) -> BN -> ReLU ->
/// global average pool -> dense softmax` over a single-channel input.
///
/// Convolutions use same padding and no bias (batch norm supplies the shift).
/// Parameter layout: `w1 [C1 x 3]`, `gamma1`, `beta1`, `w2 [C2 x C1 x 3]`,
/// `gamma2`, `beta2`, `Wd [C x C2]`, `bd [C]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CnnModel<F = f64> {
    pub length: usize,
    pub channels: [usize; 2],
    pub n_classes: usize,
    pub params: Vec<F>,
    /// Running batch-norm statistics: `mean1, var1, mean2, var2`.
    pub running: Vec<F>,
}

#[derive(Clone, Copy)]
struct Layout {
    w1: usize,
    g1: usize,
    b1: usize,
    w2: usize,
    g2: usize,
    b2: usize,
    wd: usize,
    bd: usize,
    end: usize,
}

fn layout(channels: [usize; 2], n_classes: usize) -> Layout {
    let [c1, c2] = channels;
    let w1 = 0;
    let g1 = w1 + c1 * CNN_KERNEL;
    let b1 = g1 + c1;
    let w2 = b1 + c1;
    let g2 = w2 + c2 * c1 * CNN_KERNEL;
    let b2 = g2 + c2;
    let wd = b2 + c2;
    let bd = wd + n_classes * c2;
    Layout { w1, g1, b1, w2, g2, b2, wd, bd, end: bd + n_classes }
}

/// Same-padded 1-D convolution. `input` is `[c_in][len]`, `w` is `[c_out][c_in][K]`.
fn conv<F: Float>(input: &[F], c_in: usize, len: usize, w: &[F], c_out: usize) -> Vec<F> {
    let half = CNN_KERNEL / 2;
    let mut out = vec![F::zero(); c_out * len];
    for o in 0..c_out {
        for i in 0..c_in {
            let wk = &w[(o * c_in + i) * CNN_KERNEL..(o * c_in + i + 1) * CNN_KERNEL];
            let x = &input[i * len..(i + 1) * len];
            let y = &mut out[o * len..(o + 1) * len];
            for t in 0..len {
                let mut s = F::zero();
                for (k, &wv) in wk.iter().enumerate() {
                    let pos = t + k;
                    if pos >= half && pos - half < len {
                        s += wv * x[pos - half];
                    }
                }
                y[t] += s;
            }
        }
    }
    out
}

/// Gradients of `conv` given `dy [c_out][len]`: accumulates `dw`, returns `dx`.
fn conv_backward<F: Float>(
    input: &[F],
    c_in: usize,
    len: usize,
    w: &[F],
    c_out: usize,
    dy: &[F],
    dw: &mut [F],
) -> Vec<F> {
    let half = CNN_KERNEL / 2;
    let mut dx = vec![F::zero(); c_in * len];
    for o in 0..c_out {
        let g = &dy[o * len..(o + 1) * len];
        for i in 0..c_in {
            let base = (o * c_in + i) * CNN_KERNEL;
            for k in 0..CNN_KERNEL {
                let wv = w[base + k];
                let mut acc = F::zero();
                for t in 0..len {
                    let pos = t + k;
                    if pos >= half && pos - half < len {
                        acc += g[t] * input[i * len + pos - half];
                        dx[i * len + pos - half] += wv * g[t];
                    }
                }
                dw[base + k] += acc;
            }
        }
    }
    dx
}

struct BnCache<F> {
    xhat: Vec<Vec<F>>,
    inv_std: Vec<F>,
    mean: Vec<F>,
    var: Vec<F>,
}

/// Batch normalisation over (batch, time) per channel; returns normalized-and-affine outputs.
fn bn_train<F: Float>(ys: &[Vec<F>], ch: usize, len: usize, gamma: &[F], beta: &[F]) -> (Vec<Vec<F>>, BnCache<F>) {
    let m = F::from_usize_lossy(ys.len() * len);
    let eps = F::cst(BN_EPS);
    let mut mean = vec![F::zero(); ch];
    let mut var = vec![F::zero(); ch];
    for y in ys {
        for c in 0..ch {
            mean[c] += y[c * len..(c + 1) * len].iter().copied().sum::<F>();
        }
    }
    for v in &mut mean {
        *v /= m;
    }
    for y in ys {
        for c in 0..ch {
            var[c] += y[c * len..(c + 1) * len].iter().map(|&v| (v - mean[c]) * (v - mean[c])).sum::<F>();
        }
    }
    for v in &mut var {
        *v /= m;
    }
    let inv_std: Vec<F> = var.iter().map(|&v| F::one() / (v + eps).sqrt()).collect();
    let xhat: Vec<Vec<F>> = ys
        .iter()
        .map(|y| (0..ch * len).map(|j| (y[j] - mean[j / len]) * inv_std[j / len]).collect())
        .collect();
    let out = xhat
        .iter()
        .map(|xh| (0..ch * len).map(|j| gamma[j / len] * xh[j] + beta[j / len]).collect())
        .collect();
    (out, BnCache { xhat, inv_std, mean, var })
}

fn bn_backward<F: Float>(
    da: &[Vec<F>],
    cache: &BnCache<F>,
    ch: usize,
    len: usize,
    gamma: &[F],
    dgamma: &mut [F],
    dbeta: &mut [F],
) -> Vec<Vec<F>> {
    let m = F::from_usize_lossy(da.len() * len);
    let mut sum_dxh = vec![F::zero(); ch];
    let mut sum_dxh_xh = vec![F::zero(); ch];
    for (d, xh) in da.iter().zip(&cache.xhat) {
        for j in 0..ch * len {
            let c = j / len;
            dgamma[c] += d[j] * xh[j];
            dbeta[c] += d[j];
            let dxh = d[j] * gamma[c];
            sum_dxh[c] += dxh;
            sum_dxh_xh[c] += dxh * xh[j];
        }
    }
    da.iter()
        .zip(&cache.xhat)
        .map(|(d, xh)| {
            (0..ch * len)
                .map(|j| {
                    let c = j / len;
                    let dxh = d[j] * gamma[c];
                    cache.inv_std[c] / m * (m * dxh - sum_dxh[c] - xh[j] * sum_dxh_xh[c])
                })
                .collect()
        })
        .collect()
}

fn relu<F: Float>(v: &[F]) -> Vec<F> {
    v.iter().map(|&x| x.max(F::zero())).collect()
}

/// Max over non-overlapping pairs; returns pooled values and winning source indices.
fn maxpool<F: Float>(v: &[F], ch: usize, len: usize) -> (Vec<F>, Vec<usize>) {
    let out_len = len / 2;
    let mut out = Vec::with_capacity(ch * out_len);
    let mut idx = Vec::with_capacity(ch * out_len);
    for c in 0..ch {
        for i in 0..out_len {
            let a = c * len + 2 * i;
            let j = if v[a + 1] > v[a] { a + 1 } else { a };
            out.push(v[j]);
            idx.push(j);
        }
    }
    (out, idx)
}

impl<F: Float> CnnModel<F> {
    pub fn n_params_for(channels: [usize; 2], n_classes: usize) -> usize {
        layout(channels, n_classes).end
    }

    /// Kaiming-uniform convolutions, unit gamma, zero beta, LeCun-uniform head.
    pub fn init(length: usize, channels: [usize; 2], n_classes: usize, seed: u64) -> Self {
        let lay = layout(channels, n_classes);
        let [c1, c2] = channels;
        let mut params = vec![F::zero(); lay.end];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        uniform_fill(&mut params[lay.w1..lay.g1], (6.0 / CNN_KERNEL as f64).sqrt(), &mut rng);
        uniform_fill(&mut params[lay.w2..lay.g2], (6.0 / (c1 * CNN_KERNEL) as f64).sqrt(), &mut rng);
        uniform_fill(&mut params[lay.wd..lay.bd], (3.0 / c2 as f64).sqrt(), &mut rng);
        params[lay.g1..lay.b1].fill(F::one());
        params[lay.g2..lay.b2].fill(F::one());
        let mut running = vec![F::zero(); 2 * (c1 + c2)];
        running[c1..2 * c1].fill(F::one());
        running[2 * c1 + c2..].fill(F::one());
        Self {
            length,
            channels,
            n_classes,
            params,
            running,
        }
    }

    fn lay(&self) -> Layout {
        layout(self.channels, self.n_classes)
    }

    fn head(&self, pooled: &[F]) -> Vec<F> {
        let lay = self.lay();
        let c2 = self.channels[1];
        let w = &self.params[lay.wd..lay.bd];
        let b = &self.params[lay.bd..lay.end];
        (0..self.n_classes).map(|k| dot(&w[k * c2..(k + 1) * c2], pooled) + b[k]).collect()
    }

    fn gap(&self, r2: &[F]) -> Vec<F> {
        let p = self.length / 2;
        let inv = F::one() / F::from_usize_lossy(p);
        (0..self.channels[1]).map(|c| r2[c * p..(c + 1) * p].iter().copied().sum::<F>() * inv).collect()
    }
}

impl<F: Float> Network<F> for CnnModel<F> {
    fn params(&self) -> &[F] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    fn n_inputs(&self) -> usize {
        self.length
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn loss_grad(&self, xs: &[&[F]], ys: &[usize], _dropout: Option<&mut ChaCha8Rng>) -> Pass<F> {
        let lay = self.lay();
        let [c1, c2] = self.channels;
        let len = self.length;
        let plen = len / 2;
        let p = &self.params;
        let bsz = xs.len();

        let y1: Vec<Vec<F>> = xs.iter().map(|x| conv(x, 1, len, &p[lay.w1..lay.g1], c1)).collect();
        let (a1, bn1) = bn_train(&y1, c1, len, &p[lay.g1..lay.b1], &p[lay.b1..lay.w2]);
        let pooled: Vec<(Vec<F>, Vec<usize>)> = a1.iter().map(|a| maxpool(&relu(a), c1, len)).collect();
        let y2: Vec<Vec<F>> = pooled.iter().map(|(v, _)| conv(v, c1, plen, &p[lay.w2..lay.g2], c2)).collect();
        let (a2, bn2) = bn_train(&y2, c2, plen, &p[lay.g2..lay.b2], &p[lay.b2..lay.wd]);
        let gaps: Vec<Vec<F>> = a2.iter().map(|a| self.gap(&relu(a))).collect();

        let mut grad = vec![F::zero(); p.len()];
        let inv_b = F::one() / F::from_usize_lossy(bsz);
        let mut loss = F::zero();
        let mut da2 = Vec::with_capacity(bsz);
        for n in 0..bsz {
            let probs = softmax(&self.head(&gaps[n]));
            let target = one_hot::<F>(ys[n], self.n_classes);
            loss += categorical_cross_entropy(&probs, &target);
            let mut dg = vec![F::zero(); c2];
            for k in 0..self.n_classes {
                let d = (probs[k] - target[k]) * inv_b;
                for c in 0..c2 {
                    grad[lay.wd + k * c2 + c] += d * gaps[n][c];
                    dg[c] += d * p[lay.wd + k * c2 + c];
                }
                grad[lay.bd + k] += d;
            }
            let inv_p = F::one() / F::from_usize_lossy(plen);
            da2.push(
                (0..c2 * plen)
                    .map(|j| if a2[n][j] > F::zero() { dg[j / plen] * inv_p } else { F::zero() })
                    .collect::<Vec<F>>(),
            );
        }

        let (g2, rest) = grad.split_at_mut(lay.b2);
        let dy2 = bn_backward(&da2, &bn2, c2, plen, &p[lay.g2..lay.b2], &mut g2[lay.g2..], &mut rest[..c2]);
        let mut da1 = Vec::with_capacity(bsz);
        for n in 0..bsz {
            let dpool = conv_backward(&pooled[n].0, c1, plen, &p[lay.w2..lay.g2], c2, &dy2[n], &mut grad[lay.w2..lay.g2]);
            let mut dr1 = vec![F::zero(); c1 * len];
            for (&src, &d) in pooled[n].1.iter().zip(&dpool) {
                dr1[src] += d;
            }
            for (d, &a) in dr1.iter_mut().zip(&a1[n]) {
                if a <= F::zero() {
                    *d = F::zero();
                }
            }
            da1.push(dr1);
        }
        let (g1, rest) = grad.split_at_mut(lay.b1);
        let dy1 = bn_backward(&da1, &bn1, c1, len, &p[lay.g1..lay.b1], &mut g1[lay.g1..], &mut rest[..c1]);
        for n in 0..bsz {
            conv_backward(xs[n], 1, len, &p[lay.w1..lay.g1], c1, &dy1[n], &mut grad[lay.w1..lay.g1]);
        }

        let mut aux = bn1.mean;
        aux.extend(bn1.var);
        aux.extend(bn2.mean);
        aux.extend(bn2.var);
        Pass {
            loss: loss * inv_b,
            grad,
            aux,
        }
    }

    fn absorb(&mut self, aux: &[F]) {
        let m = F::cst(BN_MOMENTUM);
        for (r, &b) in self.running.iter_mut().zip(aux) {
            *r = m * *r + (F::one() - m) * b;
        }
    }

    fn predict_proba(&self, x: &[F]) -> Vec<F> {
        let lay = self.lay();
        let [c1, c2] = self.channels;
        let len = self.length;
        let plen = len / 2;
        let p = &self.params;
        let eps = F::cst(BN_EPS);
        let (m1, rest) = self.running.split_at(c1);
        let (v1, rest) = rest.split_at(c1);
        let (m2, v2) = rest.split_at(c2);
        let norm = |y: &mut [F], l: usize, mean: &[F], var: &[F], g: &[F], b: &[F]| {
            for (j, v) in y.iter_mut().enumerate() {
                let c = j / l;
                *v = g[c] * (*v - mean[c]) / (var[c] + eps).sqrt() + b[c];
            }
        };
        let mut y1 = conv(x, 1, len, &p[lay.w1..lay.g1], c1);
        norm(&mut y1, len, m1, v1, &p[lay.g1..lay.b1], &p[lay.b1..lay.w2]);
        let (pooled, _) = maxpool(&relu(&y1), c1, len);
        let mut y2 = conv(&pooled, c1, plen, &p[lay.w2..lay.g2], c2);
        norm(&mut y2, plen, m2, v2, &p[lay.g2..lay.b2], &p[lay.b2..lay.wd]);
        softmax(&self.head(&self.gap(&relu(&y2))))
    }
}

pub fn cnn_fit<F: Float>(dataset: &Dataset<F>, config: &TrainConfig) -> Result<(CnnModel<F>, FitHistory)> {
    let net = CnnModel::init(dataset.n_features(), CNN_CHANNELS, dataset.n_classes(), config.seed);
    fit_network(net, dataset, config)
}
