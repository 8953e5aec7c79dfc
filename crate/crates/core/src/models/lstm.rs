use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::nn::{
    axpy, dot, dropout_mask, fit_network, sigmoid, softmax, sparse_cross_entropy, uniform_fill,
    FitHistory, Network, Pass,
};
use super::TrainConfig;
use crate::error::Result;
use crate::scalar::Float;

pub const LSTM_UNITS: [usize; 2] = [64, 32];
pub const LSTM_DROPOUT: f64 = 0.2;
pub const FORGET_BIAS: f64 = 1.0;

/// Two stacked LSTM layers over a feature vector read as a sequence of
/// scalars (`timesteps = n_inputs`, one feature per step), then a dense
/// softmax head on the last hidden state.
///
/// Gate blocks are ordered input, forget, cell, output. Parameter layout:
/// `W1 [4H1 x (1 + H1)]`, `b1 [4H1]`, `W2 [4H2 x (H1 + H2)]`, `b2 [4H2]`,
/// `Wd [C x H2]`, `bd [C]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmModel<F = f64> {
    pub timesteps: usize,
    pub units: [usize; 2],
    pub n_classes: usize,
    pub dropout: F,
    pub params: Vec<F>,
}

#[derive(Clone, Copy)]
struct LayerShape {
    w: usize,
    b: usize,
    n_in: usize,
    hidden: usize,
}

impl LayerShape {
    fn width(&self) -> usize {
        self.n_in + self.hidden
    }
    fn w_len(&self) -> usize {
        4 * self.hidden * self.width()
    }
}

struct LayerTrace<F> {
    /// Post-nonlinearity gate values `[i, f, g, o]` per step.
    gates: Vec<Vec<F>>,
    cell: Vec<Vec<F>>,
    tanh_cell: Vec<Vec<F>>,
    hidden: Vec<Vec<F>>,
}

impl<F: Float> LstmModel<F> {
    fn shapes(&self) -> (LayerShape, LayerShape, usize) {
        let [h1, h2] = self.units;
        let l1 = LayerShape { w: 0, b: 4 * h1 * (1 + h1), n_in: 1, hidden: h1 };
        let l1_end = l1.b + 4 * h1;
        let l2 = LayerShape { w: l1_end, b: l1_end + 4 * h2 * (h1 + h2), n_in: h1, hidden: h2 };
        (l1, l2, l2.b + 4 * h2)
    }

    pub fn n_params_for(units: [usize; 2], n_classes: usize) -> usize {
        let [h1, h2] = units;
        4 * h1 * (1 + h1) + 4 * h1 + 4 * h2 * (h1 + h2) + 4 * h2 + n_classes * h2 + n_classes
    }

    /// Uniform `±1/sqrt(H)` weights, zero biases except the forget gate.
    pub fn init(timesteps: usize, units: [usize; 2], n_classes: usize, dropout: F, seed: u64) -> Self {
        let mut m = Self {
            timesteps,
            units,
            n_classes,
            dropout,
            params: vec![F::zero(); Self::n_params_for(units, n_classes)],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let (l1, l2, dense) = m.shapes();
        for l in [l1, l2] {
            let lim = 1.0 / (l.hidden as f64).sqrt();
            uniform_fill(&mut m.params[l.w..l.w + l.w_len()], lim, &mut rng);
            for v in &mut m.params[l.b + l.hidden..l.b + 2 * l.hidden] {
                *v = F::cst(FORGET_BIAS);
            }
        }
        let h2 = units[1];
        uniform_fill(&mut m.params[dense..dense + n_classes * h2], (3.0 / h2 as f64).sqrt(), &mut rng);
        m
    }

    fn layer_forward(&self, l: LayerShape, xs: &[Vec<F>]) -> LayerTrace<F> {
        let h = l.hidden;
        let width = l.width();
        let w = &self.params[l.w..l.w + l.w_len()];
        let b = &self.params[l.b..l.b + 4 * h];
        let mut trace = LayerTrace {
            gates: Vec::with_capacity(xs.len()),
            cell: Vec::with_capacity(xs.len()),
            tanh_cell: Vec::with_capacity(xs.len()),
            hidden: Vec::with_capacity(xs.len()),
        };
        let mut u = vec![F::zero(); width];
        let mut c_prev = vec![F::zero(); h];
        for x in xs {
            u[..l.n_in].copy_from_slice(x);
            let mut a: Vec<F> = (0..4 * h).map(|r| dot(&w[r * width..(r + 1) * width], &u) + b[r]).collect();
            for (r, v) in a.iter_mut().enumerate() {
                *v = if (2 * h..3 * h).contains(&r) { v.tanh() } else { sigmoid(*v) };
            }
            let c: Vec<F> = (0..h).map(|k| a[h + k] * c_prev[k] + a[k] * a[2 * h + k]).collect();
            let tc: Vec<F> = c.iter().map(|v| v.tanh()).collect();
            let hid: Vec<F> = (0..h).map(|k| a[3 * h + k] * tc[k]).collect();
            u[l.n_in..].copy_from_slice(&hid);
            c_prev.clone_from(&c);
            trace.gates.push(a);
            trace.cell.push(c);
            trace.tanh_cell.push(tc);
            trace.hidden.push(hid);
        }
        trace
    }

    /// Backpropagation through time; accumulates into `grad`, returns input gradients.
    fn layer_backward(
        &self,
        l: LayerShape,
        xs: &[Vec<F>],
        trace: &LayerTrace<F>,
        dh_out: &[Vec<F>],
        grad: &mut [F],
    ) -> Vec<Vec<F>> {
        let h = l.hidden;
        let width = l.width();
        let w = &self.params[l.w..l.w + l.w_len()];
        let steps = xs.len();
        let mut dxs = vec![Vec::new(); steps];
        let mut dh_next = vec![F::zero(); h];
        let mut dc_next = vec![F::zero(); h];
        let mut dz = vec![F::zero(); 4 * h];
        let mut u = vec![F::zero(); width];
        let zeros = vec![F::zero(); h];
        for t in (0..steps).rev() {
            let a = &trace.gates[t];
            let tc = &trace.tanh_cell[t];
            let c_prev = if t > 0 { &trace.cell[t - 1] } else { &zeros };
            for k in 0..h {
                let (i, f, g, o) = (a[k], a[h + k], a[2 * h + k], a[3 * h + k]);
                let dh = dh_out[t][k] + dh_next[k];
                let d_o = dh * tc[k];
                let dc = dh * o * (F::one() - tc[k] * tc[k]) + dc_next[k];
                dz[k] = dc * g * i * (F::one() - i);
                dz[h + k] = dc * c_prev[k] * f * (F::one() - f);
                dz[2 * h + k] = dc * i * (F::one() - g * g);
                dz[3 * h + k] = d_o * o * (F::one() - o);
                dc_next[k] = dc * f;
            }
            u[..l.n_in].copy_from_slice(&xs[t]);
            if t > 0 {
                u[l.n_in..].copy_from_slice(&trace.hidden[t - 1]);
            } else {
                u[l.n_in..].fill(F::zero());
            }
            let mut du = vec![F::zero(); width];
            for r in 0..4 * h {
                axpy(dz[r], &u, &mut grad[l.w + r * width..l.w + (r + 1) * width]);
                grad[l.b + r] += dz[r];
                axpy(dz[r], &w[r * width..(r + 1) * width], &mut du);
            }
            dh_next.copy_from_slice(&du[l.n_in..]);
            du.truncate(l.n_in);
            dxs[t] = du;
        }
        dxs
    }

    fn dense(&self, input: &[F]) -> Vec<F> {
        let (_, _, off) = self.shapes();
        let h2 = self.units[1];
        let w = &self.params[off..off + self.n_classes * h2];
        let b = &self.params[off + self.n_classes * h2..];
        (0..self.n_classes).map(|c| dot(&w[c * h2..(c + 1) * h2], input) + b[c]).collect()
    }

    /// Forget-gate activations of the first layer at step 0 for input `x0`.
    pub fn first_forget_gate(&self, x0: F) -> Vec<F> {
        let (l1, _, _) = self.shapes();
        let t = self.layer_forward(l1, &[vec![x0]]);
        t.gates[0][l1.hidden..2 * l1.hidden].to_vec()
    }
}

fn apply_mask<F: Float>(v: &mut [F], mask: &Option<Vec<F>>) {
    if let Some(m) = mask {
        for (x, &k) in v.iter_mut().zip(m) {
            *x *= k;
        }
    }
}

impl<F: Float> Network<F> for LstmModel<F> {
    fn params(&self) -> &[F] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    fn n_inputs(&self) -> usize {
        self.timesteps
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn loss_grad(&self, xs: &[&[F]], ys: &[usize], mut dropout: Option<&mut ChaCha8Rng>) -> Pass<F> {
        let (l1, l2, dense_off) = self.shapes();
        let [h1, h2] = self.units;
        let c = self.n_classes;
        let mut grad = vec![F::zero(); self.params.len()];
        let mut loss = F::zero();
        let inv_b = F::one() / F::from_usize_lossy(xs.len());

        for (x, &y) in xs.iter().zip(ys) {
            let seq: Vec<Vec<F>> = x.iter().map(|&v| vec![v]).collect();
            let t1 = self.layer_forward(l1, &seq);
            let masks1: Vec<Option<Vec<F>>> = (0..seq.len())
                .map(|_| dropout_mask(h1, self.dropout, dropout.as_deref_mut()))
                .collect();
            let seq2: Vec<Vec<F>> = t1
                .hidden
                .iter()
                .zip(&masks1)
                .map(|(hv, m)| {
                    let mut v = hv.clone();
                    apply_mask(&mut v, m);
                    v
                })
                .collect();
            let t2 = self.layer_forward(l2, &seq2);
            let mask2 = dropout_mask(h2, self.dropout, dropout.as_deref_mut());
            let mut last = t2.hidden.last().unwrap().clone();
            apply_mask(&mut last, &mask2);
            let probs = softmax(&self.dense(&last));
            loss += sparse_cross_entropy(&probs, y);

            let mut dlogits = probs;
            dlogits[y] -= F::one();
            let wd = &self.params[dense_off..dense_off + c * h2];
            let mut dlast = vec![F::zero(); h2];
            for k in 0..c {
                let d = dlogits[k] * inv_b;
                axpy(d, &last, &mut grad[dense_off + k * h2..dense_off + (k + 1) * h2]);
                grad[dense_off + c * h2 + k] += d;
                axpy(d, &wd[k * h2..(k + 1) * h2], &mut dlast);
            }
            apply_mask(&mut dlast, &mask2);
            let mut dh2 = vec![vec![F::zero(); h2]; seq.len()];
            *dh2.last_mut().unwrap() = dlast;
            let mut dseq2 = self.layer_backward(l2, &seq2, &t2, &dh2, &mut grad);
            for (d, m) in dseq2.iter_mut().zip(&masks1) {
                apply_mask(d, m);
            }
            self.layer_backward(l1, &seq, &t1, &dseq2, &mut grad);
        }
        Pass {
            loss: loss * inv_b,
            grad,
            aux: Vec::new(),
        }
    }

    fn predict_proba(&self, x: &[F]) -> Vec<F> {
        let (l1, l2, _) = self.shapes();
        let seq: Vec<Vec<F>> = x.iter().map(|&v| vec![v]).collect();
        let t1 = self.layer_forward(l1, &seq);
        let t2 = self.layer_forward(l2, &t1.hidden);
        softmax(&self.dense(t2.hidden.last().unwrap()))
    }
}

pub fn lstm_fit<F: Float>(dataset: &Dataset<F>, config: &TrainConfig) -> Result<(LstmModel<F>, FitHistory)> {
    let net = LstmModel::init(
        dataset.n_features(),
        LSTM_UNITS,
        dataset.n_classes(),
        F::cst(LSTM_DROPOUT),
        config.seed,
    );
    fit_network(net, dataset, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::nn::testing::max_grad_error;
    use rand::Rng;

    #[test]
    fn forget_bias_carries_state() {
        let m = LstmModel::<f64>::init(27, LSTM_UNITS, 7, 0.2, 3);
        let f = m.first_forget_gate(0.0);
        assert!(f.iter().all(|&v| (v - sigmoid(1.0)).abs() < 1e-12 && v > 0.5));
    }

    #[test]
    fn bptt_matches_finite_differences() {
        let m = LstmModel::<f64>::init(12, [8, 6], 3, 0.2, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<Vec<f64>> = (0..3).map(|_| (0..12).map(|_| rng.random::<f64>()).collect()).collect();
        let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
        let err = max_grad_error(&m, &refs, &[0, 2, 1], 0..m.params.len(), 1e-5);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn constant_levels_learned() {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let jitter = (i as f64 * 0.618).fract() * 0.05;
            x.push(vec![0.1 + jitter; 27]);
            y.push(0);
            x.push(vec![0.9 - jitter; 27]);
            y.push(1);
        }
        let d = Dataset::new(x, y, vec!["lo".into(), "hi".into()]).unwrap();
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let (m, _) = lstm_fit(&d, &cfg).unwrap();
        let correct = d.x.iter().zip(&d.y).filter(|(r, &c)| crate::models::argmax(&m.predict_proba(r)) == c).count();
        assert_eq!(correct, d.len());
    }

    #[test]
    fn probabilities_normalized() {
        let m = LstmModel::<f64>::init(27, LSTM_UNITS, 7, 0.2, 1);
        let p = m.predict_proba(&[0.5; 27]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }
}
