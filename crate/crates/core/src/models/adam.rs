use crate::scalar::Float;

/// Bias-corrected first/second moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<F = f64> {
    pub m: Vec<F>,
    pub v: Vec<F>,
    pub t: u64,
    pub beta1: F,
    pub beta2: F,
    pub eps: F,
}

impl<F: Float> AdamState<F> {
    pub fn new(n_params: usize) -> Self {
        Self {
            m: vec![F::zero(); n_params],
            v: vec![F::zero(); n_params],
            t: 0,
            beta1: F::cst(0.9),
            beta2: F::cst(0.999),
            eps: F::cst(1e-8),
        }
    }
}

pub fn adam_step<F: Float>(params: &mut [F], grads: &[F], state: &mut AdamState<F>, lr: F) {
    assert_eq!(params.len(), grads.len(), "parameter/gradient length mismatch");
    assert_eq!(params.len(), state.m.len(), "optimizer state length mismatch");
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = F::one() - b1.powi(t);
    let c2 = F::one() - b2.powi(t);
    for ((p, &g), (m, v)) in params.iter_mut().zip(grads).zip(state.m.iter_mut().zip(state.v.iter_mut())) {
        *m = b1 * *m + (F::one() - b1) * g;
        *v = b2 * *v + (F::one() - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + state.eps);
    }
}
