use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Float;

pub const SVM_C: f64 = 1.0;
pub const KKT_TOL: f64 = 1e-3;
/// Iteration cap per binary problem, in multiples of the problem size.
pub const MAX_PASSES: usize = 10_000;
const TAU: f64 = 1e-12;

/// One binary sub-problem: positive side is `class_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmPair<F = f64> {
    pub class_a: usize,
    pub class_b: usize,
    pub support: Vec<Vec<F>>,
    /// `y_i * alpha_i`, each within `[-C, C]`.
    pub coef: Vec<F>,
    pub rho: F,
}

/// One-vs-one RBF SVM.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmModel<F = f64> {
    pub gamma: F,
    pub c: F,
    pub n_features: usize,
    pub n_classes: usize,
    pub pairs: Vec<SvmPair<F>>,
    /// Non-convergence notes; the model is still usable.
    pub warnings: Vec<String>,
}

pub fn rbf<F: Float>(a: &[F], b: &[F], gamma: F) -> F {
    let d: F = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

/// `1 / (n_features * var(X))` over every value in `X`; 1 for constant data.
pub fn auto_gamma<F: Float>(x: &[Vec<F>]) -> F {
    let n_features = x.first().map_or(1, Vec::len).max(1);
    let count = F::from_usize_lossy(x.len() * n_features);
    let mean = x.iter().flatten().copied().sum::<F>() / count;
    let var = x.iter().flatten().map(|&v| (v - mean) * (v - mean)).sum::<F>() / count;
    if var > F::zero() {
        F::one() / (F::from_usize_lossy(n_features) * var)
    } else {
        F::one()
    }
}

struct Solution<F> {
    alpha: Vec<F>,
    rho: F,
    converged: bool,
    iterations: usize,
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `y'a = 0`, `0 <= a <= C` by SMO with
/// second-order working-set selection.
fn smo<F: Float>(k: &[Vec<F>], y: &[F], c: F, tol: F, max_iter: usize) -> Solution<F> {
    let n = y.len();
    let tau = F::cst(TAU);
    let mut alpha = vec![F::zero(); n];
    let mut grad = vec![-F::one(); n];
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let up = |a: F, yi: F| (yi > F::zero() && a < c) || (yi < F::zero() && a > F::zero());
    let low = |a: F, yi: F| (yi > F::zero() && a > F::zero()) || (yi < F::zero() && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = F::neg_infinity();
        let mut i = usize::MAX;
        for t in 0..n {
            if up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin = F::infinity();
        let mut j = usize::MAX;
        let mut best = F::infinity();
        for t in 0..n {
            if !low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = k[i][i] + k[t][t] - F::cst(2.0) * k[i][t];
                if a <= F::zero() {
                    a = tau;
                }
                let obj = -(b * b) / a;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (ai, aj) = (alpha[i], alpha[j]);
        let mut quad = k[i][i] + k[j][j] - F::cst(2.0) * k[i][j];
        if quad <= F::zero() {
            quad = tau;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > F::zero() {
                if alpha[j] < F::zero() {
                    alpha[j] = F::zero();
                    alpha[i] = diff;
                }
            } else if alpha[i] < F::zero() {
                alpha[i] = F::zero();
                alpha[j] = -diff;
            }
            if diff > F::zero() {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < F::zero() {
                    alpha[j] = F::zero();
                    alpha[i] = sum;
                }
                if alpha[i] < F::zero() {
                    alpha[i] = F::zero();
                    alpha[j] = sum;
                }
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // bias from free vectors, else the midpoint of the feasible interval
    let mut ub = F::infinity();
    let mut lb = F::neg_infinity();
    let mut sum_free = F::zero();
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= F::zero();
        if at_upper {
            if y[t] < F::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > F::zero() {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / F::from_usize_lossy(n_free)
    } else {
        (ub + lb) / F::cst(2.0)
    };
    Solution {
        alpha,
        rho,
        converged,
        iterations,
    }
}

impl<F: Float> SvmPair<F> {
    /// Positive means `class_a`.
    pub fn decision(&self, x: &[F], gamma: F) -> F {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, &c)| c * rbf(sv, x, gamma))
            .sum::<F>()
            - self.rho
    }
}

impl<F: Float> SvmModel<F> {
    pub fn converged(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn votes(&self, x: &[F]) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes];
        for p in &self.pairs {
            if p.decision(x, self.gamma) > F::zero() {
                votes[p.class_a] += 1;
            } else {
                votes[p.class_b] += 1;
            }
        }
        votes
    }

    /// Pairwise vote shares; argmax ties go to the lowest class index.
    pub fn predict_proba(&self, x: &[F]) -> Vec<F> {
        let total = F::from_usize_lossy(self.pairs.len().max(1));
        self.votes(x).into_iter().map(|v| F::from_usize_lossy(v) / total).collect()
    }
}

pub fn svm_fit<F: Float>(dataset: &Dataset<F>, c: f64) -> Result<SvmModel<F>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n_classes = dataset.n_classes();
    if n_classes < 2 {
        return Err(Error::InvalidConfig("svm needs at least two classes".into()));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidConfig(format!("C must be positive, got {c}")));
    }
    let gamma = auto_gamma(&dataset.x);
    let cf = F::cst(c);
    let mut pairs = Vec::new();
    let mut warnings = Vec::new();
    for a in 0..n_classes {
        for b in a + 1..n_classes {
            let rows: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.y[i] == a || dataset.y[i] == b).collect();
            let y: Vec<F> = rows.iter().map(|&i| if dataset.y[i] == a { F::one() } else { -F::one() }).collect();
            if !y.iter().any(|&v| v > F::zero()) || !y.iter().any(|&v| v < F::zero()) {
                return Err(Error::EmptyDataset);
            }
            let kmat: Vec<Vec<F>> = rows
                .iter()
                .map(|&i| rows.iter().map(|&j| rbf(&dataset.x[i], &dataset.x[j], gamma)).collect())
                .collect();
            let sol = smo(&kmat, &y, cf, F::cst(KKT_TOL), MAX_PASSES.saturating_mul(rows.len()));
            if !sol.converged {
                warnings.push(format!(
                    "pair ({a}, {b}) did not converge after {} iterations",
                    sol.iterations
                ));
            }
            let mut support = Vec::new();
            let mut coef = Vec::new();
            for (t, &al) in sol.alpha.iter().enumerate() {
                if al > F::zero() {
                    support.push(dataset.x[rows[t]].clone());
                    coef.push(y[t] * al);
                }
            }
            pairs.push(SvmPair {
                class_a: a,
                class_b: b,
                support,
                coef,
                rho: sol.rho,
            });
        }
    }
    Ok(SvmModel {
        gamma,
        c: cf,
        n_features: dataset.n_features(),
        n_classes,
        pairs,
        warnings,
    })
}
