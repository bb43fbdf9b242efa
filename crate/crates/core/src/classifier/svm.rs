//! Soft-margin linear SVM trained by SMO on the dual with second-order
//! working-set selection (Fan, Chen and Lin, JMLR 2005).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpca::RealFeatureMatrix;

pub const DEFAULT_C: f64 = 1.0;

/// Required relative duality gap at convergence.
pub const GAP_TOL: f64 = 1e-6;

const TAU: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub regularization_c: f64,
}

/// Solver diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SvmFit {
    pub model: LinearSvmModel,
    pub alpha: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    pub iterations: usize,
}

impl LinearSvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// `+1` when the decision value is `>= 0`, else `-1`.
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        if self.decision(x) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn predict(&self, features: &RealFeatureMatrix) -> Result<Vec<f64>> {
        if features.cols != self.weights.len() {
            return Err(Error::Shape(format!(
                "features have {} columns, model has {} weights",
                features.cols,
                self.weights.len()
            )));
        }
        Ok(features.iter_rows().map(|x| self.predict_one(x)).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn svm_fit(features: &RealFeatureMatrix, labels: &[f64], c: f64) -> Result<LinearSvmModel> {
    svm_fit_detailed(features, labels, c).map(|f| f.model)
}

pub fn svm_fit_detailed(features: &RealFeatureMatrix, labels: &[f64], c: f64) -> Result<SvmFit> {
    let m = features.rows;
    if labels.len() != m {
        return Err(Error::Shape(format!("{m} feature rows but {} labels", labels.len())));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Parameter(format!("regularization C = {c} must be positive")));
    }
    if let Some(l) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
        return Err(Error::Validation(format!("labels must be +1 or -1, found {l}")));
    }
    let pos = labels.iter().filter(|&&l| l > 0.0).count();
    if pos == 0 || pos == m {
        return Err(Error::DegenerateTraining(format!(
            "training set needs both classes ({pos} positive of {m})"
        )));
    }

    let y = labels;
    let kernel: Vec<f64> = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| dot(features.row(i), features.row(j)))
        .collect();
    let k = |i: usize, j: usize| kernel[i * m + j];

    let mut alpha = vec![0.0; m];
    let mut grad = vec![-1.0; m];
    let mut iterations = 0usize;
    let max_iterations = 10_000_000usize.max(1000 * m);
    let mut eps = 1e-3;

    loop {
        // SMO sweep to the current stopping tolerance
        loop {
            let in_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
            let in_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);

            let mut i = usize::MAX;
            let mut gmax = f64::NEG_INFINITY;
            for t in 0..m {
                if in_up(t, &alpha) && -y[t] * grad[t] > gmax {
                    gmax = -y[t] * grad[t];
                    i = t;
                }
            }
            let mut j = usize::MAX;
            let mut gmin = f64::INFINITY;
            let mut best = f64::INFINITY;
            for t in 0..m {
                if !in_low(t, &alpha) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                if i != usize::MAX {
                    let b = gmax - v;
                    if b > 0.0 {
                        let mut a = k(i, i) + k(t, t) - 2.0 * k(i, t);
                        if a <= 0.0 {
                            a = TAU;
                        }
                        let obj = -(b * b) / a;
                        if obj < best {
                            best = obj;
                            j = t;
                        }
                    }
                }
            }
            if i == usize::MAX || j == usize::MAX || gmax - gmin < eps {
                break;
            }
            iterations += 1;
            if iterations > max_iterations {
                return Err(Error::Numerical(format!("SMO did not converge in {max_iterations} iterations")));
            }

            let (old_ai, old_aj) = (alpha[i], alpha[j]);
            let mut quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
            if y[i] != y[j] {
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
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
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (dai, daj) = (alpha[i] - old_ai, alpha[j] - old_aj);
            for t in 0..m {
                grad[t] += y[t] * (y[i] * k(t, i) * dai + y[j] * k(t, j) * daj);
            }
        }

        let fit = assemble(features, y, c, &alpha, &grad, iterations);
        let gap = fit.primal - fit.dual;
        if gap <= GAP_TOL * fit.primal.abs().max(1.0) {
            return Ok(fit);
        }
        if eps < 1e-14 {
            return Err(Error::Numerical(format!(
                "SMO stalled with duality gap {gap:e} (primal {}, dual {})",
                fit.primal, fit.dual
            )));
        }
        eps /= 10.0;
    }
}

fn assemble(features: &RealFeatureMatrix, y: &[f64], c: f64, alpha: &[f64], grad: &[f64], iterations: usize) -> SvmFit {
    let m = features.rows;
    let mut w = vec![0.0; features.cols];
    for (t, x) in features.iter_rows().enumerate() {
        let s = alpha[t] * y[t];
        if s != 0.0 {
            for (wk, xk) in w.iter_mut().zip(x) {
                *wk += s * xk;
            }
        }
    }

    // rho as in LIBSVM: average over free vectors, else the midpoint of the feasible interval
    let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..m {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { (ub + lb) / 2.0 };
    let bias = -rho;

    let ww = dot(&w, &w);
    let hinge: f64 = features
        .iter_rows()
        .zip(y)
        .map(|(x, &yt)| (1.0 - yt * (dot(&w, x) + bias)).max(0.0))
        .sum();
    let primal = 0.5 * ww + c * hinge;
    let dual = alpha.iter().sum::<f64>() - 0.5 * ww;
    SvmFit {
        model: LinearSvmModel { weights: w, bias, regularization_c: c },
        alpha: alpha.to_vec(),
        primal,
        dual,
        iterations,
    }
}
