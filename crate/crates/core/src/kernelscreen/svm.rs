//! Soft-margin SVM on a precomputed kernel.
//!
//! Sequential minimal optimization with second-order working-set selection:
//! at each step the maximal-violating index `i` is paired with the `j` that
//! maximizes the guaranteed decrease of the dual objective, and the
//! two-variable subproblem is solved analytically with box clipping.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::KernelMatrix;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    /// Stop when the maximal KKT violation `m(α) − M(α)` drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tolerance: 1e-4,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// `α_i · y_i`; zero outside the support set.
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub support_indices: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    /// `f(x_j) = Σ_i α_i y_i K_ij + b` for every training row `j`.
    pub fn decision_values(&self, k: &DMatrix<f64>) -> Vec<f64> {
        (0..k.ncols())
            .map(|j| {
                self.dual_coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a * k[(i, j)])
                    .sum::<f64>()
                    + self.bias
            })
            .collect()
    }

    /// Dual objective `Σα − ½ Σ α_i α_j y_i y_j K_ij`.
    pub fn dual_objective(&self, k: &DMatrix<f64>) -> f64 {
        let beta = &self.dual_coefficients;
        let linear: f64 = beta.iter().map(|b| b.abs()).sum();
        let mut quad = 0.0;
        for i in 0..beta.len() {
            for j in 0..beta.len() {
                quad += beta[i] * beta[j] * k[(i, j)];
            }
        }
        linear - 0.5 * quad
    }
}

/// Trains with [`SvmConfig::default`] and the given `c`.
pub fn train_svm(k: &KernelMatrix, y: &[f64], c: f64) -> Result<SvmModel> {
    train_svm_with(&k.values, y, &SvmConfig { c, ..SvmConfig::default() })
}

pub fn train_svm_with(k: &DMatrix<f64>, y: &[f64], cfg: &SvmConfig) -> Result<SvmModel> {
    let n = y.len();
    if n == 0 {
        return Err(Error::EmptyInput("svm labels"));
    }
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: k.nrows(),
        });
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("svm kernel"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::invalid("labels must be -1 or +1"));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::SingleClass);
    }
    if !(cfg.c > 0.0) {
        return Err(Error::invalid(format!("C must be positive, got {}", cfg.c)));
    }
    let c = cfg.c;
    let q = |i: usize, j: usize| y[i] * y[j] * k[(i, j)];

    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα − eᵀα
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        let mut i_sel = None;
        let mut g_max = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= g_max {
                g_max = -y[t] * grad[t];
                i_sel = Some(t);
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                g_min = g_min.min(v);
                let b = g_max - v;
                if b > 0.0 {
                    let mut a = k[(i, i)] + k[(t, t)] - 2.0 * k[(i, t)];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj <= best {
                        best = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if g_max - g_min < cfg.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let mut quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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
            let mut quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // offset from free variables, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
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
            free_sum += yg;
            free_count += 1;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        (ub + lb) / 2.0
    };

    let dual_coefficients: Vec<f64> = alpha.iter().zip(y).map(|(a, yi)| a * yi).collect();
    let support_indices = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel {
        dual_coefficients,
        bias: -rho,
        c,
        support_indices,
        iterations,
        converged,
    })
}

/// `‖α ∘ y‖₂`, the largest singular value of the `1 × N` coefficient matrix.
pub fn model_complexity(model: &SvmModel) -> f64 {
    model.dual_coefficients.iter().map(|b| b * b).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernelscreen::KernelSource;

    fn linear_kernel(points: &[[f64; 2]]) -> DMatrix<f64> {
        DMatrix::from_fn(points.len(), points.len(), |i, j| {
            points[i][0] * points[j][0] + points[i][1] * points[j][1]
        })
    }

    #[test]
    fn two_points_are_both_support_vectors() {
        let k = linear_kernel(&[[2.0, 0.0], [-2.0, 0.0]]);
        let km = KernelMatrix::from_values(k.clone(), KernelSource::Classical).unwrap();
        let m = train_svm(&km, &[1.0, -1.0], 1.0).unwrap();
        assert_eq!(m.support_indices, vec![0, 1]);
        let f = m.decision_values(&k);
        assert!(f[0] > 0.0 && f[1] < 0.0);
        // hard-margin optimum: α = 1/8 each, f = ±1
        assert!((m.dual_coefficients[0] - 0.125).abs() < 1e-9);
        assert!((f[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn conflicting_duplicates_hit_the_bound() {
        let k = linear_kernel(&[[1.0, 1.0], [1.0, 1.0], [-1.0, -2.0]]);
        let m = train_svm_with(&k, &[1.0, -1.0, -1.0], &SvmConfig { c: 0.5, ..Default::default() }).unwrap();
        assert!((m.dual_coefficients[0] - 0.5).abs() < 1e-9);
        assert!((m.dual_coefficients[1] + 0.5).abs() < 1e-9);
        for b in &m.dual_coefficients {
            assert!(b.abs() <= 0.5 + 1e-12);
        }
        let s: f64 = m.dual_coefficients.iter().sum();
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn input_validation() {
        let k = DMatrix::identity(2, 2);
        assert!(matches!(train_svm_with(&k, &[1.0, 1.0], &SvmConfig::default()), Err(Error::SingleClass)));
        assert!(train_svm_with(&k, &[1.0, 0.0], &SvmConfig::default()).is_err());
        let mut bad = k.clone();
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(train_svm_with(&bad, &[1.0, -1.0], &SvmConfig::default()), Err(Error::NonFinite(_))));
    }

    #[test]
    fn complexity_is_euclidean_norm() {
        let m = SvmModel {
            dual_coefficients: vec![0.6, -0.8],
            bias: 0.0,
            c: 1.0,
            support_indices: vec![0, 1],
            iterations: 0,
            converged: true,
        };
        assert_eq!(model_complexity(&m), 1.0);
        let zero = SvmModel { dual_coefficients: vec![0.0; 3], ..m };
        assert_eq!(model_complexity(&zero), 0.0);
    }
}
