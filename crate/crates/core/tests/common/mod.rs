//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's numerics: gates are dense matrices
//! built from their textbook definitions, eigenproblems use cyclic Jacobi
//! sweeps and linear systems use Gaussian elimination.

#![allow(dead_code, clippy::needless_range_loop)]

use num_complex::Complex64;
use qkscreen::qsim::Gate;

pub type CMat = Vec<Vec<Complex64>>;
pub type Mat = Vec<Vec<f64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one_qubit(m: [[Complex64; 2]; 2], q: usize, n: usize) -> CMat {
    let dim = 1 << n;
    let mut out = vec![vec![c(0.0, 0.0); dim]; dim];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if (i ^ j) & !(1 << q) == 0 {
                *v = m[(i >> q) & 1][(j >> q) & 1];
            }
        }
    }
    out
}

fn diagonal(n: usize, f: impl Fn(usize) -> Complex64) -> CMat {
    let dim = 1 << n;
    let mut out = vec![vec![c(0.0, 0.0); dim]; dim];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = f(i);
    }
    out
}

/// Full `2ⁿ × 2ⁿ` unitary of `gate`, qubit `k` on bit `k` of the index.
pub fn dense_gate(gate: &Gate, n: usize) -> CMat {
    let bit = |i: usize, q: usize| (i >> q) & 1;
    match *gate {
        Gate::H(q) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            one_qubit([[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]], q, n)
        }
        Gate::Rx(q, t) => {
            let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
            one_qubit([[c(co, 0.0), c(0.0, -si)], [c(0.0, -si), c(co, 0.0)]], q, n)
        }
        Gate::Ry(q, t) => {
            let (co, si) = ((t / 2.0).cos(), (t / 2.0).sin());
            one_qubit([[c(co, 0.0), c(-si, 0.0)], [c(si, 0.0), c(co, 0.0)]], q, n)
        }
        Gate::Rz(q, t) => one_qubit(
            [
                [Complex64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
                [c(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
            ],
            q,
            n,
        ),
        Gate::Cz(a, b) => diagonal(n, |i| {
            if bit(i, a) == 1 && bit(i, b) == 1 {
                c(-1.0, 0.0)
            } else {
                c(1.0, 0.0)
            }
        }),
        Gate::Rzz(a, b, t) => diagonal(n, |i| {
            let parity = if bit(i, a) == bit(i, b) { 1.0 } else { -1.0 };
            Complex64::from_polar(1.0, -t / 2.0 * parity)
        }),
        Gate::Cnot(ctl, tgt) => {
            let dim = 1 << n;
            let mut out = vec![vec![c(0.0, 0.0); dim]; dim];
            for j in 0..dim {
                let i = if bit(j, ctl) == 1 { j ^ (1 << tgt) } else { j };
                out[i][j] = c(1.0, 0.0);
            }
            out
        }
    }
}

pub fn mat_vec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.len();
    let mut a = a.clone();
    let mut v: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| order.iter().map(|&i| v[r][i]).collect()).collect();
    (values, vectors)
}

/// `V f(Λ) Vᵀ` for a symmetric matrix.
pub fn spectral(a: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (w, v) = jacobi_eigen(a);
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for (k, &wk) in w.iter().enumerate() {
        let fk = f(wk);
        for i in 0..n {
            for j in 0..n {
                out[i][j] += v[i][k] * fk * v[j][k];
            }
        }
    }
    out
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..p).map(|j| (0..m).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// `g = √λmax(√K_Q (K_C + λI)⁻¹ √K_Q)` from Jacobi decompositions.
pub fn geometric_difference_oracle(k_c: &Mat, k_q: &Mat, lambda: f64) -> f64 {
    let n = k_c.len();
    let mut reg = k_c.clone();
    for (i, row) in reg.iter_mut().enumerate().take(n) {
        row[i] += lambda;
    }
    let inv = spectral(&reg, |w| 1.0 / w);
    let s = spectral(k_q, |w| w.max(0.0).sqrt());
    let mut p = mat_mul(&mat_mul(&s, &inv), &s);
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (p[i][j] + p[j][i]);
            p[i][j] = m;
            p[j][i] = m;
        }
    }
    jacobi_eigen(&p).0[0].max(0.0).sqrt()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting; `None`
/// when a pivot is negligible.
pub fn solve(mut a: Mat, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Maximum of the soft-margin SVM dual by enumerating every assignment of
/// each coefficient to {0, C, free} and solving the KKT system of the free
/// set.
pub fn svm_dual_oracle(k: &Mat, y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let objective = |alpha: &[f64]| {
        let lin: f64 = alpha.iter().sum();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += alpha[i] * alpha[j] * q(i, j);
            }
        }
        lin - 0.5 * quad
    };
    let mut best = f64::NEG_INFINITY;
    let mut state = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        let feasible = if free.is_empty() {
            upper.iter().map(|&i| y[i]).sum::<f64>().abs() < 1e-12
        } else {
            let m = free.len();
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut b = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = q(i, j);
                }
                a[r][m] = y[i];
                a[m][r] = y[i];
                b[r] = 1.0 - upper.iter().map(|&j| c * q(i, j)).sum::<f64>();
            }
            b[m] = -upper.iter().map(|&j| c * y[j]).sum::<f64>();
            match solve(a, b) {
                Some(x) if x[..m].iter().all(|&v| v >= -1e-12 && v <= c + 1e-12) => {
                    for (r, &i) in free.iter().enumerate() {
                        alpha[i] = x[r].clamp(0.0, c);
                    }
                    true
                }
                _ => false,
            }
        };
        if feasible {
            best = best.max(objective(&alpha));
        }
        // next assignment in base 3
        let mut i = 0;
        while i < n && state[i] == 2 {
            state[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        state[i] += 1;
    }
    best
}
