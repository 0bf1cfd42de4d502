use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wxdata::PatchTensor;

/// Affine readout `y = [x, 1] W` fitted by ridge regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    /// `(features + 1) × targets`; the last row is the bias.
    pub weights: Vec<Vec<f64>>,
    pub ridge: f64,
}

/// Ridge regression with an unpenalized intercept: the slope block solves
/// `(XcᵀXc + λI) W = XcᵀYc` on centred data and the bias row restores the
/// means.
pub fn fit_readout(x: &DMatrix<f64>, y: &DMatrix<f64>, ridge: f64) -> Result<ReadoutModel> {
    let (n, f) = x.shape();
    if n == 0 {
        return Err(Error::EmptyInput("readout training rows"));
    }
    if y.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.nrows(),
        });
    }
    if !(ridge > 0.0) || !ridge.is_finite() {
        return Err(Error::invalid(format!("ridge must be positive and finite, got {ridge}")));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("readout training data"));
    }
    let t = y.ncols();
    let xm = x.row_mean();
    let ym = y.row_mean();
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= &xm;
    }
    let mut yc = y.clone();
    for mut row in yc.row_iter_mut() {
        row -= &ym;
    }
    let mut gram = xc.transpose() * &xc;
    for i in 0..f {
        gram[(i, i)] += ridge;
    }
    let rhs = xc.transpose() * &yc;
    let slopes = gram
        .cholesky()
        .ok_or(Error::Singular { condition: f64::INFINITY })?
        .solve(&rhs);
    let bias = &ym - &xm * &slopes;
    let mut weights: Vec<Vec<f64>> = (0..f).map(|i| slopes.row(i).iter().copied().collect()).collect();
    weights.push(bias.iter().copied().collect());
    debug_assert_eq!(weights[f].len(), t);
    Ok(ReadoutModel { weights, ridge })
}

impl ReadoutModel {
    pub fn n_features(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn n_targets(&self) -> usize {
        self.weights[0].len()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let f = self.n_features();
        if x.ncols() != f {
            return Err(Error::DimensionMismatch {
                expected: f,
                actual: x.ncols(),
            });
        }
        let t = self.n_targets();
        let w = DMatrix::from_fn(f, t, |i, j| self.weights[i][j]);
        let b = DMatrix::from_fn(1, t, |_, j| self.weights[f][j]);
        let mut out = x * w;
        for mut row in out.row_iter_mut() {
            row += &b;
        }
        Ok(out)
    }
}

pub fn predict(model: &ReadoutModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    model.predict(x)
}

/// One row per target pixel: the features of the feature-map cell covering
/// it. Cell of pixel `y` is `min(y / stride, H' − 1)`.
pub fn pixel_design(features: &PatchTensor, target_hw: (usize, usize), stride: usize) -> Result<DMatrix<f64>> {
    let [n, f, gh, gw] = features.shape();
    let (h, w) = target_hw;
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    let mut x = DMatrix::zeros(n * h * w, f);
    for i in 0..n {
        for yy in 0..h {
            let cy = (yy / stride).min(gh.saturating_sub(1));
            for xx in 0..w {
                let cx = (xx / stride).min(gw.saturating_sub(1));
                let row = (i * h + yy) * w + xx;
                for c in 0..f {
                    x[(row, c)] = features.get(i, c, cy, cx) as f64;
                }
            }
        }
    }
    Ok(x)
}

/// One row per pixel, one column per target channel.
pub fn target_matrix(targets: &PatchTensor) -> DMatrix<f64> {
    let [n, c, h, w] = targets.shape();
    DMatrix::from_fn(n * h * w, c, |row, ch| {
        let (i, rem) = (row / (h * w), row % (h * w));
        targets.get(i, ch, rem / w, rem % w) as f64
    })
}

/// Inverse of [`target_matrix`].
pub fn predictions_to_tensor(pred: &DMatrix<f64>, like: &PatchTensor) -> Result<PatchTensor> {
    let [n, c, h, w] = like.shape();
    if pred.shape() != (n * h * w, c) {
        return Err(Error::DimensionMismatch {
            expected: n * h * w * c,
            actual: pred.len(),
        });
    }
    let mut data = Vec::with_capacity(n * c * h * w);
    for i in 0..n {
        for ch in 0..c {
            for p in 0..h * w {
                data.push(pred[(i * h * w + p, ch)] as f32);
            }
        }
    }
    PatchTensor::new("prediction", [n, c, h, w], like.channels.clone(), like.units.clone(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realizable_targets_are_recovered() {
        let x = DMatrix::from_fn(30, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + (i as f64 * 0.1 * j as f64).sin());
        let y = DMatrix::from_fn(30, 2, |i, j| 2.0 * x[(i, 0)] - x[(i, 2)] * (j as f64 + 1.0) + 4.0);
        let m = fit_readout(&x, &y, 1e-8).unwrap();
        let p = m.predict(&x).unwrap();
        let mse = (&p - &y).norm_squared() / y.len() as f64;
        assert!(mse < 1e-6, "{mse}");
    }

    #[test]
    fn huge_ridge_predicts_the_mean() {
        let x = DMatrix::from_fn(10, 2, |i, j| (i + j) as f64);
        let y = DMatrix::from_fn(10, 1, |i, _| i as f64);
        let m = fit_readout(&x, &y, 1e12).unwrap();
        let p = m.predict(&x).unwrap();
        assert!(p.iter().all(|v| (v - 4.5).abs() < 1e-6));
        assert!(fit_readout(&x, &y, 0.0).is_err());
    }

    #[test]
    fn target_layout_round_trip() {
        let data: Vec<f32> = (0..2 * 3 * 4).map(|v| v as f32).collect();
        let t = PatchTensor::new("t", [2, 3, 2, 2], vec!["a".into(), "b".into(), "c".into()], vec!["-".into(); 3], data).unwrap();
        let back = predictions_to_tensor(&target_matrix(&t), &t).unwrap();
        assert_eq!(back.data(), t.data());
    }
}
