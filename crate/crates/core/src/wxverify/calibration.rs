use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_KNOTS: usize = 256;

/// Monotone piecewise-linear quantile map from forecast values to
/// observed values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    /// Forecast quantiles, strictly increasing.
    pub knots_in: Vec<f64>,
    /// Matched observed quantiles, non-decreasing.
    pub knots_out: Vec<f64>,
    pub fit_pred_count: usize,
    pub fit_truth_count: usize,
}

/// Linear-interpolated quantile of sorted data (the `(n−1)q` rule).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_finite<T: Copy + Into<f64>>(xs: &[T], what: &'static str) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptyInput(what));
    }
    let mut v: Vec<f64> = xs.iter().map(|&x| x.into()).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Histogram matching: forecast quantile `q` maps to observed quantile `q`
/// for 256 evenly spaced `q`. Knots that share an input value (plateaus in
/// the forecast distribution) are merged and their outputs averaged.
pub fn fit_calibration<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> Result<CalibrationMap> {
    let p = sorted_finite(pred, "calibration forecast")?;
    let t = sorted_finite(truth, "calibration truth")?;
    let mut knots_in: Vec<f64> = Vec::with_capacity(N_KNOTS);
    let mut knots_out: Vec<f64> = Vec::with_capacity(N_KNOTS);
    let mut run = 0usize;
    for k in 0..N_KNOTS {
        let q = k as f64 / (N_KNOTS - 1) as f64;
        let (x, y) = (quantile(&p, q), quantile(&t, q));
        if knots_in.last() == Some(&x) {
            let last = knots_out.last_mut().expect("paired");
            run += 1;
            *last += (y - *last) / run as f64;
        } else {
            knots_in.push(x);
            knots_out.push(y);
            run = 1;
        }
    }
    Ok(CalibrationMap {
        knots_in,
        knots_out,
        fit_pred_count: p.len(),
        fit_truth_count: t.len(),
    })
}

impl CalibrationMap {
    pub fn identity() -> Self {
        CalibrationMap {
            knots_in: vec![0.0, 1.0],
            knots_out: vec![0.0, 1.0],
            fit_pred_count: 0,
            fit_truth_count: 0,
        }
    }

    /// Maps one value; inputs outside the knot range clamp to the end knots.
    /// The identity map has no range and passes values through.
    pub fn map(&self, x: f64) -> f64 {
        if self.fit_pred_count == 0 {
            return x;
        }
        let xs = &self.knots_in;
        let ys = &self.knots_out;
        if x <= xs[0] {
            return ys[0];
        }
        if x >= xs[xs.len() - 1] {
            return ys[ys.len() - 1];
        }
        let i = xs.partition_point(|&k| k <= x);
        let (x0, x1) = (xs[i - 1], xs[i]);
        let w = (x - x0) / (x1 - x0);
        ys[i - 1] + w * (ys[i] - ys[i - 1])
    }

    pub fn apply(&self, pred: &[f32]) -> Vec<f32> {
        pred.iter().map(|&v| self.map(v as f64) as f32).collect()
    }
}

/// Elementwise application of `map`.
pub fn apply_calibration(map: &CalibrationMap, pred: &[f32]) -> Vec<f32> {
    map.apply(pred)
}
