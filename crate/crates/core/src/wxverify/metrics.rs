use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radar target products, in TARG channel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Product {
    #[serde(rename = "VIL")]
    Vil,
    #[serde(rename = "ET")]
    Et,
    #[serde(rename = "CR")]
    Cr,
}

impl Product {
    pub const ALL: [Product; 3] = [Product::Vil, Product::Et, Product::Cr];

    pub fn channel(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Product::Vil => "VIL",
            Product::Et => "ET",
            Product::Cr => "CR",
        }
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Product {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "VIL" => Ok(Product::Vil),
            "ET" => Ok(Product::Et),
            "CR" => Ok(Product::Cr),
            _ => Err(Error::invalid(format!("unknown product {s:?}"))),
        }
    }
}

/// Event thresholds per product, ascending; level `l` (1-based) uses
/// element `l - 1`.
///
/// The defaults are synthetic six-level ladders in the units of the
/// bundled generator, not operational VIP definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelThresholds {
    #[serde(rename = "VIL")]
    pub vil: Vec<f64>,
    #[serde(rename = "ET")]
    pub et: Vec<f64>,
    #[serde(rename = "CR")]
    pub cr: Vec<f64>,
}

impl Default for LevelThresholds {
    fn default() -> Self {
        LevelThresholds {
            vil: vec![0.76, 3.5, 6.9, 12.0, 32.0, 70.0],
            et: vec![10.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            cr: vec![18.0, 30.0, 41.0, 46.0, 50.0, 57.0],
        }
    }
}

impl LevelThresholds {
    pub fn new(vil: Vec<f64>, et: Vec<f64>, cr: Vec<f64>) -> Result<Self> {
        let t = LevelThresholds { vil, et, cr };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for p in Product::ALL {
            let v = self.get(p);
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("level thresholds"));
            }
            if v.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("{p} thresholds must be strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn get(&self, product: Product) -> &[f64] {
        match product {
            Product::Vil => &self.vil,
            Product::Et => &self.et,
            Product::Cr => &self.cr,
        }
    }
}

/// Pixel counts of a thresholded forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub hits: u64,
    pub misses: u64,
    pub false_alarms: u64,
    pub correct_rejections: u64,
    pub level: usize,
    pub product: Product,
}

impl ContingencyTable {
    pub fn empty(product: Product, level: usize) -> Self {
        ContingencyTable {
            hits: 0,
            misses: 0,
            false_alarms: 0,
            correct_rejections: 0,
            level,
            product,
        }
    }

    pub fn total(&self) -> u64 {
        self.hits + self.misses + self.false_alarms + self.correct_rejections
    }

    /// Pixels where the truth is an event.
    pub fn observed_events(&self) -> u64 {
        self.hits + self.misses
    }

    /// Adds the counts of `other` (tables are additive across patches).
    pub fn merge(&mut self, other: &ContingencyTable) {
        self.hits += other.hits;
        self.misses += other.misses;
        self.false_alarms += other.false_alarms;
        self.correct_rejections += other.correct_rejections;
    }
}

fn check_pair<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    Ok(())
}

/// Counts into `table`; a pixel is an event when its value is `>= threshold`.
pub fn accumulate<T: Copy + Into<f64>>(table: &mut ContingencyTable, pred: &[T], truth: &[T], threshold: f64) -> Result<()> {
    check_pair(pred, truth)?;
    for (&p, &t) in pred.iter().zip(truth) {
        let (p, t) = (p.into(), t.into());
        if p.is_nan() || t.is_nan() {
            return Err(Error::NonFinite("forecast pixel"));
        }
        match (p >= threshold, t >= threshold) {
            (true, true) => table.hits += 1,
            (false, true) => table.misses += 1,
            (true, false) => table.false_alarms += 1,
            (false, false) => table.correct_rejections += 1,
        }
    }
    Ok(())
}

/// Contingency table of one prediction/truth grid pair. `level` and
/// `product` are labels carried on the table.
pub fn contingency<T: Copy + Into<f64>>(
    pred: &[T],
    truth: &[T],
    threshold: f64,
    product: Product,
    level: usize,
) -> Result<ContingencyTable> {
    let mut table = ContingencyTable::empty(product, level);
    accumulate(&mut table, pred, truth, threshold)?;
    Ok(table)
}

/// Ratio scores of a table; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationMetrics {
    pub pod: Option<f64>,
    pub sucr: Option<f64>,
    pub csi: Option<f64>,
    pub bias: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn metrics(t: &ContingencyTable) -> VerificationMetrics {
    let (h, m, f) = (t.hits, t.misses, t.false_alarms);
    VerificationMetrics {
        pod: ratio(h, h + m),
        sucr: ratio(h, h + f),
        csi: ratio(h, h + m + f),
        bias: ratio(h + f, h + m),
    }
}

/// CSI implied by a (POD, SUCR) pair.
pub fn csi_from(pod: f64, sucr: f64) -> f64 {
    if pod <= 0.0 || sucr <= 0.0 {
        return 0.0;
    }
    1.0 / (1.0 / pod + 1.0 / sucr - 1.0)
}

pub fn mse<T: Copy + Into<f64>>(pred: &[T], truth: &[T]) -> Result<f64> {
    check_pair(pred, truth)?;
    if pred.is_empty() {
        return Err(Error::EmptyInput("mse"));
    }
    let sum: f64 = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| {
            let d = p.into() - t.into();
            d * d
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_enumerated_two_by_two() {
        let pred = [5.0, 0.0, 5.0, 0.0];
        let truth = [5.0, 5.0, 0.0, 0.0];
        let t = contingency(&pred, &truth, 1.0, Product::Vil, 1).unwrap();
        assert_eq!((t.hits, t.misses, t.false_alarms, t.correct_rejections), (1, 1, 1, 1));
    }

    #[test]
    fn ratio_fixture() {
        let t = ContingencyTable {
            hits: 40,
            misses: 10,
            false_alarms: 10,
            correct_rejections: 0,
            level: 1,
            product: Product::Et,
        };
        let m = metrics(&t);
        assert_eq!(m.pod, Some(0.8));
        assert_eq!(m.sucr, Some(0.8));
        assert_eq!(m.bias, Some(1.0));
        assert!((m.csi.unwrap() - 40.0 / 60.0).abs() < 1e-15);
        let empty = metrics(&ContingencyTable::empty(Product::Cr, 1));
        assert_eq!(empty, VerificationMetrics { pod: None, sucr: None, csi: None, bias: None });
    }

    #[test]
    fn nan_pixels_are_rejected() {
        assert!(contingency(&[f64::NAN], &[1.0], 0.5, Product::Vil, 1).is_err());
        assert!(contingency(&[1.0, 2.0], &[1.0], 0.5, Product::Vil, 1).is_err());
    }

    #[test]
    fn thresholds_must_increase() {
        assert!(LevelThresholds::default().validate().is_ok());
        assert!(LevelThresholds::new(vec![1.0, 1.0], vec![], vec![]).is_err());
    }

    #[test]
    fn mse_constant_offset() {
        let a = [1.0f32, 2.0, 3.0];
        let b = [1.5f32, 2.5, 3.5];
        assert!((mse(&a, &b).unwrap() - 0.25).abs() < 1e-12);
    }
}
