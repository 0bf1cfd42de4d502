use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::calibration::{fit_calibration, CalibrationMap};
use super::diagram::DiagramPoint;
use super::metrics::{accumulate, metrics, ContingencyTable, LevelThresholds, Product, VerificationMetrics};
use crate::error::{Error, Result};
use crate::wxdata::PatchTensor;

/// Scores of one model on one product at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub model: String,
    pub product: Product,
    pub level: usize,
    pub threshold: f64,
    #[serde(rename = "MSE")]
    pub mse: f64,
    #[serde(rename = "CSI")]
    pub csi: Option<f64>,
    #[serde(rename = "BIAS")]
    pub bias: Option<f64>,
    #[serde(rename = "POD")]
    pub pod: Option<f64>,
    #[serde(rename = "SUCR")]
    pub sucr: Option<f64>,
    pub hits: u64,
    pub misses: u64,
    pub false_alarms: u64,
    pub correct_rejections: u64,
}

impl MetricsRow {
    pub fn table(&self) -> ContingencyTable {
        ContingencyTable {
            hits: self.hits,
            misses: self.misses,
            false_alarms: self.false_alarms,
            correct_rejections: self.correct_rejections,
            level: self.level,
            product: self.product,
        }
    }

    pub fn diagram_point(&self) -> DiagramPoint {
        DiagramPoint {
            label: format!("{} {} L{}", self.model, self.product, self.level),
            pod: self.pod,
            sucr: self.sucr,
        }
    }
}

fn check_targets(pred: &PatchTensor, truth: &PatchTensor) -> Result<()> {
    if pred.shape() != truth.shape() {
        return Err(Error::invalid(format!(
            "prediction shape {:?} does not match truth shape {:?}",
            pred.shape(),
            truth.shape()
        )));
    }
    if truth.shape()[1] != Product::ALL.len() {
        return Err(Error::DimensionMismatch {
            expected: Product::ALL.len(),
            actual: truth.shape()[1],
        });
    }
    Ok(())
}

fn channel_pixels(t: &PatchTensor, c: usize) -> Vec<f32> {
    (0..t.len()).flat_map(|n| t.grid(n, c).iter().copied()).collect()
}

/// One row per product per level; counts are summed over all patches.
pub fn evaluate(model: &str, pred: &PatchTensor, truth: &PatchTensor, levels: &LevelThresholds) -> Result<Vec<MetricsRow>> {
    check_targets(pred, truth)?;
    levels.validate()?;
    let mut rows = Vec::new();
    for product in Product::ALL {
        let p = channel_pixels(pred, product.channel());
        let t = channel_pixels(truth, product.channel());
        let mse = if p.is_empty() { 0.0 } else { super::metrics::mse(&p, &t)? };
        for (i, &threshold) in levels.get(product).iter().enumerate() {
            let mut table = ContingencyTable::empty(product, i + 1);
            accumulate(&mut table, &p, &t, threshold)?;
            let VerificationMetrics { pod, sucr, csi, bias } = metrics(&table);
            rows.push(MetricsRow {
                model: model.to_string(),
                product,
                level: i + 1,
                threshold,
                mse,
                csi,
                bias,
                pod,
                sucr,
                hits: table.hits,
                misses: table.misses,
                false_alarms: table.false_alarms,
                correct_rejections: table.correct_rejections,
            });
        }
    }
    Ok(rows)
}

/// Wide summary of one model at one level: `"<product> <metric>"` columns
/// for MSE, CSI, BIAS, POD and SUCR.
pub fn summary_columns(rows: &[MetricsRow], model: &str, level: usize) -> BTreeMap<String, Option<f64>> {
    let mut out = BTreeMap::new();
    for r in rows.iter().filter(|r| r.model == model && r.level == level) {
        let p = r.product;
        out.insert(format!("{p} MSE"), Some(r.mse));
        out.insert(format!("{p} CSI"), r.csi);
        out.insert(format!("{p} BIAS"), r.bias);
        out.insert(format!("{p} POD"), r.pod);
        out.insert(format!("{p} SUCR"), r.sucr);
    }
    out
}

/// Per-product calibration maps, fitted on all pixels of each TARG channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetCalibration {
    pub maps: BTreeMap<Product, CalibrationMap>,
}

pub fn fit_target_calibration(pred: &PatchTensor, truth: &PatchTensor) -> Result<TargetCalibration> {
    check_targets(pred, truth)?;
    let mut maps = BTreeMap::new();
    for product in Product::ALL {
        let p = channel_pixels(pred, product.channel());
        let t = channel_pixels(truth, product.channel());
        maps.insert(product, fit_calibration(&p, &t)?);
    }
    Ok(TargetCalibration { maps })
}

impl TargetCalibration {
    pub fn apply(&self, pred: &PatchTensor) -> Result<PatchTensor> {
        let [n, c, h, w] = pred.shape();
        if c != Product::ALL.len() {
            return Err(Error::DimensionMismatch {
                expected: Product::ALL.len(),
                actual: c,
            });
        }
        let mut data = Vec::with_capacity(pred.data().len());
        for i in 0..n {
            for product in Product::ALL {
                data.extend(self.maps[&product].apply(pred.grid(i, product.channel())));
            }
        }
        let mut out = PatchTensor::new(format!("{}_cal", pred.name), [n, c, h, w], pred.channels.clone(), pred.units.clone(), data)?;
        out.provenance = pred.provenance.clone();
        Ok(out)
    }
}
