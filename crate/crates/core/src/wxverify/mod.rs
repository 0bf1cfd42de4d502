//! Pixel verification of radar-product forecasts and histogram-matching
//! calibration.
//!
//! A pixel is an event when its value reaches the level threshold. POD is
//! `H/(H+M)`, SUCR `H/(H+F)`, CSI `H/(H+M+F)` and BIAS `(H+F)/(H+M)`; a
//! ratio with a zero denominator is `None`.

mod calibration;
mod diagram;
mod metrics;
mod report;

pub use calibration::{apply_calibration, fit_calibration, CalibrationMap, N_KNOTS};
pub use diagram::{performance_diagram, DiagramPoint, PerformanceDiagram, PlottedPoint};
pub use metrics::{
    accumulate, contingency, csi_from, metrics, mse, ContingencyTable, LevelThresholds, Product,
    VerificationMetrics,
};
pub use report::{evaluate, fit_target_calibration, summary_columns, MetricsRow, TargetCalibration};
