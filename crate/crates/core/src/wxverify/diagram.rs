use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::csi_from;
use crate::error::Result;
use crate::wxdata::write_atomic;

/// A labelled (POD, SUCR) pair; either may be undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub label: String,
    pub pod: Option<f64>,
    pub sucr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlottedPoint {
    pub label: String,
    pub pod: f64,
    pub sucr: f64,
    pub csi: f64,
}

/// Points plus a CSI field over `(SUCR, POD) ∈ (0,1]²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceDiagram {
    pub points: Vec<PlottedPoint>,
    pub resolution: usize,
    /// `(sucr, pod, csi)` at `sucr = i/resolution`, `pod = j/resolution`.
    pub grid: Vec<(f64, f64, f64)>,
    pub warnings: Vec<String>,
}

pub fn performance_diagram(points: &[DiagramPoint], resolution: usize) -> PerformanceDiagram {
    let resolution = resolution.max(1);
    let mut warnings = Vec::new();
    let mut plotted = Vec::new();
    for p in points {
        match (p.pod, p.sucr) {
            (Some(pod), Some(sucr)) => plotted.push(PlottedPoint {
                label: p.label.clone(),
                pod,
                sucr,
                csi: csi_from(pod, sucr),
            }),
            _ => warnings.push(format!("{}: POD or SUCR undefined, point skipped", p.label)),
        }
    }
    let r = resolution as f64;
    let mut grid = Vec::with_capacity(resolution * resolution);
    for i in 1..=resolution {
        for j in 1..=resolution {
            let (s, d) = (i as f64 / r, j as f64 / r);
            grid.push((s, d, csi_from(d, s)));
        }
    }
    PerformanceDiagram {
        points: plotted,
        resolution,
        grid,
        warnings,
    }
}

const SIZE: f64 = 520.0;
const MARGIN: f64 = 60.0;

fn px(v: f64) -> f64 {
    MARGIN + v * (SIZE - 2.0 * MARGIN)
}

fn py(v: f64) -> f64 {
    SIZE - MARGIN - v * (SIZE - 2.0 * MARGIN)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

impl PerformanceDiagram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,label,sucr,pod,csi\n");
        for p in &self.points {
            let _ = writeln!(out, "point,{},{},{},{}", p.label.replace(',', ";"), p.sucr, p.pod, p.csi);
        }
        for &(s, d, c) in &self.grid {
            let _ = writeln!(out, "grid,,{s},{d},{c}");
        }
        out
    }

    /// Standalone SVG: CSI contours at 0.1 steps, the POD = SUCR diagonal,
    /// and the points.
    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (x0, x1, y0, y1) = (px(0.0), px(1.0), py(0.0), py(1.0));
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for t in 1..10 {
            let v = t as f64 / 10.0;
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{v:.1}</text>"#, px(v), y0 + 16.0);
            let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v:.1}</text>"#, x0 - 6.0, py(v) + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">Success ratio (SUCR)</text>"#, px(0.5), SIZE - 18.0);
        let _ = writeln!(
            s,
            r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">Probability of detection (POD)</text>"#,
            py(0.5)
        );

        // POD = 1 / (1/c + 1 - 1/s) traced over s
        for t in 1..10 {
            let c = t as f64 / 10.0;
            let mut pts = Vec::new();
            for k in 1..=400 {
                let sr = k as f64 / 400.0;
                let den = 1.0 / c + 1.0 - 1.0 / sr;
                if den > 0.0 {
                    let pod = 1.0 / den;
                    if pod <= 1.0 {
                        pts.push(format!("{:.2},{:.2}", px(sr), py(pod)));
                    }
                }
            }
            if pts.len() > 1 {
                let _ = writeln!(
                    s,
                    r##"<polyline points="{}" fill="none" stroke="#999" stroke-width="1"/>"##,
                    pts.join(" ")
                );
                let _ = writeln!(s, r##"<text x="{}" y="{}" fill="#777">{c:.1}</text>"##, px(1.0) + 4.0, py(c) + 4.0);
            }
        }
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="#444" stroke-dasharray="5,4"/>"##
        );
        for (i, p) in self.points.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let (cx, cy) = (px(p.sucr), py(p.pod));
            let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{color}"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                cx + 6.0,
                cy - 6.0,
                escape(&p.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    /// Writes `<stem>.csv` and `<stem>.svg`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        write_atomic(&stem.with_extension("csv"), self.to_csv().as_bytes())?;
        write_atomic(&stem.with_extension("svg"), self.to_svg().as_bytes())
    }
}
