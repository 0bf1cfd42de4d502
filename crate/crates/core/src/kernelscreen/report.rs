use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    analyze, classical_kernel, default_lambda, labels_from_analysis, model_complexity,
    normalize_kernel, pca_reduce, quantum_kernel, train_svm_with, DataMatrix, KernelMode,
    SvmConfig,
};
use crate::error::{Error, Result};
use crate::featuremaps::{EncodingKind, EncodingSpec};
use crate::linalg::clip_psd;
use crate::qsim::MAX_QUBITS;

/// Relative slack when comparing `g` against `√N`.
pub const DEFAULT_VERDICT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PotentialAdvantage,
    ClassicalSufficient,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    /// Labels supplied by the caller (binarized targets).
    Target,
    /// Labels constructed from the top eigenvector of the geometric difference.
    Adversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub encoding: EncodingSpec,
    pub labels: LabelSource,
    pub g: Option<f64>,
    #[serde(rename = "s_C")]
    pub s_c: Option<f64>,
    #[serde(rename = "s_Q")]
    pub s_q: Option<f64>,
    pub mode: String,
    pub shots: Option<usize>,
    pub lambda: Option<f64>,
    pub verdict: Verdict,
    /// Top eigenvalue of the geometric-difference product was repeated.
    pub degenerate: bool,
    /// PCA components with zero variance.
    pub zero_components: Vec<usize>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "sqrt_N")]
    pub sqrt_n: f64,
    pub verdict_tolerance: f64,
    pub svm_c: f64,
    pub seed: u64,
    pub rows: Vec<ScreenRow>,
}

impl ScreenReport {
    /// One line per row: `M, encoding, labels, g, sqrt_N, s_C, s_Q, verdict`.
    /// Undefined values are left empty.
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("M,encoding,labels,g,sqrt_N,s_C,s_Q,verdict\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:?},{},{},{},{},{:?}\n",
                r.m,
                r.encoding.kind,
                r.labels,
                opt(r.g),
                self.sqrt_n,
                opt(r.s_c),
                opt(r.s_q),
                r.verdict
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ScreenConfig {
    pub ms: Vec<usize>,
    pub encodings: Vec<EncodingKind>,
    pub mode: KernelMode,
    pub svm: SvmConfig,
    /// `None` selects [`default_lambda`] per row.
    pub lambda: Option<f64>,
    pub seed: u64,
    pub verdict_tolerance: f64,
    /// Also score each row on its adversarial labelling.
    pub adversarial: bool,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            ms: vec![4, 8, 16],
            encodings: vec![EncodingKind::Angle, EncodingKind::Iqp],
            mode: KernelMode::Exact,
            svm: SvmConfig::default(),
            lambda: None,
            seed: 0,
            verdict_tolerance: DEFAULT_VERDICT_TOLERANCE,
            adversarial: false,
        }
    }
}

/// Decision rule for one row.
///
/// `g` below `√N(1 − tol)` leaves no geometric room for the quantum kernel;
/// with room, a classical complexity within `√N` means the labels are easy
/// classically. Advantage needs `s_C > √N` and `s_Q < s_C`; anything else is
/// inconclusive.
pub fn verdict(g: f64, s_c: f64, s_q: f64, sqrt_n: f64, tol: f64) -> Verdict {
    if g < sqrt_n * (1.0 - tol) || s_c <= sqrt_n {
        Verdict::ClassicalSufficient
    } else if s_q < s_c {
        Verdict::PotentialAdvantage
    } else {
        Verdict::Inconclusive
    }
}

/// Labels `+1` where `value ≥ threshold`, else `-1`.
pub fn binarize_labels(values: &[f64], threshold: f64) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v >= threshold { 1.0 } else { -1.0 })
        .collect()
}

struct RowOutcome {
    target: ScreenRow,
    adversarial: Option<ScreenRow>,
}

fn empty_row(m: usize, spec: EncodingSpec, cfg: &ScreenConfig, labels: LabelSource) -> ScreenRow {
    ScreenRow {
        m,
        encoding: spec,
        labels,
        g: None,
        s_c: None,
        s_q: None,
        mode: cfg.mode.name().to_string(),
        shots: cfg.mode.shots(),
        lambda: None,
        verdict: Verdict::Inconclusive,
        degenerate: false,
        zero_components: Vec::new(),
        note: None,
    }
}

fn run_row(
    data: &DataMatrix,
    labels: &[f64],
    m: usize,
    spec: EncodingSpec,
    cfg: &ScreenConfig,
) -> Result<RowOutcome> {
    let n = data.n_rows();
    let sqrt_n = (n as f64).sqrt();
    if m > MAX_QUBITS {
        return Err(Error::UnsupportedQubits(m));
    }
    let reduced = pca_reduce(data, m)?;
    let k_c = normalize_kernel(&classical_kernel(&reduced))?;
    let mut k_q = normalize_kernel(&quantum_kernel(&reduced, &spec, cfg.mode)?)?;
    if matches!(cfg.mode, KernelMode::Sampled { .. }) {
        k_q.values = clip_psd(&k_q.values);
    }
    let lambda = cfg.lambda.unwrap_or_else(|| default_lambda(&k_c));
    let analysis = analyze(&k_c, &k_q, lambda)?;

    let score = |y: &[f64], source: LabelSource| -> Result<ScreenRow> {
        let s_c = model_complexity(&train_svm_with(&k_c.values, y, &cfg.svm)?);
        let s_q = model_complexity(&train_svm_with(&k_q.values, y, &cfg.svm)?);
        let mut row = empty_row(m, spec, cfg, source);
        row.g = Some(analysis.g);
        row.s_c = Some(s_c);
        row.s_q = Some(s_q);
        row.lambda = Some(lambda);
        row.degenerate = analysis.degenerate;
        row.zero_components = reduced.zero_columns.clone();
        row.verdict = verdict(analysis.g, s_c, s_q, sqrt_n, cfg.verdict_tolerance);
        Ok(row)
    };

    // label-specific failures (e.g. a single class) keep the geometric part
    let scored = |y: &[f64], source: LabelSource| match score(y, source) {
        Ok(row) => row,
        Err(e) => {
            let mut row = empty_row(m, spec, cfg, source);
            row.g = Some(analysis.g);
            row.lambda = Some(lambda);
            row.degenerate = analysis.degenerate;
            row.zero_components = reduced.zero_columns.clone();
            row.note = Some(e.to_string());
            row
        }
    };
    let target = scored(labels, LabelSource::Target);
    let adversarial = cfg
        .adversarial
        .then(|| scored(&labels_from_analysis(&analysis).labels, LabelSource::Adversarial));
    Ok(RowOutcome { target, adversarial })
}

/// Runs the screening protocol for every `(M, encoding)` pair.
///
/// A failing row is reported as [`Verdict::Inconclusive`] with the error in
/// `note`; the batch continues.
pub fn screen(data: &DataMatrix, labels: &[f64], cfg: &ScreenConfig) -> Result<ScreenReport> {
    let n = data.n_rows();
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    let mut ms = cfg.ms.clone();
    ms.sort_unstable();
    ms.dedup();
    let mut kinds = cfg.encodings.clone();
    kinds.sort();
    kinds.dedup();
    let jobs: Vec<(usize, EncodingSpec)> = ms
        .iter()
        .flat_map(|&m| kinds.iter().map(move |&k| (m, EncodingSpec::of_kind(k, m))))
        .collect();

    let outcomes: Vec<Vec<ScreenRow>> = jobs
        .par_iter()
        .map(|&(m, spec)| match run_row(data, labels, m, spec, cfg) {
            Ok(out) => std::iter::once(out.target).chain(out.adversarial).collect(),
            Err(e) => {
                log::warn!("screen row M={m} {}: {e}", spec.kind);
                let mut row = empty_row(m, spec, cfg, LabelSource::Target);
                row.note = Some(e.to_string());
                vec![row]
            }
        })
        .collect();
    let mut rows: Vec<ScreenRow> = outcomes.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.m, a.encoding.kind, a.labels).cmp(&(b.m, b.encoding.kind, b.labels))
    });

    Ok(ScreenReport {
        n,
        sqrt_n: (n as f64).sqrt(),
        verdict_tolerance: cfg.verdict_tolerance,
        svm_c: cfg.svm.c,
        seed: cfg.seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn verdict_rules() {
        let s = 74f64.sqrt();
        assert_eq!(verdict(5.0, 20.0, 1.0, s, 0.05), Verdict::ClassicalSufficient);
        assert_eq!(verdict(9.0, 3.0, 5.0, s, 0.05), Verdict::ClassicalSufficient);
        assert_eq!(verdict(8.3, 20.0, 5.0, s, 0.05), Verdict::PotentialAdvantage);
        assert_eq!(verdict(9.0, 20.0, 25.0, s, 0.05), Verdict::Inconclusive);
    }

    #[test]
    fn binarize() {
        assert_eq!(binarize_labels(&[0.1, 2.0, 1.0], 1.0), vec![-1.0, 1.0, 1.0]);
    }

    #[test]
    fn report_shape_and_threshold() {
        let mut rng = crate::rng::rng_from_seed(12);
        let rows: Vec<Vec<f64>> = (0..74)
            .map(|_| (0..6).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<f64> = rows.iter().map(|r| if r[0] > 0.5 { 1.0 } else { -1.0 }).collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        let cfg = ScreenConfig {
            ms: vec![4, 2],
            adversarial: true,
            ..Default::default()
        };
        let report = screen(&data, &labels, &cfg).unwrap();
        assert_eq!(report.n, 74);
        assert!((report.sqrt_n - 8.602).abs() < 1e-3);
        assert_eq!(report.rows.len(), 8);
        assert_eq!(report.rows[0].m, 2);
        assert_eq!(report.rows[0].encoding.kind, EncodingKind::Angle);
        assert_eq!(report.rows[1].labels, LabelSource::Adversarial);
        let json = serde_json::to_value(&report).unwrap();
        for key in ["N", "sqrt_N", "rows"] {
            assert!(json.get(key).is_some());
        }
        for key in ["M", "encoding", "g", "s_C", "s_Q", "mode", "shots", "verdict"] {
            assert!(json["rows"][0].get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn single_class_labels_keep_g() {
        let data = DataMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let cfg = ScreenConfig {
            ms: vec![2],
            encodings: vec![EncodingKind::Angle],
            ..Default::default()
        };
        let report = screen(&data, &[1.0, 1.0, 1.0], &cfg).unwrap();
        assert!(report.rows[0].g.is_some());
        assert!(report.rows[0].s_c.is_none());
        assert_eq!(report.rows[0].verdict, Verdict::Inconclusive);
    }

    #[test]
    fn failing_rows_are_inconclusive() {
        let data = DataMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let cfg = ScreenConfig {
            ms: vec![5],
            encodings: vec![EncodingKind::Angle],
            ..Default::default()
        };
        let report = screen(&data, &[1.0, -1.0, 1.0], &cfg).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].verdict, Verdict::Inconclusive);
        assert!(report.rows[0].note.is_some());
    }
}
