use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{canonical_sign, sorted_eigen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnMeaning {
    RawFeatures,
    PrincipalComponents,
}

/// `N × M` feature matrix, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    pub values: DMatrix<f64>,
    pub row_ids: Vec<String>,
    pub column_meaning: ColumnMeaning,
    /// Principal components that carry no variance (rank < M); their
    /// columns are exactly zero.
    pub zero_columns: Vec<usize>,
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("data matrix"));
        }
        let row_ids = (0..values.nrows()).map(|i| i.to_string()).collect();
        Ok(DataMatrix {
            values,
            row_ids,
            column_meaning: ColumnMeaning::RawFeatures,
            zero_columns: Vec::new(),
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != m) {
            return Err(Error::invalid("ragged rows"));
        }
        Self::new(DMatrix::from_fn(n, m, |i, j| rows[i].as_ref()[j]))
    }

    pub fn with_row_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.values.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.values.nrows(),
                actual: ids.len(),
            });
        }
        self.row_ids = ids;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows())
            .map(|i| self.values.row(i).iter().copied().collect())
            .collect()
    }
}

/// Projects the mean-centred data onto its top-`m` principal axes.
///
/// Components are ordered by decreasing variance and oriented so that each
/// axis' largest-magnitude loading is positive. When the data has more
/// columns than rows the axes are recovered from the `N × N` Gram matrix.
pub fn pca_reduce(data: &DataMatrix, m: usize) -> Result<DataMatrix> {
    let (n, d) = (data.n_rows(), data.n_cols());
    if n == 0 || d == 0 {
        return Err(Error::EmptyInput("pca input"));
    }
    if m == 0 || m > n.min(d) {
        return Err(Error::invalid(format!(
            "cannot keep {m} components of a {n}x{d} matrix"
        )));
    }
    let means = data.values.row_mean();
    let mut x = data.values.clone();
    for mut row in x.row_iter_mut() {
        row -= &means;
    }

    let (variances, axes) = if d <= n {
        let eig = sorted_eigen(&(x.transpose() * &x));
        let axes: Vec<Vec<f64>> = (0..m)
            .map(|k| eig.vectors.column(k).iter().copied().collect())
            .collect();
        (eig.values[..m].to_vec(), axes)
    } else {
        let eig = sorted_eigen(&(&x * x.transpose()));
        let axes = (0..m)
            .map(|k| {
                let v = x.transpose() * eig.vectors.column(k);
                let norm = v.norm();
                if norm > 0.0 {
                    (v / norm).iter().copied().collect()
                } else {
                    vec![0.0; d]
                }
            })
            .collect();
        (eig.values[..m].to_vec(), axes)
    };

    let top = variances.first().copied().unwrap_or(0.0).max(0.0);
    let tol = top * 1e-12 * (n.max(d) as f64) + f64::MIN_POSITIVE;
    let mut scores = DMatrix::zeros(n, m);
    let mut zero_columns = Vec::new();
    for (k, mut axis) in axes.into_iter().enumerate() {
        if variances[k] <= tol {
            zero_columns.push(k);
            continue;
        }
        canonical_sign(&mut axis);
        let v = nalgebra::DVector::from_vec(axis);
        scores.set_column(k, &(&x * v));
    }
    Ok(DataMatrix {
        values: scores,
        row_ids: data.row_ids.clone(),
        column_meaning: ColumnMeaning::PrincipalComponents,
        zero_columns,
    })
}
