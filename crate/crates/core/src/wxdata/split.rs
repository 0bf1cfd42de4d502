use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub cal: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded partition of `0..n` into train / calibration / test index sets.
///
/// Set sizes are `round(n·f_train)`, `round(n·f_cal)` and the remainder;
/// each set is returned in ascending order.
pub fn split(n: usize, fractions: (f64, f64, f64), seed: u64) -> Result<Split> {
    let (ft, fc, fe) = fractions;
    if [ft, fc, fe].iter().any(|f| !(*f > 0.0)) || ((ft + fc + fe) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "split fractions must be positive and sum to 1, got ({ft}, {fc}, {fe})"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    let n_train = ((n as f64) * ft).round() as usize;
    let n_cal = (((n as f64) * fc).round() as usize).min(n - n_train.min(n));
    let n_train = n_train.min(n);
    let mut train = perm[..n_train].to_vec();
    let mut cal = perm[n_train..n_train + n_cal].to_vec();
    let mut test = perm[n_train + n_cal..].to_vec();
    train.sort_unstable();
    cal.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, cal, test })
}
