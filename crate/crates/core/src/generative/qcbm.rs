use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremaps::ring_pairs;
use crate::qsim::{bitstring_to_index, index_to_bitstring, Circuit, Gate, Statevector, MAX_QUBITS};
use crate::rng::{child_rng, derive_seed, Rng};

/// Probability mass over bitstrings of a fixed width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BitstringDistribution {
    pub n_qubits: usize,
    pub probabilities: BTreeMap<String, f64>,
}

impl BitstringDistribution {
    pub fn new(n_qubits: usize, probabilities: BTreeMap<String, f64>) -> Result<Self> {
        let mut total = 0.0;
        for (bits, &p) in &probabilities {
            if bits.len() != n_qubits || bitstring_to_index(bits).is_none() {
                return Err(Error::invalid(format!("bad bitstring {bits:?} for width {n_qubits}")));
            }
            if !(p >= 0.0) {
                return Err(Error::invalid(format!("negative probability for {bits}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(BitstringDistribution {
            n_qubits,
            probabilities,
        })
    }

    /// Point mass on one bitstring.
    pub fn point(bits: &str) -> Result<Self> {
        Self::new(bits.len(), BTreeMap::from([(bits.to_string(), 1.0)]))
    }

    pub fn support_size(&self) -> usize {
        self.probabilities.values().filter(|&&p| p > 0.0).count()
    }

    /// `(basis index, probability)` pairs.
    pub fn sparse(&self) -> Vec<(usize, f64)> {
        self.probabilities
            .iter()
            .map(|(b, &p)| (bitstring_to_index(b).expect("validated"), p))
            .collect()
    }
}

/// One-hot codeword frequencies: `P(e_i) = count(i) / total`.
pub fn empirical_distribution(indices: &[usize], k: usize) -> Result<BitstringDistribution> {
    if indices.is_empty() {
        return Err(Error::EmptyInput("codeword indices"));
    }
    let mut counts = vec![0usize; k];
    for &i in indices {
        if i >= k {
            return Err(Error::IndexOutOfRange { index: i, len: k });
        }
        counts[i] += 1;
    }
    let total = indices.len() as f64;
    let probabilities = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (index_to_bitstring(1 << i, k), c as f64 / total))
        .collect();
    BitstringDistribution::new(k, probabilities)
}

/// `layers` × [RY, RZ on every qubit; CZ around the ring].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ansatz {
    pub n_qubits: usize,
    pub layers: usize,
}

impl Ansatz {
    pub fn n_params(&self) -> usize {
        self.layers * 2 * self.n_qubits
    }

    pub fn circuit(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                actual: params.len(),
            });
        }
        let n = self.n_qubits;
        let ring = ring_pairs(n);
        let mut c = Circuit::new(n)?;
        for l in 0..self.layers {
            for q in 0..n {
                let base = 2 * (l * n + q);
                c.push(Gate::Ry(q, params[base]))?;
                c.push(Gate::Rz(q, params[base + 1]))?;
            }
            for &(a, b) in &ring {
                c.push(Gate::Cz(a, b))?;
            }
        }
        Ok(c)
    }

    pub fn state(&self, params: &[f64]) -> Result<Statevector> {
        let mut s = Statevector::zero(self.n_qubits)?;
        self.circuit(params)?.apply_to(&mut s)?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum TrainingStage {
    /// Exact Born probabilities; `init = None` starts from the best-fitting
    /// product state.
    ExactWarmStart { init: Option<Vec<f64>> },
    /// Shot-based loss with readout bit flips, starting from `warm_start`.
    SampledRefine {
        shots: usize,
        noise_p: f64,
        warm_start: Vec<f64>,
    },
}

/// Simultaneous-perturbation stochastic approximation settings.
///
/// Step `k` uses gain `a / (k + 1 + stability)^alpha` and perturbation
/// `c / (k + 1)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsaConfig {
    pub iterations: usize,
    pub a: f64,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub stability: f64,
    /// Independent perturbations averaged per gradient estimate.
    pub gradient_samples: usize,
    /// Extra random starting points tried by a default warm start.
    pub restarts: usize,
}

impl SpsaConfig {
    pub fn with_iterations(iterations: usize) -> Self {
        SpsaConfig {
            iterations,
            a: 0.6,
            c: 0.15,
            alpha: 0.602,
            gamma: 0.101,
            stability: 0.1 * iterations as f64,
            gradient_samples: 1,
            restarts: 3,
        }
    }
}

impl Default for SpsaConfig {
    fn default() -> Self {
        Self::with_iterations(300)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcbmModel {
    pub ansatz: Ansatz,
    pub params: Vec<f64>,
    /// Loss at the current iterate, one entry per iteration (index 0 is the
    /// starting point).
    pub training_history: Vec<f64>,
    /// Loss of `params`, the best iterate seen.
    pub final_loss: f64,
    /// Best loss reached from each starting point (the winner's history is
    /// `training_history`).
    pub restart_losses: Vec<f64>,
    pub stage: String,
    pub seed: u64,
}

impl QcbmModel {
    /// Exact Born distribution of the trained circuit.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        Ok(self.ansatz.state(&self.params)?.probabilities())
    }
}

/// `½ Σ |p − q|` between dense model probabilities and a sparse target.
pub fn tv_dense(model: &[f64], target: &[(usize, f64)]) -> f64 {
    let mut diff: f64 = model.iter().sum::<f64>();
    for &(i, p) in target {
        diff += (model[i] - p).abs() - model[i];
    }
    0.5 * diff
}

/// TV between sampled frequencies and a sparse target.
pub fn tv_counts(counts: &BTreeMap<usize, u64>, shots: usize, target: &[(usize, f64)]) -> f64 {
    let mut diff = 0.0;
    let mut seen = 0.0;
    for &(i, p) in target {
        let f = counts.get(&i).copied().unwrap_or(0) as f64 / shots as f64;
        seen += f;
        diff += (f - p).abs();
    }
    0.5 * (diff + (1.0 - seen))
}

fn check_noise(noise_p: f64) -> Result<()> {
    if !(0.0..0.5).contains(&noise_p) {
        return Err(Error::invalid(format!("noise_p must lie in [0, 0.5), got {noise_p}")));
    }
    Ok(())
}

/// Flips each of the low `n_qubits` bits of `idx` with probability `p`.
fn flip_bits(idx: usize, n_qubits: usize, p: f64, rng: &mut Rng) -> usize {
    if p == 0.0 {
        return idx;
    }
    let mut out = idx;
    for q in 0..n_qubits {
        if rng.random::<f64>() < p {
            out ^= 1 << q;
        }
    }
    out
}

fn sampled_indices(state: &Statevector, shots: usize, noise_p: f64, seed: u64) -> Vec<usize> {
    let mut rng = child_rng(seed, 0);
    let mut noise = child_rng(seed, 1);
    let n = state.n_qubits();
    state
        .sample_indices(shots, &mut rng)
        .into_iter()
        .map(|i| flip_bits(i, n, noise_p, &mut noise))
        .collect()
}

/// TV between a product distribution with excitation probabilities `p`
/// and a target supported on one-hot strings and possibly the zero string.
fn product_tv(p: &[f64], target: &[(usize, f64)]) -> f64 {
    let n = p.len();
    let all_zero: f64 = p.iter().map(|&x| 1.0 - x).product();
    let mut model = vec![0.0; n];
    for i in 0..n {
        let others: f64 = (0..n).filter(|&j| j != i).map(|j| 1.0 - p[j]).product();
        model[i] = p[i] * others;
    }
    let mut covered = all_zero;
    let mut diff = 0.0;
    let mut zero_target = 0.0;
    for &(idx, q) in target {
        if idx == 0 {
            zero_target = q;
        } else if idx.is_power_of_two() {
            let i = idx.trailing_zeros() as usize;
            diff += (model[i] - q).abs();
        } else {
            diff += q;
        }
    }
    diff += (all_zero - zero_target).abs();
    for (i, &m) in model.iter().enumerate() {
        covered += m;
        if !target.iter().any(|&(idx, _)| idx == 1 << i) {
            diff += m;
        }
    }
    0.5 * (diff + (1.0 - covered))
}

/// Starting angles whose Born distribution is the product state closest in
/// TV to the target, found by coordinate search over the first-layer RY
/// angles. All other angles are zero, so the CZ ring contributes phases only.
fn product_init(ansatz: &Ansatz, target: &[(usize, f64)]) -> Vec<f64> {
    let n = ansatz.n_qubits;
    let mut p = vec![0.0; n];
    for &(idx, q) in target {
        for (k, pk) in p.iter_mut().enumerate() {
            if (idx >> k) & 1 == 1 {
                *pk += q;
            }
        }
    }
    const GRID: usize = 200;
    let mut best = product_tv(&p, target);
    for _ in 0..20 {
        let before = best;
        for k in 0..n {
            let keep = p[k];
            let mut arg = keep;
            for g in 0..=GRID {
                p[k] = g as f64 / GRID as f64;
                let tv = product_tv(&p, target);
                if tv < best - 1e-15 {
                    best = tv;
                    arg = p[k];
                }
            }
            p[k] = arg;
        }
        if before - best < 1e-12 {
            break;
        }
    }
    let mut params = vec![0.0; ansatz.n_params()];
    for (q, &pq) in p.iter().enumerate() {
        params[2 * q] = 2.0 * pq.sqrt().asin();
    }
    params
}

pub fn train_qcbm(
    target: &BitstringDistribution,
    n_qubits: usize,
    layers: usize,
    stage: &TrainingStage,
    opt: &SpsaConfig,
    seed: u64,
) -> Result<QcbmModel> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::UnsupportedQubits(n_qubits));
    }
    if target.n_qubits != n_qubits {
        return Err(Error::DimensionMismatch {
            expected: n_qubits,
            actual: target.n_qubits,
        });
    }
    if layers == 0 {
        return Err(Error::invalid("ansatz needs at least one layer"));
    }
    let ansatz = Ansatz { n_qubits, layers };
    let sparse = target.sparse();

    // explicit starting points run once; the default warm start tries the
    // product-state fit plus `opt.restarts` random points
    let (starts, stage_name) = match stage {
        TrainingStage::ExactWarmStart { init } => {
            let starts = match init {
                Some(v) => vec![v.clone()],
                None => {
                    let mut starts = vec![product_init(&ansatz, &sparse)];
                    let mut rng = child_rng(seed, u64::MAX);
                    for _ in 0..opt.restarts {
                        starts.push(
                            (0..ansatz.n_params())
                                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                                .collect(),
                        );
                    }
                    starts
                }
            };
            (starts, "exact_warm_start")
        }
        TrainingStage::SampledRefine {
            shots,
            noise_p,
            warm_start,
        } => {
            if *shots == 0 {
                return Err(Error::ZeroShots);
            }
            check_noise(*noise_p)?;
            (vec![warm_start.clone()], "sampled_refine")
        }
    };
    if let Some(bad) = starts.iter().find(|s| s.len() != ansatz.n_params()) {
        return Err(Error::DimensionMismatch {
            expected: ansatz.n_params(),
            actual: bad.len(),
        });
    }

    // every loss evaluation gets its own sampling stream
    let mut evals = 0u64;
    let mut loss = |theta: &[f64]| -> Result<f64> {
        let state = ansatz.state(theta)?;
        evals += 1;
        Ok(match stage {
            TrainingStage::ExactWarmStart { .. } => tv_dense(&state.probabilities(), &sparse),
            TrainingStage::SampledRefine { shots, noise_p, .. } => {
                let mut counts = BTreeMap::new();
                for i in sampled_indices(&state, *shots, *noise_p, derive_seed(seed, evals)) {
                    *counts.entry(i).or_insert(0u64) += 1;
                }
                tv_counts(&counts, *shots, &sparse)
            }
        })
    };

    let mut winner: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let mut restart_losses = Vec::with_capacity(starts.len());
    for (r, start) in starts.into_iter().enumerate() {
        let mut perturb = child_rng(seed, u64::MAX - 1 - r as u64);
        let (best_loss, best_theta, history) = spsa(&mut loss, start, opt, &mut perturb)?;
        restart_losses.push(best_loss);
        if winner.as_ref().is_none_or(|w| best_loss < w.0) {
            winner = Some((best_loss, best_theta, history));
        }
    }
    let (final_loss, params, training_history) = winner.expect("at least one start");
    Ok(QcbmModel {
        ansatz,
        params,
        training_history,
        final_loss,
        restart_losses,
        stage: stage_name.to_string(),
        seed,
    })
}

/// Runs SPSA from `theta`; returns the best loss, its parameters and the
/// loss history.
fn spsa(
    loss: &mut impl FnMut(&[f64]) -> Result<f64>,
    mut theta: Vec<f64>,
    opt: &SpsaConfig,
    perturb: &mut Rng,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let mut current = loss(&theta)?;
    let mut history = vec![current];
    let mut best = (current, theta.clone());
    let dim = theta.len();
    let samples = opt.gradient_samples.max(1);
    for k in 0..opt.iterations {
        let ak = opt.a / (k as f64 + 1.0 + opt.stability).powf(opt.alpha);
        let ck = opt.c / (k as f64 + 1.0).powf(opt.gamma);
        let mut grad = vec![0.0; dim];
        for _ in 0..samples {
            let delta: Vec<f64> = (0..dim)
                .map(|_| if perturb.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t + ck * d).collect();
            let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, d)| t - ck * d).collect();
            let diff = loss(&plus)? - loss(&minus)?;
            for (g, d) in grad.iter_mut().zip(&delta) {
                *g += diff / (2.0 * ck * d) / samples as f64;
            }
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= ak * g;
        }
        current = loss(&theta)?;
        history.push(current);
        if current < best.0 {
            best = (current, theta.clone());
        }
    }
    Ok((best.0, best.1, history))
}

/// Basis indices of `shots` samples after independent readout bit flips.
pub fn sample_qcbm_indices(model: &QcbmModel, shots: usize, seed: u64, noise_p: f64) -> Result<Vec<usize>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    check_noise(noise_p)?;
    let state = model.ansatz.state(&model.params)?;
    Ok(sampled_indices(&state, shots, noise_p, seed))
}

/// Samples as bitstrings (character `k` is qubit `k`).
pub fn sample_qcbm(model: &QcbmModel, shots: usize, seed: u64, noise_p: f64) -> Result<Vec<String>> {
    let n = model.ansatz.n_qubits;
    Ok(sample_qcbm_indices(model, shots, seed, noise_p)?
        .into_iter()
        .map(|i| index_to_bitstring(i, n))
        .collect())
}

/// Nearest one-hot codeword of a basis index.
///
/// Every set bit is at Hamming distance `w − 1` and every clear bit at
/// `w + 1`, so the answer is the lowest set bit; the all-zero string is
/// equidistant from all codewords and maps to 0.
pub fn mitigate_index(bits: usize) -> usize {
    if bits == 0 {
        0
    } else {
        bits.trailing_zeros() as usize
    }
}

pub fn mitigate(samples: &[String], n_qubits: usize) -> Result<Vec<usize>> {
    samples
        .iter()
        .map(|s| {
            if s.len() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    actual: s.len(),
                });
            }
            bitstring_to_index(s)
                .map(mitigate_index)
                .ok_or_else(|| Error::invalid(format!("not a bitstring: {s:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_at_zero_angles_has_zero_loss() {
        let target = BitstringDistribution::point("0000").unwrap();
        let ansatz = Ansatz { n_qubits: 4, layers: 2 };
        let init = vec![0.0; ansatz.n_params()];
        let opt = SpsaConfig::with_iterations(0);
        let stage = TrainingStage::ExactWarmStart { init: Some(init) };
        let m = train_qcbm(&target, 4, 2, &stage, &opt, 1).unwrap();
        assert!(m.final_loss.abs() < 1e-12);
        assert_eq!(m.params.len(), 16);
    }

    #[test]
    fn bell_support_is_learnable() {
        let target = BitstringDistribution::new(
            2,
            BTreeMap::from([("00".to_string(), 0.5), ("11".to_string(), 0.5)]),
        )
        .unwrap();
        let stage = TrainingStage::ExactWarmStart { init: None };
        let m = train_qcbm(&target, 2, 3, &stage, &SpsaConfig::with_iterations(400), 7).unwrap();
        let exact = tv_dense(&m.probabilities().unwrap(), &target.sparse());
        assert!(exact < 0.1, "tv {exact}");
        assert!((exact - m.final_loss).abs() < 1e-12);
        let mut running = f64::INFINITY;
        for &l in &m.training_history {
            running = running.min(l);
        }
        assert!((running - m.final_loss).abs() < 1e-12);
    }

    #[test]
    fn refine_requires_matching_warm_start() {
        let target = BitstringDistribution::point("00").unwrap();
        let stage = TrainingStage::SampledRefine {
            shots: 100,
            noise_p: 0.0,
            warm_start: vec![0.0; 3],
        };
        let err = train_qcbm(&target, 2, 1, &stage, &SpsaConfig::default(), 0).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, actual: 3 }));
    }

    #[test]
    fn mitigation_tie_rules() {
        let mut s = "1100".to_string();
        s.push_str(&"0".repeat(12));
        assert_eq!(mitigate(&[s], 16).unwrap(), vec![0]);
        assert_eq!(mitigate(&["0".repeat(16)], 16).unwrap(), vec![0]);
        assert_eq!(mitigate(&["0010".to_string()], 4).unwrap(), vec![2]);
        assert_eq!(mitigate(&["0111".to_string()], 4).unwrap(), vec![1]);
    }

    #[test]
    fn mitigation_matches_hamming_scan() {
        for bits in 0..(1usize << 6) {
            let dist = |i: usize| (bits ^ (1 << i)).count_ones();
            let best = (0..6).min_by_key(|&i| (dist(i), i)).unwrap();
            assert_eq!(mitigate_index(bits), best, "bits {bits:06b}");
        }
    }

    #[test]
    fn noise_rate_matches_binomial_mean() {
        let model = QcbmModel {
            ansatz: Ansatz { n_qubits: 16, layers: 1 },
            params: vec![0.0; 32],
            training_history: vec![],
            final_loss: 0.0,
            restart_losses: vec![],
            stage: "exact_warm_start".into(),
            seed: 0,
        };
        let shots = 4000;
        let clean = sample_qcbm(&model, 100, 3, 0.0).unwrap();
        assert!(clean.iter().all(|s| s == &"0".repeat(16)));
        let noisy = sample_qcbm(&model, shots, 3, 0.1).unwrap();
        let mean = noisy.iter().map(|s| s.matches('1').count()).sum::<usize>() as f64 / shots as f64;
        let sigma = (16.0f64 * 0.1 * 0.9 / shots as f64).sqrt();
        assert!((mean - 1.6).abs() < 3.0 * sigma, "mean {mean}");
        assert!(sample_qcbm(&model, 10, 3, 0.5).is_err());
    }

    #[test]
    fn empirical_distribution_is_one_hot() {
        let d = empirical_distribution(&[0, 0, 1, 1], 2).unwrap();
        assert_eq!(d.probabilities["10"], 0.5);
        assert_eq!(d.probabilities["01"], 0.5);
        let d = empirical_distribution(&[3; 5], 4).unwrap();
        assert_eq!(d.probabilities["0001"], 1.0);
        assert!(empirical_distribution(&[], 4).is_err());
    }
}
