//! Invariants checked over random inputs.

mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;

use qkscreen::featuremaps::{EncodingKind, EncodingSpec};
use qkscreen::generative::{empirical_distribution, mitigate, mitigate_index};
use qkscreen::kernelscreen::{
    geometric_difference, model_complexity, normalize_kernel, quantum_kernel_scaled, train_svm_with,
    KernelMatrix, KernelMode, KernelSource, SvmConfig,
};
use qkscreen::qsim::{bitstring_to_index, index_to_bitstring, run_circuit, Circuit, Gate};
use qkscreen::quanvolve::{fit_readout, quanvolve_angles, QuanvLayerSpec, QuanvMode};
use qkscreen::wxdata::split;
use qkscreen::wxverify::{contingency, fit_calibration, metrics, Product};

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let pair = (0..n, 1..n).prop_map(move |(a, d)| (a, (a + d) % n));
    let t = -2.0 * PI..2.0 * PI;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        (q.clone(), t.clone()).prop_map(|(q, t)| Gate::Rx(q, t)),
        (q.clone(), t.clone()).prop_map(|(q, t)| Gate::Ry(q, t)),
        (q, t.clone()).prop_map(|(q, t)| Gate::Rz(q, t)),
        pair.clone().prop_map(|(a, b)| Gate::Cz(a, b)),
        pair.clone().prop_map(|(a, b)| Gate::Cnot(a, b)),
        (pair, t).prop_map(|((a, b), t)| Gate::Rzz(a, b, t)),
    ]
}

fn circuit_strategy() -> impl Strategy<Value = (usize, Vec<Gate>)> {
    (2usize..=5).prop_flat_map(|n| (Just(n), prop::collection::vec(gate_strategy(n), 0..30)))
}

fn points(n_q: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..PI, n_q), 2..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_preserve_norm_and_invert((n, gates) in circuit_strategy()) {
        let mut c = Circuit::new(n).unwrap();
        for g in &gates {
            c.push(*g).unwrap();
        }
        let s = run_circuit(&c).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        for g in gates.iter().rev() {
            c.push(g.inverse()).unwrap();
        }
        let back = run_circuit(&c).unwrap();
        prop_assert!((back.prob_all_zero() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bitstrings_round_trip(n in 1usize..=20, raw in any::<u32>()) {
        let idx = raw as usize & ((1 << n) - 1);
        let bits = index_to_bitstring(idx, n);
        prop_assert_eq!(bits.len(), n);
        prop_assert_eq!(bitstring_to_index(&bits), Some(idx));
    }

    #[test]
    fn quantum_kernels_are_psd_fidelities(rows in points(3), iqp in any::<bool>()) {
        let kind = if iqp { EncodingKind::Iqp } else { EncodingKind::Angle };
        let k = quantum_kernel_scaled(&rows, &EncodingSpec::of_kind(kind, 3), KernelMode::Exact).unwrap();
        prop_assert!(k.values.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        let (w, _) = common::jacobi_eigen(&(0..k.n()).map(|i| (0..k.n()).map(|j| k.values[(i, j)]).collect()).collect());
        prop_assert!(w.iter().all(|&v| v > -1e-10));
    }

    #[test]
    fn geometric_difference_of_identical_kernels_is_at_most_one(rows in points(2), lambda in 1e-6f64..1.0) {
        let k = normalize_kernel(&quantum_kernel_scaled(&rows, &EncodingSpec::angle(2), KernelMode::Exact).unwrap()).unwrap();
        let g = geometric_difference(&k, &k, lambda).unwrap();
        prop_assert!(g <= 1.0 + 1e-9);
    }

    #[test]
    fn geometric_difference_is_invariant_to_joint_scaling(rows in points(2), s in 0.1f64..10.0) {
        let k_q = normalize_kernel(&quantum_kernel_scaled(&rows, &EncodingSpec::iqp(2), KernelMode::Exact).unwrap()).unwrap();
        let n = rows.len();
        let lin = DMatrix::from_fn(n, n, |i, j| rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum::<f64>() + if i == j { 0.1 } else { 0.0 });
        let k_c = KernelMatrix::from_values(lin.clone(), KernelSource::Classical).unwrap();
        let k_c_scaled = KernelMatrix::from_values(lin * s, KernelSource::Classical).unwrap();
        let k_q_scaled = KernelMatrix::from_values(&k_q.values * s, KernelSource::QuantumExact).unwrap();
        let g = geometric_difference(&k_c, &k_q, 0.0).unwrap();
        let g2 = geometric_difference(&k_c_scaled, &k_q_scaled, 0.0).unwrap();
        prop_assert!((g - g2).abs() < 1e-7 * g.max(1.0));
    }

    #[test]
    fn svm_dual_is_feasible(rows in points(2), c in 0.1f64..10.0, flips in prop::collection::vec(any::<bool>(), 7)) {
        let n = rows.len();
        let mut y: Vec<f64> = (0..n).map(|i| if flips[i] { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let k = quantum_kernel_scaled(&rows, &EncodingSpec::angle(2), KernelMode::Exact).unwrap();
        let m = train_svm_with(&k.values, &y, &SvmConfig { c, ..SvmConfig::default() }).unwrap();
        let balance: f64 = m.dual_coefficients.iter().sum();
        prop_assert!(balance.abs() < 1e-9);
        for (b, yi) in m.dual_coefficients.iter().zip(&y) {
            prop_assert!(b * yi >= -1e-12 && b.abs() <= c + 1e-12);
        }
        prop_assert!(model_complexity(&m) <= c * (n as f64).sqrt() + 1e-9);
    }

    #[test]
    fn mitigation_lands_on_a_nearest_codeword(n in 1usize..=12, raw in any::<u32>()) {
        let bits = raw as usize & ((1 << n) - 1);
        let i = mitigate_index(bits);
        prop_assert!(i < n);
        let dist = |j: usize| (bits ^ (1 << j)).count_ones();
        prop_assert!((0..n).all(|j| dist(i) <= dist(j)));
        if bits.count_ones() == 1 {
            prop_assert_eq!(1usize << i, bits);
        }
        let via_strings = mitigate(&[index_to_bitstring(bits, n)], n).unwrap();
        prop_assert_eq!(via_strings, vec![i]);
    }

    #[test]
    fn empirical_distribution_sums_to_one(k in 1usize..=8, raw in prop::collection::vec(any::<u8>(), 1..50)) {
        let idx: Vec<usize> = raw.iter().map(|&r| r as usize % k).collect();
        let d = empirical_distribution(&idx, k).unwrap();
        let total: f64 = d.probabilities.values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(d.probabilities.keys().all(|b| b.matches('1').count() == 1));
    }

    #[test]
    fn split_is_a_partition(n in 3usize..200, seed in any::<u64>()) {
        let s = split(n, (0.6, 0.2, 0.2), seed).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.cal).chain(&s.test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn metric_identities(pred in prop::collection::vec(0.0f32..10.0, 1..200), shift in -2.0f32..2.0, thr in 0.5f64..9.5) {
        let truth: Vec<f32> = pred.iter().enumerate().map(|(i, v)| (v + shift * ((i % 3) as f32 - 1.0)).max(0.0)).collect();
        let t = contingency(&pred, &truth, thr, Product::Vil, 0).unwrap();
        prop_assert_eq!(t.total() as usize, pred.len());
        let m = metrics(&t);
        if let (Some(pod), Some(sucr), Some(bias)) = (m.pod, m.sucr, m.bias) {
            if sucr > 0.0 {
                prop_assert!((bias - pod / sucr).abs() < 1e-12);
            }
            let csi = m.csi.unwrap();
            prop_assert!(csi <= pod.min(sucr) + 1e-15);
        }
    }

    #[test]
    fn calibration_is_monotone(
        pred in prop::collection::vec(0.0f64..50.0, 2..300),
        truth in prop::collection::vec(0.0f64..80.0, 2..300),
        probes in prop::collection::vec(-10.0f64..100.0, 2..20),
    ) {
        let map = fit_calibration(&pred, &truth).unwrap();
        prop_assert!(map.knots_in.windows(2).all(|w| w[0] < w[1]));
        let mut probes = probes;
        probes.sort_by(f64::total_cmp);
        let out: Vec<f64> = probes.iter().map(|&x| map.map(x)).collect();
        prop_assert!(out.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let (lo, hi) = (truth.iter().cloned().fold(f64::INFINITY, f64::min), truth.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        prop_assert!(out.iter().all(|&v| v >= lo - 1e-9 && v <= hi + 1e-9));
    }

    #[test]
    fn quanvolution_features_are_bounded(angles in prop::collection::vec(0.0..PI, 4), seed in any::<u64>(), iqp in any::<bool>()) {
        let kind = if iqp { EncodingKind::Iqp } else { EncodingKind::Angle };
        let spec = QuanvLayerSpec::new(kind, 2, 2, 3, 64, seed);
        let circuit = qkscreen::featuremaps::random_quanv_circuit(&spec.circuit).unwrap();
        for mode in [QuanvMode::Exact, QuanvMode::Sampled { seed }] {
            let f = quanvolve_angles(&angles, &spec, &circuit, mode).unwrap();
            prop_assert_eq!(f.len(), 4);
            prop_assert!(f.iter().all(|v| (-1.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn heavy_ridge_predicts_the_target_mean() {
    let x = DMatrix::from_fn(50, 3, |i, j| ((i * 7 + j * 3) % 11) as f64);
    let y = DMatrix::from_fn(50, 2, |i, j| (i as f64) * (j as f64 + 1.0));
    let model = fit_readout(&x, &y, 1e12).unwrap();
    let pred = model.predict(&x).unwrap();
    for c in 0..2 {
        let mean = y.column(c).mean();
        assert!(pred.column(c).iter().all(|p| (p - mean).abs() < 1e-6));
    }
}
