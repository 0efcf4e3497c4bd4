//! Properties of the state-vector and density-matrix simulators, the
//! quantum kernel, the neighbourhood metrics and the qubit bounds.

mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qpga::bounds::{budget_for_components, max_qubits, min_qubits, system_error, NoiseBudget, QubitLimit};
use qpga::drmetrics::{continuity, trust_continuity_curve, trustworthiness, DistanceKind};
use qpga::qsim::{
    amplitude_encode, evolve, quantum_kernel, DensityMatrix, Gate, KernelBackend, NoiseSpec, QuantumState, Register,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gates(rng: &mut ChaCha8Rng, qubits: usize, count: usize) -> Vec<Gate> {
    (0..count)
        .map(|_| {
            let a = rng.gen_range(0..qubits);
            let mut b = rng.gen_range(0..qubits);
            if b == a {
                b = (a + 1) % qubits;
            }
            let t = rng.gen_range(-4.0..4.0);
            match rng.gen_range(0..5) {
                0 => Gate::rx(a, t),
                1 => Gate::ry(a, t),
                2 => Gate::rz(a, t),
                3 if qubits > 1 => Gate::cz(a, b),
                4 if qubits > 1 => Gate::cx(a, b),
                _ => Gate::ry(a, t),
            }
        })
        .collect()
}

proptest! {
    #[test]
    fn gates_preserve_norm(seed in any::<u64>(), qubits in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_unit(&mut rng, 1 << qubits);
        let mut state = amplitude_encode(&x, qubits).unwrap();
        for g in random_gates(&mut rng, qubits, 30) {
            state.apply(&g).unwrap();
        }
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(state.expectation_x_all().abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn kernel_symmetric_and_in_unit_range(seed in any::<u64>(), dim in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_unit(&mut rng, dim), random_unit(&mut rng, dim));
        for backend in [KernelBackend::Analytic, KernelBackend::Circuit] {
            let kxy = quantum_kernel(&x, &y, backend).unwrap();
            let kyx = quantum_kernel(&y, &x, backend).unwrap();
            prop_assert!((kxy - kyx).abs() < 1e-12);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&kxy));
            prop_assert!((quantum_kernel(&x, &x, backend).unwrap() - 1.0).abs() < 1e-12);
        }
        let analytic = quantum_kernel(&x, &y, KernelBackend::Analytic).unwrap();
        prop_assert!((analytic - dot(&x, &y).powi(2)).abs() < 1e-12);
        prop_assert!((quantum_kernel(&x, &y, KernelBackend::Circuit).unwrap() - analytic).abs() < 1e-10);
    }

    #[test]
    fn qubit_bounds_bracket_the_error_budget(p in 1e-4f64..0.2, ratio in 1.0f64..20.0, d in 1usize..300) {
        let budget = NoiseBudget::new(p, (p * ratio).min(0.999)).unwrap();
        let q_min = min_qubits(d);
        prop_assert!(1u64 << q_min >= d as u64);
        prop_assert!(q_min == 0 || (1u64 << (q_min - 1)) < d as u64);
        if let QubitLimit::Finite(q_max) = max_qubits(&budget) {
            prop_assert!(system_error(budget.p, q_max) <= budget.p_max + 1e-12);
            prop_assert!(system_error(budget.p, q_max + 1) > budget.p_max - 1e-12);
        }
        let b = budget_for_components(d, &budget);
        prop_assert_eq!(b.feasible, max_qubits(&budget).admits(q_min));
    }
}

#[test]
fn density_matches_pure_state_without_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for qubits in 1..=3 {
        let x = random_unit(&mut rng, 1 << qubits);
        let state = amplitude_encode(&x, qubits).unwrap();
        let gates = random_gates(&mut rng, qubits, 25);
        let pure = evolve(Register::Pure(state.clone()), &gates, None).unwrap();
        let mixed = evolve(Register::Mixed(DensityMatrix::from_pure(&state)), &gates, None).unwrap();
        let (Register::Pure(psi), Register::Mixed(rho)) = (pure, mixed) else { panic!("register kind changed") };
        let a = psi.amplitudes();
        for i in 0..a.len() {
            for j in 0..a.len() {
                assert!((rho.get(i, j) - a[i] * a[j].conj()).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn noisy_evolution_stays_a_density_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let noise = NoiseSpec::new(0.05, 0.1).unwrap();
    let x = random_unit(&mut rng, 8);
    let rho = DensityMatrix::from_pure(&amplitude_encode(&x, 3).unwrap());
    let gates = random_gates(&mut rng, 3, 40);
    let Register::Mixed(rho) = evolve(Register::Mixed(rho), &gates, Some(&noise)).unwrap() else {
        panic!("register kind changed")
    };
    assert!((rho.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(rho.hermiticity_defect() < 1e-12);
    let purity: f64 = (0..8).flat_map(|i| (0..8).map(move |j| (i, j))).map(|(i, j)| rho.get(i, j).norm_sqr()).sum();
    assert!((1.0 / 8.0 - 1e-12..1.0 - 1e-3).contains(&purity));
    assert!((0..8).all(|i| rho.probability(i) >= -1e-12));

    let pure = QuantumState::zero(2);
    assert!(evolve(Register::Pure(pure), &[Gate::rx(0, 0.3)], Some(&noise)).is_err());
}

/// Brute-force neighbourhood metric written directly from the set
/// definitions: for each point, the high-space k-neighbours that are missing
/// from the low-space k-neighbourhood, penalized by their low-space rank.
fn brute_penalty(from: &[Vec<f64>], to: &[Vec<f64>], k: usize) -> f64 {
    let n = from.len();
    let order = |x: &[Vec<f64>], i: usize| {
        let mut idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        idx.sort_by(|&a, &b| arc(&x[i], &x[a]).total_cmp(&arc(&x[i], &x[b])));
        idx
    };
    let mut sum = 0.0;
    for i in 0..n {
        let (of, ot) = (order(from, i), order(to, i));
        for &j in &of[..k] {
            if !ot[..k].contains(&j) {
                let rank = ot.iter().position(|&m| m == j).unwrap() + 1;
                sum += (rank - k) as f64;
            }
        }
    }
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * sum
}

#[test]
fn trust_and_continuity_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let high: Vec<Vec<f64>> = (0..40).map(|_| random_unit(&mut rng, 6)).collect();
    let low: Vec<Vec<f64>> = high
        .iter()
        .map(|r| {
            let v: Vec<f64> = r[..3].iter().map(|x| x + 0.1 * gaussian(&mut rng)).collect();
            let n = dot(&v, &v).sqrt();
            v.into_iter().map(|x| x / n).collect()
        })
        .collect();
    let g = DistanceKind::Geodesic;
    let curve = trust_continuity_curve(&high, &low, 12, g, g).unwrap();
    for k in 1..=12 {
        let t = trustworthiness(&high, &low, k, g, g).unwrap();
        let c = continuity(&high, &low, k, g, g).unwrap();
        assert!((t - brute_penalty(&high, &low, k)).abs() < 1e-12, "T at k={k}");
        assert!((c - brute_penalty(&low, &high, k)).abs() < 1e-12, "C at k={k}");
        assert_eq!(curve[k - 1], (k, t, c));
        assert!((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&c));
    }
    let ident = trustworthiness(&high, &high, 5, g, DistanceKind::Euclidean).unwrap();
    assert!((ident - 1.0).abs() < 1e-12);
}
