//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! to stderr even when the harness captures test output.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use qpga::bounds::{max_qubits, min_qubits, NoiseBudget, QubitLimit};
use qpga::dataio::{ingest, make_folds, write_synthetic_cifar, DatasetKind, IngestSpec};
use qpga::drmetrics::{coranking_matrix, continuity, reconstruction_error, trust_continuity_curve, trustworthiness, DistanceKind};
use qpga::kernelmap::{apply_feature_map, fit_feature_map, KernelSpec, DEFAULT_LANDMARKS};
use qpga::manifold::{exp_map, frechet_mean, geodesic_distance, log_map, FrechetConfig, SpherePoint};
use qpga::qml::{
    classify_latent, embed_split, loss_and_gradient, summarize, vqc_predict, vqc_train, BinaryMetrics, ClassifierSpec,
    PipelineSpec, TrainConfig, VqcModel,
};
use qpga::qpga::{components_for_variance, fit, inverse_transform, transform, ProjectionMode};
use qpga::qsim::{
    amplitude_encode, evolve, gate_matrix, quantum_kernel, unitarity_defect, DensityMatrix, Gate, GateKind,
    KernelBackend, NoiseSpec, QuantumState, Register,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn within(elapsed: Duration, budget_s: u64) -> bool {
    elapsed <= Duration::from_secs(budget_s)
}

#[test]
fn criterion_01_geometry_suite() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_rt, mut worst_norm) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let mu = random_point(&mut rng, 64);
        let x = random_point(&mut rng, 64);
        if dot(mu.coords(), x.coords()) < -1.0 + 1e-6 {
            continue;
        }
        let v = log_map(&mu, &x).unwrap();
        let back = exp_map(&mu, &v).unwrap();
        worst_rt = worst_rt.max(geodesic_distance(&back, &x).unwrap());
        let n = back.coords().iter().map(|a| a * a).sum::<f64>().sqrt();
        worst_norm = worst_norm.max((n - 1.0).abs());
    }
    let mut triangle_ok = true;
    for _ in 0..1000 {
        let (a, b, c) = (random_point(&mut rng, 64), random_point(&mut rng, 64), random_point(&mut rng, 64));
        let ab = geodesic_distance(&a, &b).unwrap();
        let bc = geodesic_distance(&b, &c).unwrap();
        let ac = geodesic_distance(&a, &c).unwrap();
        triangle_ok &= ac <= ab + bc + 1e-12;
    }
    let el = t.elapsed();
    let ok = worst_rt < 1e-9 && worst_norm < 1e-9 && triangle_ok && within(el, 10);
    let detail = format!(
        "round-trip max {worst_rt:.2e}, unit-norm max dev {worst_norm:.2e}, triangle {triangle_ok}, {:.2}s",
        el.as_secs_f64()
    );
    assert!(report("1 geometry", ok, &detail), "{detail}");
}

fn frechet_objective(p: &[f64], pts: &[Vec<f64>]) -> f64 {
    pts.iter().map(|x| arc(p, x).powi(2)).sum()
}

/// Brute-force minimizer over 10⁶ candidates: a global Fibonacci lattice of
/// 5·10⁵ points, then a 707×707 tangent-plane grid around the best lattice
/// point.
fn grid_frechet(pts: &[Vec<f64>]) -> Vec<f64> {
    let global = 500_000;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = (f64::INFINITY, vec![0.0; 3]);
    for i in 0..global {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / global as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        let p = vec![r * phi.cos(), r * phi.sin(), z];
        let f = frechet_objective(&p, pts);
        if f < best.0 {
            best = (f, p);
        }
    }
    let g = best.1.clone();
    // orthonormal tangent basis at g
    let helper = if g[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&helper, &g);
    let mut u: Vec<f64> = (0..3).map(|i| helper[i] - d * g[i]).collect();
    let un = dot(&u, &u).sqrt();
    u.iter_mut().for_each(|a| *a /= un);
    let v = [g[1] * u[2] - g[2] * u[1], g[2] * u[0] - g[0] * u[2], g[0] * u[1] - g[1] * u[0]];
    let side = 707;
    let half = 1e-2;
    for a in 0..side {
        for b in 0..side {
            let s = -half + 2.0 * half * a as f64 / (side - 1) as f64;
            let t = -half + 2.0 * half * b as f64 / (side - 1) as f64;
            let mut p: Vec<f64> = (0..3).map(|i| g[i] + s * u[i] + t * v[i]).collect();
            let n = dot(&p, &p).sqrt();
            p.iter_mut().for_each(|x| *x /= n);
            let f = frechet_objective(&p, pts);
            if f < best.0 {
                best = (f, p);
            }
        }
    }
    best.1
}

#[test]
fn criterion_02_frechet_oracle() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        // three points within a cap so the minimizer is unique
        let c = random_unit(&mut rng, 3);
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let mut p: Vec<f64> = c.iter().map(|a| a + 0.5 * gaussian(&mut rng)).collect();
                let n = dot(&p, &p).sqrt();
                p.iter_mut().for_each(|a| *a /= n);
                p
            })
            .collect();
        let sp: Vec<SpherePoint> = pts.iter().map(|p| SpherePoint::new(p.clone()).unwrap()).collect();
        let mean = frechet_mean(&sp, &FrechetConfig::default()).unwrap();
        let oracle = grid_frechet(&pts);
        worst = worst.max(arc(mean.coords(), &oracle));
    }
    let el = t.elapsed();
    let ok = worst < 1e-3 && within(el, 60);
    let detail = format!("max geodesic gap to grid minimizer {worst:.2e}, {:.2}s", el.as_secs_f64());
    assert!(report("2 frechet-oracle", ok, &detail), "{detail}");
}

#[test]
fn criterion_03_explained_variance() {
    let t = Instant::now();
    let batch = load_idx(DatasetKind::Mnist, [0, 1], 600, 0);
    let mapper = fit_feature_map(&batch.rows, KernelSpec::linear(), DEFAULT_LANDMARKS, 0).unwrap();
    let x = apply_feature_map(&mapper, &batch.rows).unwrap();
    let model = fit(&x, 4, &FrechetConfig::default(), ProjectionMode::Renormalize).unwrap();
    let gamma4 = model.cumulative_explained_variance();
    let d75 = components_for_variance(&model.spectrum, 0.75).unwrap();
    let el = t.elapsed();
    let ok = batch.len() == 1200 && batch.features() == 64 && gamma4 >= 0.70 && d75 <= 6 && within(el, 30);
    let detail = format!("gamma(4) = {gamma4:.4}, D(beta=0.75) = {d75}, {:.2}s", el.as_secs_f64());
    assert!(report("3 explained-variance", ok, &detail), "{detail}");
}

/// Independent co-ranking count by sorting each neighbor list.
fn brute_coranking(high: &[f64], low: &[f64]) -> Vec<Vec<u64>> {
    let n = high.len();
    let ranks = |x: &[f64]| -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| {
                let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                others.sort_by(|&a, &b| (x[a] - x[i]).abs().partial_cmp(&(x[b] - x[i]).abs()).unwrap().then(a.cmp(&b)));
                let mut r = vec![0; n];
                for (pos, &j) in others.iter().enumerate() {
                    r[j] = pos + 1;
                }
                r
            })
            .collect()
    };
    let (rh, rl) = (ranks(high), ranks(low));
    let mut q = vec![vec![0u64; n - 1]; n - 1];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                q[rh[i][j] - 1][rl[i][j] - 1] += 1;
            }
        }
    }
    q
}

#[test]
fn criterion_04_metric_suite() {
    let batch = load_idx(DatasetKind::Mnist, [0, 1], 480, 0);
    let pts: Vec<SpherePoint> = batch.rows.iter().map(|r| SpherePoint::normalize(r.clone()).unwrap()).collect();
    let curve = trust_continuity_curve(&pts, &pts, 50, DistanceKind::Geodesic, DistanceKind::Geodesic).unwrap();
    let identity_ok = curve.len() == 50 && curve.iter().all(|&(_, t, c)| t == 1.0 && c == 1.0);
    let q = coranking_matrix(&pts, &pts, DistanceKind::Geodesic, DistanceKind::Geodesic).unwrap();
    let n = pts.len() as u64;
    let sum_ok = q.total() == n * (n - 1) && q.trace() == n * (n - 1);

    let high = [0.0, 1.0, 2.5, 4.5, 7.0];
    let low = [0.0, 2.5, 1.0, 4.5, 7.0];
    let rows = |v: &[f64]| v.iter().map(|&a| vec![a]).collect::<Vec<_>>();
    let q5 = coranking_matrix(&rows(&high), &rows(&low), DistanceKind::Euclidean, DistanceKind::Euclidean).unwrap();
    let hand_ok = q5.counts == brute_coranking(&high, &low);
    let t2 = trustworthiness(&rows(&high), &rows(&low), 2, DistanceKind::Euclidean, DistanceKind::Euclidean).unwrap();
    let c2 = continuity(&rows(&high), &rows(&low), 2, DistanceKind::Euclidean, DistanceKind::Euclidean).unwrap();
    let tc_ok = (t2 - 11.0 / 15.0).abs() < 1e-15 && (c2 - 11.0 / 15.0).abs() < 1e-15;
    let collinear = [0.0, 1.0, 3.0, 6.0];
    let flipped = [6.0, 4.0, 3.0, 0.0];
    let q4 = coranking_matrix(&rows(&collinear), &rows(&flipped), DistanceKind::Euclidean, DistanceKind::Euclidean).unwrap();
    let hand4_ok = q4.counts == brute_coranking(&collinear, &flipped) && q4.counts == vec![vec![3, 1, 0], vec![1, 3, 0], vec![0, 0, 4]];

    let ok = identity_ok && sum_ok && hand_ok && tc_ok && hand4_ok;
    let detail = format!(
        "identity T=C=1 for k=1..50 on {n}: {identity_ok}; Q sum n(n-1): {sum_ok}; 5-point Q: {hand_ok}; T(2)=C(2)=11/15: {tc_ok}; 4-point Q: {hand4_ok}"
    );
    assert!(report("4 metric-suite", ok, &detail), "{detail}");
}

#[test]
fn criterion_05_bounds() {
    let basic = min_qubits(4) == 2 && min_qubits(16) == 4 && max_qubits(&NoiseBudget::new(0.01, 0.05).unwrap()) == QubitLimit::Finite(5);
    let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.045).collect();
    let mut mono = true;
    for (a, &p) in grid.iter().enumerate() {
        for (b, &pm) in grid.iter().enumerate() {
            let here = max_qubits(&NoiseBudget::new(p, pm).unwrap());
            if a + 1 < grid.len() {
                mono &= max_qubits(&NoiseBudget::new(grid[a + 1], pm).unwrap()) <= here;
            }
            if b + 1 < grid.len() {
                mono &= max_qubits(&NoiseBudget::new(p, grid[b + 1]).unwrap()) >= here;
            }
        }
    }
    mono &= (1..4096usize).all(|d| min_qubits(d) <= min_qubits(d + 1));
    let ok = basic && mono;
    let detail = format!("closed-form examples {basic}; monotonicity over 400-point grid {mono}");
    assert!(report("5 bounds", ok, &detail), "{detail}");
}

fn random_gates(rng: &mut ChaCha8Rng, qubits: usize, count: usize) -> Vec<Gate> {
    (0..count)
        .map(|_| {
            let angle = rng.gen_range(-3.2..3.2);
            let a = rng.gen_range(0..qubits);
            let b = (a + rng.gen_range(1..qubits)) % qubits;
            match rng.gen_range(0..5) {
                0 => Gate::rx(a, angle),
                1 => Gate::ry(a, angle),
                2 => Gate::rz(a, angle),
                3 => Gate::cz(a, b),
                _ => Gate::cx(a, b),
            }
        })
        .collect()
}

fn random_state(rng: &mut ChaCha8Rng, qubits: usize) -> QuantumState {
    let dim = 1 << qubits;
    let v: Vec<f64> = (0..2 * dim).map(|_| gaussian(rng)).collect();
    let n = dot(&v, &v).sqrt();
    QuantumState::from_amplitudes((0..dim).map(|i| C64::new(v[2 * i] / n, v[2 * i + 1] / n)).collect()).unwrap()
}

fn as_matrix(rho: &DensityMatrix) -> DMatrix<C64> {
    let d = rho.dim();
    DMatrix::from_fn(d, d, |i, j| rho.get(i, j))
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn pauli_matrix(k: usize) -> DMatrix<C64> {
    let p = qpga::qsim::pauli(k);
    DMatrix::from_row_slice(2, 2, &p)
}

#[test]
fn criterion_06_simulator_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // unitarity
    let mut worst_u = 0.0f64;
    for kind in [GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::CZ, GateKind::CX] {
        for _ in 0..50 {
            worst_u = worst_u.max(unitarity_defect(&gate_matrix(kind, rng.gen_range(-7.0..7.0))));
        }
    }

    // Kraus completeness of the single-qubit twirl and agreement of the
    // simulator's channel with explicit Kraus application
    let mut worst_kraus = 0.0f64;
    let mut worst_channel = 0.0f64;
    for p in [0.01f64, 0.15, 0.2, 1.0] {
        let kraus: Vec<DMatrix<C64>> = (0..4)
            .map(|k| pauli_matrix(k) * C64::new(if k == 0 { (1.0f64 - p).sqrt() } else { (p / 3.0f64).sqrt() }, 0.0))
            .collect();
        let completeness: DMatrix<C64> = kraus.iter().map(|k| k.adjoint() * k).fold(DMatrix::zeros(2, 2), |a, b| a + b);
        worst_kraus = worst_kraus.max(max_abs(&(completeness - DMatrix::identity(2, 2))));
        let mut rho = DensityMatrix::from_pure(&random_state(&mut rng, 1));
        let before = as_matrix(&rho);
        rho.depolarize_1q(0, p).unwrap();
        let want: DMatrix<C64> = kraus.iter().map(|k| k * &before * k.adjoint()).fold(DMatrix::zeros(2, 2), |a, b| a + b);
        worst_channel = worst_channel.max(max_abs(&(as_matrix(&rho) - want)));
    }
    // p1 = 1 closed form: -(1/3)ρ + (2/3)I
    let mut rho = DensityMatrix::from_pure(&random_state(&mut rng, 1));
    let before = as_matrix(&rho);
    rho.depolarize_1q(0, 1.0).unwrap();
    let closed = before * C64::new(-1.0 / 3.0, 0.0) + DMatrix::identity(2, 2) * C64::new(2.0 / 3.0, 0.0);
    let full_ok = max_abs(&(as_matrix(&rho) - closed)) < 1e-12;

    // trace, Hermiticity and PSD under noisy evolution
    let (mut worst_tr, mut worst_herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for p in [0.01, 0.15, 0.2] {
        let noise = NoiseSpec::uniform(p).unwrap();
        for _ in 0..30 {
            let gates = random_gates(&mut rng, 2, 12);
            let reg = Register::Mixed(DensityMatrix::from_pure(&random_state(&mut rng, 2)));
            let Register::Mixed(out) = evolve(reg, &gates, Some(&noise)).unwrap() else { unreachable!() };
            worst_tr = worst_tr.max((out.trace() - 1.0).norm());
            worst_herm = worst_herm.max(out.hermiticity_defect());
            let m = as_matrix(&out);
            let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            let e = SymmetricEigen::new(herm).eigenvalues;
            min_eig = min_eig.min(e.iter().cloned().fold(f64::INFINITY, f64::min));
        }
    }

    // pure vs zero-noise density expectation
    let mut worst_agree = 0.0f64;
    let zero = NoiseSpec::uniform(0.0).unwrap();
    for _ in 0..100 {
        let gates = random_gates(&mut rng, 2, 10);
        let psi = random_state(&mut rng, 2);
        let pure = evolve(Register::Pure(psi.clone()), &gates, None).unwrap().expectation_x_all();
        let mixed = evolve(Register::Mixed(DensityMatrix::from_pure(&psi)), &gates, Some(&zero)).unwrap().expectation_x_all();
        worst_agree = worst_agree.max((pure - mixed).abs());
    }

    // analytic vs circuit kernel
    let mut worst_kernel = 0.0f64;
    for i in 0..100 {
        let dim = if i % 2 == 0 { 4 } else { 3 };
        let x = random_unit(&mut rng, dim);
        let y = random_unit(&mut rng, dim);
        let a = quantum_kernel(&x, &y, KernelBackend::Analytic).unwrap();
        let c = quantum_kernel(&x, &y, KernelBackend::Circuit).unwrap();
        worst_kernel = worst_kernel.max((a - c).abs());
    }
    let encode_ok = amplitude_encode(&[3.0, 4.0], 1).is_ok();

    let ok = worst_u < 1e-12
        && worst_kraus < 1e-12
        && worst_channel < 1e-12
        && full_ok
        && worst_tr < 1e-9
        && worst_herm < 1e-9
        && min_eig >= -1e-9
        && worst_agree < 1e-9
        && worst_kernel < 1e-10
        && encode_ok;
    let detail = format!(
        "unitarity {worst_u:.1e}; Kraus completeness {worst_kraus:.1e}; channel vs Kraus {worst_channel:.1e}; p=1 closed form {full_ok}; \
         trace {worst_tr:.1e}; hermiticity {worst_herm:.1e}; min eigenvalue {min_eig:.2e}; pure/density {worst_agree:.1e}; \
         kernel backends {worst_kernel:.1e}"
    );
    assert!(report("6 simulator", ok, &detail), "{detail}");
}

#[test]
fn criterion_07_gradient_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-5;
    let (mut worst_e, mut worst_l) = (0.0f64, 0.0f64);
    for c in 0..20 {
        let model = VqcModel::random(2, 3, 100 + c);
        let circuit = model.circuit();
        let x = random_unit(&mut rng, 4);
        let input = amplitude_encode(&x, 2).unwrap();
        let g = qpga::qsim::parameter_shift_gradient(&circuit, &model.params, &input).unwrap();
        for i in 0..model.params.len() {
            let mut p = model.clone();
            p.params[i] += h;
            let up = p.expectation(&x, None).unwrap();
            p.params[i] -= 2.0 * h;
            let down = p.expectation(&x, None).unwrap();
            worst_e = worst_e.max((g[i] - (up - down) / (2.0 * h)).abs());
        }
        // composed sigmoid + cross-entropy loss over a small batch
        let rows: Vec<Vec<f64>> = (0..4).map(|_| random_unit(&mut rng, 4)).collect();
        let y: Vec<u8> = (0..4).map(|k| (k % 2) as u8).collect();
        let (_, grad) = loss_and_gradient(&model, &rows, &y, None).unwrap();
        for i in 0..model.params.len() {
            let mut p = model.clone();
            p.params[i] += h;
            let up = loss_and_gradient(&p, &rows, &y, None).unwrap().0;
            p.params[i] -= 2.0 * h;
            let down = loss_and_gradient(&p, &rows, &y, None).unwrap().0;
            worst_l = worst_l.max((grad[i] - (up - down) / (2.0 * h)).abs());
        }
    }
    let ok = worst_e < 1e-6 && worst_l < 1e-6;
    let detail = format!("expectation gradient max err {worst_e:.2e}; loss gradient max err {worst_l:.2e} (20 circuits, q=2, L=3)");
    assert!(report("7 gradients", ok, &detail), "{detail}");
}

struct FoldRun {
    accuracy: f64,
    f1: f64,
    decreasing_folds: usize,
}

/// Five-fold run on 400 MNIST 0/1 points with the given mode and classifier.
fn mnist_folds(mode: ProjectionMode, vqc: bool) -> FoldRun {
    let batch = load_idx(DatasetKind::Mnist, [0, 1], 200, 0);
    let y = batch.binary_labels();
    let folds = make_folds(&y, 5, 0.8, 0).unwrap();
    let spec = if vqc { PipelineSpec::vqc(4, mode) } else { PipelineSpec::qsvm(4, mode) };
    let mut metrics = Vec::new();
    let mut decreasing_folds = 0;
    for (f, fold) in folds.folds.iter().enumerate() {
        let pick = |idx: &[usize]| idx.iter().map(|&i| batch.rows[i].clone()).collect::<Vec<_>>();
        let split = embed_split(&spec, &pick(&fold.train), &pick(&fold.test)).unwrap();
        let y_train: Vec<u8> = fold.train.iter().map(|&i| y[i]).collect();
        let y_test: Vec<u8> = fold.test.iter().map(|&i| y[i]).collect();
        let seed = spec.seed + f as u64;
        let pred = match &spec.classifier {
            ClassifierSpec::Vqc { layers, train } => {
                let init = VqcModel::random(2, *layers, seed);
                let out = vqc_train(&split.train, &y_train, &init, &TrainConfig { seed, ..*train }).unwrap();
                if out.loss_history[..5].windows(2).all(|w| w[1] < w[0]) {
                    decreasing_folds += 1;
                }
                split.test.iter().map(|x| vqc_predict(&out.model, x, None).unwrap().1).collect()
            }
            c => classify_latent(c, &split.train, &y_train, &split.test, seed).unwrap(),
        };
        metrics.push(BinaryMetrics::from_predictions(&y_test, &pred).unwrap());
    }
    let r = summarize(metrics);
    FoldRun { accuracy: r.mean_accuracy, f1: r.mean_f1, decreasing_folds }
}

#[test]
fn criterion_08_end_to_end_qsvm() {
    let t = Instant::now();
    let r = mnist_folds(ProjectionMode::Renormalize, false);
    let el = t.elapsed();
    let ok = r.accuracy >= 0.97 && r.f1 >= 0.97 && within(el, 300);
    let detail = format!("renormalize: accuracy {:.4}, F1 {:.4}, {:.2}s", r.accuracy, r.f1, el.as_secs_f64());
    assert!(report("8 qsvm-end-to-end", ok, &detail), "{detail}");
}

#[test]
fn criterion_08_supplement_exp_basepoint_qsvm() {
    let r = mnist_folds(ProjectionMode::ExpBasepoint, false);
    let ok = r.accuracy >= 0.97 && r.f1 >= 0.97;
    let detail = format!("exp_basepoint: accuracy {:.4}, F1 {:.4}", r.accuracy, r.f1);
    assert!(report("8-supplement qsvm-exp-basepoint", ok, &detail), "{detail}");
}

#[test]
fn criterion_09_end_to_end_vqc() {
    let r = mnist_folds(ProjectionMode::Renormalize, true);
    let ok = r.accuracy >= 0.95 && r.decreasing_folds >= 4;
    let detail = format!(
        "renormalize: accuracy {:.4}, F1 {:.4}, loss strictly decreasing over 5 epochs in {}/5 folds",
        r.accuracy, r.f1, r.decreasing_folds
    );
    assert!(report("9 vqc-end-to-end", ok, &detail), "{detail}");
}

#[test]
fn criterion_09_supplement_exp_basepoint_vqc() {
    let r = mnist_folds(ProjectionMode::ExpBasepoint, true);
    let ok = r.accuracy >= 0.95 && r.decreasing_folds >= 4;
    let detail = format!(
        "exp_basepoint: accuracy {:.4}, F1 {:.4}, loss strictly decreasing over 5 epochs in {}/5 folds",
        r.accuracy, r.f1, r.decreasing_folds
    );
    assert!(report("9-supplement vqc-exp-basepoint", ok, &detail), "{detail}");
}

#[test]
fn criterion_10_noise_degradation() {
    // 150 training and 50 held-out samples per run; the trained model is
    // fixed and only the evaluation noise changes.
    let batch = load_idx(DatasetKind::Fmnist, [0, 7], 100, 10);
    let y = batch.binary_labels();
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) = (0..batch.len()).partition(|&i| i < 150);
    let pick = |idx: &[usize]| idx.iter().map(|&i| batch.rows[i].clone()).collect::<Vec<_>>();
    let spec = PipelineSpec::vqc(4, ProjectionMode::ExpBasepoint);
    let split = embed_split(&spec, &pick(&train_idx), &pick(&test_idx)).unwrap();
    let y_train: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
    let y_test: Vec<u8> = test_idx.iter().map(|&i| y[i]).collect();
    let ClassifierSpec::Vqc { layers, train } = spec.classifier else { unreachable!() };
    let out = vqc_train(&split.train, &y_train, &VqcModel::random(2, layers, 0), &train).unwrap();
    let acc = |noise: Option<NoiseSpec>| {
        let pred: Vec<u8> = split.test.iter().map(|x| vqc_predict(&out.model, x, noise.as_ref()).unwrap().1).collect();
        BinaryMetrics::from_predictions(&y_test, &pred).unwrap().accuracy
    };
    let clean = acc(None);
    let a01 = acc(Some(NoiseSpec::uniform(0.01).unwrap()));
    let a15 = acc(Some(NoiseSpec::uniform(0.15).unwrap()));
    let a20 = acc(Some(NoiseSpec::uniform(0.2).unwrap()));
    let ok = test_idx.len() == 50 && a20 <= a01 && (clean - a01).abs() <= 0.05;
    let detail = format!("50 FMNIST test samples: noiseless {clean:.2}, p=0.01 {a01:.2}, p=0.15 {a15:.2}, p=0.2 {a20:.2}");
    assert!(report("10 noise-degradation", ok, &detail), "{detail}");
}

#[test]
fn criterion_11_non_invertibility() {
    let t = Instant::now();
    let batch = load_idx(DatasetKind::Mnist, [0, 1], 600, 0);
    let mapper = fit_feature_map(&batch.rows, KernelSpec::linear(), DEFAULT_LANDMARKS, 0).unwrap();
    let x = apply_feature_map(&mapper, &batch.rows).unwrap();
    let full = fit(&x, 16, &FrechetConfig::default(), ProjectionMode::Renormalize).unwrap();
    let err = |d: usize| {
        let m = full.truncated(d).unwrap();
        let rec = inverse_transform(&m, &transform(&m, &x).unwrap()).unwrap();
        reconstruction_error(&x, &rec).unwrap()
    };
    let (e4, e16) = (err(4), err(16));
    let mnist_ok = e4 > 0.0 && e4 > e16;

    // CIFAR-format sweep at N = 1024 on seeded synthetic records
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data_batch_synthetic.bin");
    write_synthetic_cifar(&path, 2000, 11).unwrap();
    let spec = IngestSpec {
        dataset: DatasetKind::Cifar10,
        paths: vec![path],
        classes: [0, 1],
        samples_per_class: 200,
        resize: None,
        seed: 0,
    };
    let cifar = ingest(&spec).unwrap();
    let pts: Vec<SpherePoint> = cifar.rows.iter().map(|r| SpherePoint::normalize(r.clone()).unwrap()).collect();
    let cfull = fit(&pts, 32, &FrechetConfig::default(), ProjectionMode::Renormalize).unwrap();
    let cerr: Vec<f64> = [4, 16, 32]
        .iter()
        .map(|&d| {
            let m = cfull.truncated(d).unwrap();
            let rec = inverse_transform(&m, &transform(&m, &pts).unwrap()).unwrap();
            reconstruction_error(&pts, &rec).unwrap()
        })
        .collect();
    let el = t.elapsed();
    let ok = mnist_ok && cifar.features() == 1024 && within(el, 600);
    let detail = format!(
        "MNIST MSE D=4 {e4:.5} vs D=16 {e16:.5}; CIFAR-format N=1024 MSE D=4/16/32 {:.5}/{:.5}/{:.5}; {:.2}s",
        cerr[0],
        cerr[1],
        cerr[2],
        el.as_secs_f64()
    );
    assert!(report("11 non-invertibility", ok, &detail), "{detail}");
}
