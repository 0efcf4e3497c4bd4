//! Quantum classifiers on latent points: a kernel SVM over the fidelity
//! kernel and a variational circuit classifier, plus fold evaluation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::FoldedDataset;
use crate::error::{check_dim, Error, Result};
use crate::kernelmap::{apply_feature_map, fit_feature_map, KernelSpec, DEFAULT_LANDMARKS};
use crate::manifold::{FrechetConfig, SpherePoint};
use crate::qpga::{self, ProjectionMode};
use crate::qsim::{
    amplitude_encode, evolve, parameter_shift_gradient, quantum_kernel, qubits_for, Circuit, DensityMatrix, GateKind,
    GateOp, KernelBackend, NoiseSpec, Param, QuantumState, Register,
};

/// Fidelity-kernel matrix between two row sets.
pub fn kernel_matrix<A: AsRef<[f64]>, B: AsRef<[f64]>>(a: &[A], b: &[B], backend: KernelBackend) -> Result<Vec<Vec<f64>>> {
    if let (Some(x), Some(y)) = (a.first(), b.first()) {
        check_dim(x.as_ref().len(), y.as_ref().len())?;
    }
    a.iter()
        .map(|x| b.iter().map(|y| quantum_kernel(x.as_ref(), y.as_ref(), backend)).collect())
        .collect()
}

/// Labels `{0, 1}` → `{-1, +1}`.
pub fn signed_labels(y: &[u8]) -> Vec<i8> {
    y.iter().map(|&l| if l == 0 { -1 } else { 1 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Box constraint.
    pub c: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Cap on pair updates.
    pub max_updates: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-3, max_updates: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub support_indices: Vec<usize>,
    pub c: f64,
    pub labels: Vec<i8>,
    pub updates: usize,
}

impl SvmModel {
    /// Dual objective `½ Σ αᵢαⱼyᵢyⱼKᵢⱼ − Σ αᵢ` (minimized).
    pub fn dual_objective(&self, k: &[Vec<f64>]) -> f64 {
        dual_objective(&self.alphas, &self.labels, k)
    }

    pub fn decision_value(&self, k_row: &[f64]) -> Result<f64> {
        check_dim(self.alphas.len(), k_row.len())?;
        Ok(self
            .support_indices
            .iter()
            .map(|&i| self.alphas[i] * self.labels[i] as f64 * k_row[i])
            .sum::<f64>()
            + self.bias)
    }
}

pub fn dual_objective(alphas: &[f64], y: &[i8], k: &[Vec<f64>]) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alphas[i] * alphas[j] * (y[i] * y[j]) as f64 * k[i][j];
        }
    }
    0.5 * quad - alphas.iter().sum::<f64>()
}

/// Sequential minimal optimization of the C-SVM dual with
/// maximal-violating-pair working-set selection.
pub fn svm_train(k: &[Vec<f64>], y: &[i8], cfg: &SvmConfig) -> Result<SvmModel> {
    let n = k.len();
    check_dim(n, y.len())?;
    for row in k {
        check_dim(n, row.len())?;
    }
    if y.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::InvalidConfig("SVM labels must be -1 or +1".into()));
    }
    if !(cfg.c > 0.0 && cfg.tol > 0.0) {
        return Err(Error::InvalidConfig("C and tol must be positive".into()));
    }
    let c = cfg.c;
    let yf: Vec<f64> = y.iter().map(|&l| l as f64).collect();
    let q = |i: usize, j: usize| yf[i] * yf[j] * k[i][j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi < 0.0 && a < c) || (yi > 0.0 && a > 0.0);
    let mut updates = 0;
    loop {
        let (mut gmax, mut i) = (f64::NEG_INFINITY, usize::MAX);
        let (mut gmin, mut j) = (f64::INFINITY, usize::MAX);
        for t in 0..n {
            let v = -yf[t] * grad[t];
            if in_up(alpha[t], yf[t]) && v > gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], yf[t]) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < cfg.tol {
            break;
        }
        if updates >= cfg.max_updates {
            return Err(Error::NotConverged(updates));
        }
        updates += 1;
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if yf[i] != yf[j] {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(1e-12);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(1e-12);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // Bias: average over free vectors, otherwise the midpoint of the
    // feasible interval.
    let (mut ub, mut lb, mut free_sum, mut free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = yf[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if yf[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if yf[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 {
        free_sum / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else {
        0.0
    };
    let support_indices = (0..n).filter(|&t| alpha[t] > 0.0).collect();
    Ok(SvmModel { alphas: alpha, bias: -rho, support_indices, c, labels: y.to_vec(), updates })
}

/// `sign(Σ αᵢyᵢK(x, xᵢ) + b)` per test row; an exact zero maps to `+1`.
pub fn svm_predict(model: &SvmModel, k_test: &[Vec<f64>]) -> Result<Vec<i8>> {
    k_test
        .iter()
        .map(|row| model.decision_value(row).map(|v| if v >= 0.0 { 1 } else { -1 }))
        .collect()
}

pub const DEFAULT_LAYERS: usize = 3;
pub const DECISION_THRESHOLD: f64 = 0.5;
const PROB_CLAMP: f64 = 1e-12;

/// Layered ansatz: each layer applies RY then RZ on every qubit, followed by
/// CZ on every unordered qubit pair once. Parameters are ordered by layer,
/// then qubit, then (RY, RZ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqcModel {
    pub qubits: usize,
    pub layers: usize,
    pub params: Vec<f64>,
    pub threshold: f64,
}

impl VqcModel {
    pub fn param_count(qubits: usize, layers: usize) -> usize {
        2 * qubits * layers
    }

    /// Parameters drawn uniformly from `(-π, π)` under `seed`.
    pub fn random(qubits: usize, layers: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = std::f64::consts::PI;
        let params = (0..Self::param_count(qubits, layers)).map(|_| rng.gen_range(-pi..pi)).collect();
        Self { qubits, layers, params, threshold: DECISION_THRESHOLD }
    }

    pub fn zeros(qubits: usize, layers: usize) -> Self {
        Self { qubits, layers, params: vec![0.0; Self::param_count(qubits, layers)], threshold: DECISION_THRESHOLD }
    }

    pub fn circuit(&self) -> Circuit {
        let mut c = Circuit::new(self.qubits);
        for l in 0..self.layers {
            for q in 0..self.qubits {
                let base = 2 * (l * self.qubits + q);
                c.push(GateOp::rotation(GateKind::RY, q, Param::Index(base)));
                c.push(GateOp::rotation(GateKind::RZ, q, Param::Index(base + 1)));
            }
            for a in 0..self.qubits {
                for b in a + 1..self.qubits {
                    c.push(GateOp { kind: GateKind::CZ, targets: vec![a, b], param: None });
                }
            }
        }
        c
    }

    fn validate(&self) -> Result<()> {
        check_dim(Self::param_count(self.qubits, self.layers), self.params.len())?;
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("non-finite circuit parameter".into()));
        }
        Ok(())
    }

    fn encode(&self, x: &[f64]) -> Result<QuantumState> {
        amplitude_encode(x, self.qubits)
    }

    /// `⟨X⊗…⊗X⟩` after encoding `x` and running the ansatz, optionally with
    /// depolarizing noise after every gate.
    pub fn expectation(&self, x: &[f64], noise: Option<&NoiseSpec>) -> Result<f64> {
        let state = self.encode(x)?;
        let gates = self.circuit().bind(&self.params)?;
        let reg = match noise {
            Some(_) => Register::Mixed(DensityMatrix::from_pure(&state)),
            None => Register::Pure(state),
        };
        Ok(evolve(reg, &gates, noise)?.expectation_x_all())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Probability and label for an expectation value; ties at the threshold
/// map to label 1.
pub fn classify_expectation(e: f64, threshold: f64) -> (f64, u8) {
    let p = sigmoid(e);
    (p, u8::from(p >= threshold))
}

/// Binary cross-entropy with the prediction clamped to `[1e-12, 1 - 1e-12]`.
pub fn bce(p: f64, y: u8) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

pub fn vqc_predict(model: &VqcModel, x: &[f64], noise: Option<&NoiseSpec>) -> Result<(f64, u8)> {
    if x.len() > 1 << model.qubits {
        return Err(Error::DimensionMismatch { expected: 1 << model.qubits, actual: x.len() });
    }
    Ok(classify_expectation(model.expectation(x, noise)?, model.threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Samples per Adam step; `None` means the whole training set.
    pub batch_size: Option<usize>,
    pub seed: u64,
    pub noise: Option<NoiseSpec>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: Some(DEFAULT_BATCH),
            seed: 0,
            noise: None,
        }
    }
}

pub const DEFAULT_BATCH: usize = 8;

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("Adam moments must lie in [0, 1) and epsilon > 0".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        Ok(())
    }
}

/// Mean loss over `rows` and its gradient with respect to the parameters.
///
/// The expectation gradient comes from the parameter-shift rule; the chain
/// through sigmoid and cross-entropy contributes the factor `ŷ - y`.
pub fn loss_and_gradient<R: AsRef<[f64]>>(
    model: &VqcModel,
    rows: &[R],
    y: &[u8],
    noise: Option<&NoiseSpec>,
) -> Result<(f64, Vec<f64>)> {
    check_dim(rows.len(), y.len())?;
    if rows.is_empty() {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    let circuit = model.circuit();
    let mut grad = vec![0.0; model.params.len()];
    let mut loss = 0.0;
    for (x, &label) in rows.iter().zip(y) {
        let e = model.expectation(x.as_ref(), noise)?;
        let p = sigmoid(e);
        loss += bce(p, label);
        let de = match noise {
            None => parameter_shift_gradient(&circuit, &model.params, &model.encode(x.as_ref())?)?,
            Some(n) => noisy_shift_gradient(model, x.as_ref(), n)?,
        };
        let scale = p - label as f64;
        grad.iter_mut().zip(&de).for_each(|(g, d)| *g += scale * d);
    }
    let m = rows.len() as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    let loss = loss / m;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss);
    }
    Ok((loss, grad))
}

/// Parameter-shift gradient evaluated on the density backend. Depolarizing
/// channels do not depend on the angles, so the expectation stays a
/// sinusoid in every rotation angle and the shift rule remains exact.
fn noisy_shift_gradient(model: &VqcModel, x: &[f64], noise: &NoiseSpec) -> Result<Vec<f64>> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut shifted = model.clone();
    (0..model.params.len())
        .map(|i| {
            shifted.params[i] = model.params[i] + half_pi;
            let plus = shifted.expectation(x, Some(noise))?;
            shifted.params[i] = model.params[i] - half_pi;
            let minus = shifted.expectation(x, Some(noise))?;
            shifted.params[i] = model.params[i];
            Ok(0.5 * (plus - minus))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub model: VqcModel,
    /// Mean training loss per epoch (averaged over the epoch's mini-batches,
    /// each evaluated before its update).
    pub loss_history: Vec<f64>,
}

/// Adam over parameter-shift gradients of the mean cross-entropy.
pub fn vqc_train<R: AsRef<[f64]>>(rows: &[R], y: &[u8], init: &VqcModel, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    init.validate()?;
    check_dim(rows.len(), y.len())?;
    if rows.is_empty() {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    for x in rows {
        if x.as_ref().len() > 1 << init.qubits {
            return Err(Error::TooManyAmplitudes { amplitudes: x.as_ref().len(), qubits: init.qubits });
        }
    }
    let mut model = init.clone();
    let p = model.params.len();
    let (mut m, mut v) = (vec![0.0; p], vec![0.0; p]);
    let mut step = 0i32;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let batch = cfg.batch_size.unwrap_or(rows.len()).min(rows.len());
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        if batch < rows.len() {
            order.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| rows[i].as_ref()).collect();
            let ys: Vec<u8> = chunk.iter().map(|&i| y[i]).collect();
            let (loss, grad) = loss_and_gradient(&model, &xs, &ys, cfg.noise.as_ref())?;
            epoch_loss += loss * chunk.len() as f64;
            step += 1;
            let bc1 = 1.0 - cfg.beta1.powi(step);
            let bc2 = 1.0 - cfg.beta2.powi(step);
            for k in 0..p {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                model.params[k] -= cfg.learning_rate * (m[k] / bc1) / ((v[k] / bc2).sqrt() + cfg.epsilon);
            }
        }
        history.push(epoch_loss / rows.len() as f64);
    }
    Ok(TrainOutcome { model, loss_history: history })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

impl BinaryMetrics {
    /// Accuracy and F1 with label 1 as the positive class. With no positive
    /// predictions (precision undefined) F1 is reported as 0.
    pub fn from_predictions(truth: &[u8], pred: &[u8]) -> Result<Self> {
        check_dim(truth.len(), pred.len())?;
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(pred) {
            match (t != 0, p != 0) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(Self::from_confusion(c))
    }

    pub fn from_confusion(c: Confusion) -> Self {
        let total = c.tp + c.fp + c.fn_ + c.tn;
        let accuracy = if total == 0 { 0.0 } else { (c.tp + c.tn) as f64 / total as f64 };
        let f1 = if c.tp + c.fp == 0 || c.tp + c.fn_ == 0 {
            0.0
        } else {
            2.0 * c.tp as f64 / (2 * c.tp + c.fp + c.fn_) as f64
        };
        Self { accuracy, f1, confusion: c }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub per_fold: Vec<BinaryMetrics>,
    pub mean_accuracy: f64,
    pub mean_f1: f64,
}

/// Classifier stage of a [`PipelineSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Qsvm { svm: SvmConfig, backend: KernelBackend },
    Vqc { layers: usize, train: TrainConfig },
}

/// Feature map → qPGA → classifier, fitted per fold on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub kernel: KernelSpec,
    pub landmarks: usize,
    pub components: usize,
    pub mode: ProjectionMode,
    pub frechet: FrechetConfig,
    pub classifier: ClassifierSpec,
    pub seed: u64,
}

impl PipelineSpec {
    pub fn qsvm(components: usize, mode: ProjectionMode) -> Self {
        Self {
            kernel: KernelSpec::linear(),
            landmarks: DEFAULT_LANDMARKS,
            components,
            mode,
            frechet: FrechetConfig::default(),
            classifier: ClassifierSpec::Qsvm { svm: SvmConfig::default(), backend: KernelBackend::Analytic },
            seed: 0,
        }
    }

    pub fn vqc(components: usize, mode: ProjectionMode) -> Self {
        Self {
            classifier: ClassifierSpec::Vqc { layers: DEFAULT_LAYERS, train: TrainConfig::default() },
            ..Self::qsvm(components, mode)
        }
    }
}

/// Latent training and test rows produced by the unsupervised stages.
pub struct LatentSplit {
    pub train: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
    pub model: qpga::QpgaModel,
}

/// Fits the feature map and qPGA on `train` rows and embeds both sets.
pub fn embed_split<R: AsRef<[f64]>>(spec: &PipelineSpec, train: &[R], test: &[R]) -> Result<LatentSplit> {
    let mapper = fit_feature_map(train, spec.kernel, spec.landmarks.min(train.len()), spec.seed)?;
    let ftrain: Vec<SpherePoint> = apply_feature_map(&mapper, train)?;
    let ftest: Vec<SpherePoint> = apply_feature_map(&mapper, test)?;
    let model = qpga::fit(&ftrain, spec.components, &spec.frechet, spec.mode)?;
    let to_rows = |pts: Vec<qpga::LatentPoint>| pts.into_iter().map(|p| p.into_coords()).collect::<Vec<_>>();
    Ok(LatentSplit {
        train: to_rows(qpga::transform(&model, &ftrain)?),
        test: to_rows(qpga::transform(&model, &ftest)?),
        model,
    })
}

/// Trains the classifier on latent training rows and predicts test labels.
pub fn classify_latent(
    classifier: &ClassifierSpec,
    train: &[Vec<f64>],
    y_train: &[u8],
    test: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<u8>> {
    match classifier {
        ClassifierSpec::Qsvm { svm, backend } => {
            let k = kernel_matrix(train, train, *backend)?;
            let model = svm_train(&k, &signed_labels(y_train), svm)?;
            let kt = kernel_matrix(test, train, *backend)?;
            Ok(svm_predict(&model, &kt)?.into_iter().map(|l| u8::from(l > 0)).collect())
        }
        ClassifierSpec::Vqc { layers, train: cfg } => {
            let dim = train.first().map_or(1, Vec::len);
            let init = VqcModel::random(qubits_for(dim), *layers, seed);
            let cfg = TrainConfig { seed, ..*cfg };
            let out = vqc_train(train, y_train, &init, &cfg)?;
            test.iter().map(|x| vqc_predict(&out.model, x, None).map(|(_, l)| l)).collect()
        }
    }
}

/// Runs `spec` on every fold of `rows`/`labels` (labels in `{0, 1}`).
pub fn evaluate_folds<R: AsRef<[f64]>>(
    spec: &PipelineSpec,
    rows: &[R],
    labels: &[u8],
    folds: &FoldedDataset,
) -> Result<FoldReport> {
    if folds.folds.len() < 2 {
        return Err(Error::InvalidConfig("need at least 2 folds".into()));
    }
    let per_fold = (0..folds.folds.len())
        .map(|f| evaluate_fold(spec, rows, labels, folds, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(per_fold))
}

/// Scores fold `f` alone. The classifier seed is `spec.seed + f`, so folds
/// may be evaluated in any order or concurrently with identical results.
pub fn evaluate_fold<R: AsRef<[f64]>>(
    spec: &PipelineSpec,
    rows: &[R],
    labels: &[u8],
    folds: &FoldedDataset,
    f: usize,
) -> Result<BinaryMetrics> {
    check_dim(rows.len(), labels.len())?;
    let fold = folds.folds.get(f).ok_or(Error::EmptyFold(f))?;
    if fold.train.is_empty() || fold.test.is_empty() {
        return Err(Error::EmptyFold(f));
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| rows[i].as_ref()).collect::<Vec<_>>();
    let split = embed_split(spec, &pick(&fold.train), &pick(&fold.test))?;
    let y_train: Vec<u8> = fold.train.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<u8> = fold.test.iter().map(|&i| labels[i]).collect();
    let fold_seed = spec.seed.wrapping_add(f as u64);
    let pred = classify_latent(&spec.classifier, &split.train, &y_train, &split.test, fold_seed)?;
    BinaryMetrics::from_predictions(&y_test, &pred)
}

pub fn summarize(per_fold: Vec<BinaryMetrics>) -> FoldReport {
    let k = per_fold.len().max(1) as f64;
    FoldReport {
        mean_accuracy: per_fold.iter().map(|m| m.accuracy).sum::<f64>() / k,
        mean_f1: per_fold.iter().map(|m| m.f1).sum::<f64>() / k,
        per_fold,
    }
}
