//! Maps raw rows onto the unit sphere, either by plain normalization or
//! through a Nyström approximation of a kernel feature map followed by
//! normalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::manifold::{dot, norm, SpherePoint};

/// Eigenvalues of the landmark kernel matrix below this are dropped.
pub const EIGEN_CLIP: f64 = 1e-12;
/// Default cap on the landmark count.
pub const DEFAULT_LANDMARKS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
    Sigmoid,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "polynomial" | "poly" => Ok(Self::Polynomial),
            "rbf" => Ok(Self::Rbf),
            "sigmoid" => Ok(Self::Sigmoid),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Kernel family and hyper-parameters. A `gamma` of `None` means
/// `1 / n_features`, resolved when a mapper is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub degree: u32,
    pub gamma: Option<f64>,
    pub coef0: f64,
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self { kind: KernelKind::Linear, degree: 1, gamma: None, coef0: 0.0 }
    }

    pub fn polynomial(degree: u32, gamma: Option<f64>, coef0: f64) -> Self {
        Self { kind: KernelKind::Polynomial, degree, gamma, coef0 }
    }

    pub fn rbf(gamma: f64) -> Self {
        Self { kind: KernelKind::Rbf, degree: 1, gamma: Some(gamma), coef0: 0.0 }
    }

    pub fn sigmoid(gamma: f64, coef0: f64) -> Self {
        Self { kind: KernelKind::Sigmoid, degree: 1, gamma: Some(gamma), coef0 }
    }

    /// Hyper-parameters used for the image experiments: cubic polynomial,
    /// RBF with γ = 0.001 and sigmoid with γ = 0.01, coef0 = 0.
    pub fn defaults(kind: KernelKind) -> Self {
        match kind {
            KernelKind::Linear => Self::linear(),
            KernelKind::Polynomial => Self::polynomial(3, None, 1.0),
            KernelKind::Rbf => Self::rbf(0.001),
            KernelKind::Sigmoid => Self::sigmoid(0.01, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree < 1 {
            return Err(Error::InvalidConfig("kernel degree must be >= 1".into()));
        }
        if let Some(g) = self.gamma {
            if !g.is_finite() {
                return Err(Error::InvalidConfig("kernel gamma must be finite".into()));
            }
            if matches!(self.kind, KernelKind::Rbf | KernelKind::Sigmoid) && g <= 0.0 {
                return Err(Error::InvalidConfig("kernel gamma must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Copy with `gamma` filled in for `n_features` inputs.
    pub fn resolved(&self, n_features: usize) -> Self {
        let mut out = *self;
        if out.gamma.is_none() && out.kind != KernelKind::Linear {
            out.gamma = Some(1.0 / n_features.max(1) as f64);
        }
        out
    }

    fn gamma_for(&self, n_features: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / n_features.max(1) as f64)
    }
}

/// Evaluates `k(x, y)` for the given kernel family.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    spec.validate()?;
    Ok(kernel_unchecked(spec, x, y))
}

fn kernel_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    let gamma = spec.gamma_for(x.len());
    match spec.kind {
        KernelKind::Linear => dot(x, y),
        KernelKind::Polynomial => (gamma * dot(x, y) + spec.coef0).powi(spec.degree as i32),
        KernelKind::Rbf => {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            (-gamma * d2).exp()
        }
        KernelKind::Sigmoid => (gamma * dot(x, y) + spec.coef0).tanh(),
    }
}

/// A fitted feature map. For the linear kind it holds no landmarks and
/// simply normalizes rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapper {
    pub spec: KernelSpec,
    pub n_features: usize,
    /// Landmark rows (m × n_features), row-major.
    pub landmarks: Vec<Vec<f64>>,
    /// Inverse square root of the landmark kernel matrix (m × m), row-major.
    pub whitener: Vec<Vec<f64>>,
    pub seed: u64,
}

impl FeatureMapper {
    pub fn landmark_count(&self) -> usize {
        self.landmarks.len()
    }

    /// Output dimension of the mapped rows.
    pub fn output_dim(&self) -> usize {
        match self.spec.kind {
            KernelKind::Linear => self.n_features,
            _ => self.landmarks.len(),
        }
    }

    /// Unnormalized Nyström features `W · k(L, x)` (or `x` itself for the
    /// linear kind).
    pub fn features(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n_features, x.len())?;
        if self.spec.kind == KernelKind::Linear {
            return Ok(x.to_vec());
        }
        let kx: Vec<f64> = self.landmarks.iter().map(|l| kernel_unchecked(&self.spec, l, x)).collect();
        Ok(self.whitener.iter().map(|row| dot(row, &kx)).collect())
    }
}

/// Fits a feature mapper on the rows of `x`.
///
/// Landmarks are `m` rows drawn uniformly without replacement under `seed`;
/// the whitener is the pseudo-inverse square root of their kernel matrix.
pub fn fit_feature_map<R: AsRef<[f64]>>(x: &[R], spec: KernelSpec, m: usize, seed: u64) -> Result<FeatureMapper> {
    spec.validate()?;
    let first = x.first().ok_or(Error::InsufficientData { needed: 1, available: 0 })?;
    let n_features = first.as_ref().len();
    for row in x {
        check_dim(n_features, row.as_ref().len())?;
    }
    let spec = spec.resolved(n_features);
    if spec.kind == KernelKind::Linear {
        return Ok(FeatureMapper { spec, n_features, landmarks: Vec::new(), whitener: Vec::new(), seed });
    }
    if m == 0 {
        return Err(Error::InvalidConfig("landmark count must be >= 1".into()));
    }
    if x.len() < m {
        return Err(Error::InsufficientData { needed: m, available: x.len() });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, x.len(), m).into_vec();
    picks.sort_unstable();
    let landmarks: Vec<Vec<f64>> = picks.iter().map(|&i| x[i].as_ref().to_vec()).collect();

    let k = DMatrix::from_fn(m, m, |i, j| kernel_unchecked(&spec, &landmarks[i], &landmarks[j]));
    let eig = SymmetricEigen::new(k);
    let kept: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] >= EIGEN_CLIP).collect();
    if kept.is_empty() {
        return Err(Error::SingularKernel);
    }
    let mut w = DMatrix::<f64>::zeros(m, m);
    for &i in &kept {
        let u: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        w += (&u * u.transpose()) / eig.eigenvalues[i].sqrt();
    }
    let whitener = (0..m)
        .map(|i| (0..m).map(|j| 0.5 * (w[(i, j)] + w[(j, i)])).collect())
        .collect();

    Ok(FeatureMapper { spec, n_features, landmarks, whitener, seed })
}

/// Maps each row to the unit sphere through `mapper`.
pub fn apply_feature_map<R: AsRef<[f64]>>(mapper: &FeatureMapper, x: &[R]) -> Result<Vec<SpherePoint>> {
    x.iter()
        .map(|row| {
            let f = mapper.features(row.as_ref())?;
            if norm(&f) < 1e-12 {
                return Err(Error::ZeroVector);
            }
            SpherePoint::normalize(f)
        })
        .collect()
}
