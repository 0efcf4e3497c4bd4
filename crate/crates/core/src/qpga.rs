//! Principal geodesic analysis on the unit sphere.
//!
//! `fit` log-maps the data to the tangent space at its Fréchet mean, runs an
//! eigendecomposition of the uncentered tangent covariance
//! `C = (1/M) Σ Log_μ(x_i) Log_μ(x_i)ᵀ` and keeps the top `D` directions.
//! `transform` projects onto those directions and places the result on the
//! latent sphere S^(D-1); `inverse_transform` is an explicitly lossy
//! approximation going the other way.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::manifold::{dot, exp_raw, frechet_mean, log_raw, norm, FrechetConfig, SpherePoint};

/// How tangent coordinates `y ∈ ℝ^D` are placed on S^(D-1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// `y / ‖y‖`. Keeps every coordinate up to scale but sends points on
    /// opposite sides of the mean to antipodal latent vectors.
    Renormalize,
    /// `Exp_{e_D}(y - y_D e_D)`: the exponential map at the last basis
    /// vector, spending the least-variance coordinate as the base axis.
    ExpBasepoint,
}

impl ProjectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Renormalize => "renormalize",
            Self::ExpBasepoint => "exp_basepoint",
        }
    }
}

impl std::str::FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "renormalize" => Ok(Self::Renormalize),
            "exp_basepoint" | "exp-basepoint" => Ok(Self::ExpBasepoint),
            other => Err(Error::InvalidConfig(format!("unknown projection mode `{other}`"))),
        }
    }
}

/// A unit vector on the latent sphere S^(D-1). `D = 1` is allowed (S⁰ = {±1}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentPoint {
    coords: Vec<f64>,
}

impl LatentPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionTooSmall(0));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitNorm { norm: n });
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl AsRef<[f64]> for LatentPoint {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpgaModel {
    pub mean: SpherePoint,
    /// `D` orthonormal principal directions, each of length `N`.
    pub components: Vec<Vec<f64>>,
    /// Top-`D` eigenvalues, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// All `N` eigenvalues of the tangent covariance, non-increasing.
    pub spectrum: Vec<f64>,
    pub total_variance: f64,
    pub ev_ratios: Vec<f64>,
    pub mode: ProjectionMode,
    pub mean_radius: f64,
    /// Set when `λ_D < 1e-12`.
    pub rank_deficient: bool,
}

impl QpgaModel {
    pub fn ambient_dim(&self) -> usize {
        self.mean.dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.components.len()
    }

    /// `γ(D) = Σ_{i≤D} λ_i / σ_T²`.
    pub fn cumulative_explained_variance(&self) -> f64 {
        self.ev_ratios.iter().sum()
    }

    /// The same model keeping only the first `d` components.
    pub fn truncated(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.latent_dim() {
            return Err(Error::InvalidConfig(format!("cannot truncate {} components to {d}", self.latent_dim())));
        }
        let mut out = self.clone();
        out.components.truncate(d);
        out.eigenvalues.truncate(d);
        out.ev_ratios.truncate(d);
        out.rank_deficient = out.eigenvalues[d - 1] < 1e-12;
        Ok(out)
    }

    /// Tangent coordinates `Vᵀ Log_μ(x)`.
    pub fn tangent_coords(&self, x: &SpherePoint) -> Result<Vec<f64>> {
        check_dim(self.ambient_dim(), x.dim())?;
        let v = log_raw(self.mean.coords(), x.coords())?;
        Ok(self.components.iter().map(|c| dot(c, &v)).collect())
    }
}

/// Places tangent coordinates on the latent sphere according to `mode`.
pub fn project_to_latent(y: &[f64], mode: ProjectionMode) -> LatentPoint {
    let d = y.len();
    match mode {
        ProjectionMode::Renormalize => {
            let n = norm(y);
            let coords = if n < 1e-12 {
                let mut e = vec![0.0; d];
                e[0] = 1.0;
                e
            } else {
                y.iter().map(|v| v / n).collect()
            };
            LatentPoint { coords }
        }
        ProjectionMode::ExpBasepoint => {
            let mut base = vec![0.0; d];
            base[d - 1] = 1.0;
            let mut v = y.to_vec();
            v[d - 1] = 0.0;
            LatentPoint { coords: exp_raw(&base, &v) }
        }
    }
}

fn flip_to_positive_peak(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits a `d`-component model to points on S^(N-1).
pub fn fit(x: &[SpherePoint], d: usize, frechet_cfg: &FrechetConfig, mode: ProjectionMode) -> Result<QpgaModel> {
    if x.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, available: x.len() });
    }
    let n = x[0].dim();
    if d == 0 || d > n {
        return Err(Error::InvalidConfig(format!("latent dimension {d} must lie in 1..={n}")));
    }
    for p in x {
        check_dim(n, p.dim())?;
    }
    let mean = frechet_mean(x, frechet_cfg)?;
    let m = x.len();

    let mut tangents = DMatrix::<f64>::zeros(m, n);
    let mut radius = 0.0;
    for (i, p) in x.iter().enumerate() {
        let v = log_raw(mean.coords(), p.coords())?;
        radius += norm(&v);
        for (j, vj) in v.iter().enumerate() {
            tangents[(i, j)] = *vj;
        }
    }
    let mut cov = tangents.transpose() * &tangents;
    cov /= m as f64;
    // exact symmetry for the solver
    let cov = DMatrix::from_fn(n, n, |i, j| 0.5 * (cov[(i, j)] + cov[(j, i)]));

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps the solver's order for ties
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let spectrum: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total_variance: f64 = spectrum.iter().sum();
    let components: Vec<Vec<f64>> = order[..d]
        .iter()
        .map(|&i| {
            let mut c: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            flip_to_positive_peak(&mut c);
            c
        })
        .collect();
    let eigenvalues = spectrum[..d].to_vec();
    let ev_ratios = eigenvalues
        .iter()
        .map(|l| if total_variance > 0.0 { l / total_variance } else { 0.0 })
        .collect();
    let rank_deficient = eigenvalues[d - 1] < 1e-12;

    Ok(QpgaModel {
        mean,
        components,
        eigenvalues,
        spectrum,
        total_variance,
        ev_ratios,
        mode,
        mean_radius: radius / m as f64,
        rank_deficient,
    })
}

/// Maps points on S^(N-1) to the latent sphere S^(D-1).
pub fn transform(model: &QpgaModel, x: &[SpherePoint]) -> Result<Vec<LatentPoint>> {
    x.iter()
        .map(|p| Ok(project_to_latent(&model.tangent_coords(p)?, model.mode)))
        .collect()
}

/// Approximate inverse for renormalize-mode models:
/// `x_rec = Exp_μ(V · r̄ z)`, with the tangent vector re-projected off `μ`.
pub fn inverse_transform(model: &QpgaModel, z: &[LatentPoint]) -> Result<Vec<SpherePoint>> {
    if model.mode != ProjectionMode::Renormalize {
        return Err(Error::NotInvertible(model.mode.as_str()));
    }
    let n = model.ambient_dim();
    let mu = model.mean.coords();
    z.iter()
        .map(|zi| {
            check_dim(model.latent_dim(), zi.dim())?;
            let mut v = vec![0.0; n];
            for (c, zc) in model.components.iter().zip(zi.coords()) {
                let s = model.mean_radius * zc;
                v.iter_mut().zip(c).for_each(|(vj, cj)| *vj += s * cj);
            }
            let along = dot(&v, mu);
            v.iter_mut().zip(mu).for_each(|(vj, mj)| *vj -= along * mj);
            Ok(SpherePoint::from_raw(exp_raw(mu, &v)))
        })
        .collect()
}

/// Smallest `k` whose leading eigenvalues hold at least `beta` of the total.
///
/// A relative slack of 1e-12 on the threshold absorbs the rounding in
/// `beta · σ_T²`.
pub fn components_for_variance(eigenvalues: &[f64], beta: f64) -> Result<usize> {
    if eigenvalues.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidConfig(format!("beta must lie in (0, 1], got {beta}")));
    }
    if eigenvalues.windows(2).any(|w| w[1] > w[0] + 1e-12 * w[0].abs().max(1.0)) {
        return Err(Error::InvalidConfig("eigenvalues must be sorted non-increasing".into()));
    }
    let total: f64 = eigenvalues.iter().sum();
    let threshold = beta * total - 1e-12 * total.abs();
    let mut acc = 0.0;
    for (k, l) in eigenvalues.iter().enumerate() {
        acc += l;
        if acc >= threshold {
            return Ok(k + 1);
        }
    }
    Ok(eigenvalues.len())
}
