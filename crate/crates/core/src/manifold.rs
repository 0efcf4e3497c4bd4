//! Riemannian primitives on the unit sphere S^(N-1) ⊂ ℝ^N.
//!
//! Logarithmic and exponential maps, geodesic distance and the Fréchet
//! (Karcher) mean. Inner products are clamped to [-1, 1] before `acos`, and
//! the same clamped value drives both `log_map` and `geodesic_distance`, so
//! `‖log_μ(x)‖` and `d(μ, x)` agree as computed.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Tolerance on `|‖x‖ - 1|` accepted for a sphere point.
pub const UNIT_TOL: f64 = 1e-9;
/// `1 - ⟨x, μ⟩` below this is treated as the identity case of the log map.
pub const IDENTITY_EPS: f64 = 1e-12;
/// Tangent vectors shorter than this map to the base point.
pub const ZERO_TANGENT: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn clamped_inner(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0)
}

/// A unit-norm vector on S^(N-1), N ≥ 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Wraps `coords`, which must already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let n = norm(&coords);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitNorm { norm: n });
        }
        Ok(Self { coords })
    }

    /// Divides `coords` by its Euclidean norm.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        let n = norm(&coords);
        if !(n >= ZERO_TANGENT) || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        coords.iter_mut().for_each(|c| *c /= n);
        Ok(Self { coords })
    }

    /// The i-th standard basis vector of ℝ^dim.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if i >= dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: i + 1 });
        }
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
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

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

impl AsRef<[f64]> for SpherePoint {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

/// A vector in the tangent space at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    coords: Vec<f64>,
}

impl TangentVector {
    /// Checks orthogonality to `base` with the same relative tolerance as
    /// [`exp_map`].
    pub fn new(base: SpherePoint, coords: Vec<f64>) -> Result<Self> {
        check_dim(base.dim(), coords.len())?;
        let inner = dot(base.coords(), &coords);
        if inner.abs() > 1e-6 * norm(&coords).max(ZERO_TANGENT) {
            return Err(Error::NonTangent { inner });
        }
        Ok(Self { base, coords })
    }

    pub fn zero(base: SpherePoint) -> Self {
        let coords = vec![0.0; base.dim()];
        Self { base, coords }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// Slice-level logarithmic map; `mu` and `x` are assumed unit norm.
pub(crate) fn log_raw(mu: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_dim(mu.len(), x.len())?;
    let c = clamped_inner(x, mu);
    if c >= 1.0 - IDENTITY_EPS {
        return Ok(vec![0.0; mu.len()]);
    }
    if c <= -1.0 + IDENTITY_EPS {
        return Err(Error::AntipodalPoint);
    }
    let mut u: Vec<f64> = x.iter().zip(mu).map(|(xi, mi)| xi - c * mi).collect();
    let un = norm(&u);
    if un < ZERO_TANGENT {
        return Ok(vec![0.0; mu.len()]);
    }
    // `un` is sin θ; atan2 keeps θ accurate at small and large angles alike
    let scale = un.atan2(c) / un;
    u.iter_mut().for_each(|ui| *ui *= scale);
    Ok(u)
}

/// Slice-level exponential map; `v` is assumed tangent at `mu`.
pub(crate) fn exp_raw(mu: &[f64], v: &[f64]) -> Vec<f64> {
    let t = norm(v);
    if t < ZERO_TANGENT {
        return mu.to_vec();
    }
    let (s, c) = t.sin_cos();
    let mut out: Vec<f64> = mu.iter().zip(v).map(|(m, vi)| c * m + s * vi / t).collect();
    // Renormalize away the last ulp of drift so chained maps stay on the sphere.
    let n = norm(&out);
    out.iter_mut().for_each(|o| *o /= n);
    out
}

/// `Log_μ(x)`: tangent vector at `mu` pointing along the geodesic to `x`,
/// with length equal to the geodesic distance.
pub fn log_map(mu: &SpherePoint, x: &SpherePoint) -> Result<TangentVector> {
    let coords = log_raw(mu.coords(), x.coords())?;
    Ok(TangentVector { base: mu.clone(), coords })
}

/// `Exp_μ(v) = cos‖v‖·μ + sin‖v‖·v/‖v‖`.
pub fn exp_map(mu: &SpherePoint, v: &TangentVector) -> Result<SpherePoint> {
    check_dim(mu.dim(), v.coords.len())?;
    let inner = dot(mu.coords(), &v.coords);
    if inner.abs() > 1e-6 * v.norm() {
        return Err(Error::NonTangent { inner });
    }
    Ok(SpherePoint::from_raw(exp_raw(mu.coords(), &v.coords)))
}

/// Great-circle distance in radians, in [0, π].
pub fn geodesic_distance(a: &SpherePoint, b: &SpherePoint) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(geodesic_raw(a.coords(), b.coords()))
}

/// Equals `arccos⟨a, b⟩` but evaluated as `2·atan2(‖a − b‖, ‖a + b‖)`,
/// which stays accurate for nearly identical or nearly antipodal points
/// where the arccosine loses half its significant digits.
pub(crate) fn geodesic_raw(a: &[f64], b: &[f64]) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        diff += (x - y) * (x - y);
        sum += (x + y) * (x + y);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Gradient-descent settings for [`frechet_mean`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub step_size: f64,
}

impl Default for FrechetConfig {
    fn default() -> Self {
        Self { max_iterations: 512, tolerance: 1e-10, step_size: 1.0 }
    }
}

impl FrechetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be > 0".into()));
        }
        if !(self.step_size > 0.0 && self.step_size <= 2.0) {
            return Err(Error::InvalidConfig("step_size must lie in (0, 2]".into()));
        }
        Ok(())
    }
}

/// Mean of the log-mapped points at `mu`, i.e. minus half the Riemannian
/// gradient of the Fréchet objective divided by M.
pub(crate) fn mean_tangent(mu: &[f64], points: &[SpherePoint]) -> Result<Vec<f64>> {
    let mut g = vec![0.0; mu.len()];
    for p in points {
        let v = log_raw(mu, p.coords())?;
        g.iter_mut().zip(&v).for_each(|(gi, vi)| *gi += vi);
    }
    let m = points.len() as f64;
    g.iter_mut().for_each(|gi| *gi /= m);
    Ok(g)
}

fn descend(mut mu: Vec<f64>, points: &[SpherePoint], cfg: &FrechetConfig) -> Result<(Vec<f64>, f64)> {
    let mut gnorm = f64::INFINITY;
    for _ in 0..cfg.max_iterations {
        let mut g = mean_tangent(&mu, points)?;
        gnorm = norm(&g);
        if gnorm < cfg.tolerance {
            return Ok((mu, gnorm));
        }
        g.iter_mut().for_each(|gi| *gi *= cfg.step_size);
        mu = exp_raw(&mu, &g);
    }
    let g = mean_tangent(&mu, points)?;
    gnorm = gnorm.min(norm(&g));
    Err(Error::NoConvergence { iterations: cfg.max_iterations, gradient_norm: gnorm })
}

/// Sample Fréchet mean: the sphere point minimizing the sum of squared
/// geodesic distances to `points`.
///
/// Starts at the normalized Euclidean mean. If that mean vanishes, the first
/// point is used instead and failure is reported as `DegenerateInput`.
pub fn frechet_mean(points: &[SpherePoint], cfg: &FrechetConfig) -> Result<SpherePoint> {
    cfg.validate()?;
    let first = points.first().ok_or_else(|| Error::DegenerateInput("empty point set".into()))?;
    let dim = first.dim();
    let mut sum = vec![0.0; dim];
    for p in points {
        check_dim(dim, p.dim())?;
        sum.iter_mut().zip(p.coords()).for_each(|(s, c)| *s += c);
    }
    let sn = norm(&sum) / points.len() as f64;
    if sn < 1e-9 {
        return match descend(first.coords().to_vec(), points, cfg) {
            Ok((mu, _)) => Ok(SpherePoint::from_raw(mu)),
            Err(e) => Err(Error::DegenerateInput(format!(
                "Euclidean mean vanishes and fallback start failed: {e}"
            ))),
        };
    }
    let start: Vec<f64> = sum.iter().map(|s| s / (sn * points.len() as f64)).collect();
    let (mu, _) = descend(start, points, cfg)?;
    Ok(SpherePoint::from_raw(mu))
}
