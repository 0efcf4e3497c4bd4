//! Neighborhood-preservation metrics for embeddings: co-ranking matrix,
//! trustworthiness, continuity, and geodesic reconstruction error.
//!
//! Ranks are 1-based (rank 1 = nearest other point). Ties in distance are
//! broken by ascending point index.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::manifold::{dot, geodesic_raw, norm, SpherePoint, UNIT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    Euclidean,
    Geodesic,
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "geodesic" => Ok(Self::Geodesic),
            other => Err(Error::InvalidConfig(format!("unknown distance `{other}`"))),
        }
    }
}

/// Co-ranking counts; `counts[a][b]` is the number of ordered pairs `(i, j)`
/// with high-dimensional rank `a + 1` and low-dimensional rank `b + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorankingMatrix {
    pub n: usize,
    pub counts: Vec<Vec<u64>>,
}

impl CorankingMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }
}

fn check_rows<R: AsRef<[f64]>>(x: &[R], kind: DistanceKind) -> Result<usize> {
    let dim = x.first().map(|r| r.as_ref().len()).unwrap_or(0);
    for r in x {
        let r = r.as_ref();
        check_dim(dim, r.len())?;
        if kind == DistanceKind::Geodesic {
            let nr = norm(r);
            if (nr - 1.0).abs() > UNIT_TOL {
                return Err(Error::NonUnitNorm { norm: nr });
            }
        }
    }
    Ok(dim)
}

fn distance(kind: DistanceKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        DistanceKind::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        DistanceKind::Geodesic => geodesic_raw(a, b),
    }
}

/// Full pairwise distance matrix, row-major `n × n`.
pub fn pairwise_distances<R: AsRef<[f64]>>(x: &[R], kind: DistanceKind) -> Result<Vec<f64>> {
    check_rows(x, kind)?;
    let n = x.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = distance(kind, x[i].as_ref(), x[j].as_ref());
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    Ok(d)
}

/// `rank[i * n + j]` = rank of `j` among the neighbors of `i` (1-based,
/// 0 on the diagonal).
pub fn rank_matrix<R: AsRef<[f64]>>(x: &[R], kind: DistanceKind) -> Result<Vec<usize>> {
    let n = x.len();
    let d = pairwise_distances(x, kind)?;
    let mut ranks = vec![0usize; n * n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        let row = &d[i * n..(i + 1) * n];
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        for (r, &j) in order.iter().enumerate() {
            ranks[i * n + j] = r + 1;
        }
    }
    Ok(ranks)
}

fn paired_ranks<A: AsRef<[f64]>, B: AsRef<[f64]>>(
    x_high: &[A],
    x_low: &[B],
    d_high: DistanceKind,
    d_low: DistanceKind,
) -> Result<(Vec<usize>, Vec<usize>)> {
    check_dim(x_high.len(), x_low.len())?;
    Ok((rank_matrix(x_high, d_high)?, rank_matrix(x_low, d_low)?))
}

/// Co-ranking matrix of two representations of the same `n ≥ 3` points.
pub fn coranking_matrix<A: AsRef<[f64]>, B: AsRef<[f64]>>(
    x_high: &[A],
    x_low: &[B],
    d_high: DistanceKind,
    d_low: DistanceKind,
) -> Result<CorankingMatrix> {
    let n = x_high.len();
    if n < 3 {
        return Err(Error::InsufficientData { needed: 3, available: n });
    }
    let (rh, rl) = paired_ranks(x_high, x_low, d_high, d_low)?;
    let mut counts = vec![vec![0u64; n - 1]; n - 1];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                counts[rh[i * n + j] - 1][rl[i * n + j] - 1] += 1;
            }
        }
    }
    Ok(CorankingMatrix { n, counts })
}

fn check_k(k: usize, n: usize) -> Result<()> {
    // k < n/2 keeps 2n - 3k - 1 positive
    if k == 0 || 2 * k >= n {
        return Err(Error::InvalidK { k, n });
    }
    Ok(())
}

/// Penalty shared by both metrics: for each point, neighbors inside the
/// `k`-neighborhood under `inside` but outside it under `outside` contribute
/// `(rank_outside - k)`.
fn neighborhood_penalty(inside: &[usize], outside: &[usize], n: usize, k: usize) -> f64 {
    let mut sum = 0u64;
    for i in 0..n {
        for j in 0..n {
            let ri = inside[i * n + j];
            let ro = outside[i * n + j];
            if i != j && ri <= k && ro > k {
                sum += (ro - k) as u64;
            }
        }
    }
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * sum as f64
}

/// Trustworthiness `T(k)`: penalizes points that are `k`-nearest neighbors
/// in the high-dimensional space but not in the embedding, weighted by their
/// rank in the embedding.
pub fn trustworthiness<A: AsRef<[f64]>, B: AsRef<[f64]>>(
    x_high: &[A],
    x_low: &[B],
    k: usize,
    d_high: DistanceKind,
    d_low: DistanceKind,
) -> Result<f64> {
    check_k(k, x_high.len())?;
    let (rh, rl) = paired_ranks(x_high, x_low, d_high, d_low)?;
    Ok(neighborhood_penalty(&rh, &rl, x_high.len(), k))
}

/// Continuity `C(k)`: the dual of [`trustworthiness`] with the two spaces'
/// roles exchanged.
pub fn continuity<A: AsRef<[f64]>, B: AsRef<[f64]>>(
    x_high: &[A],
    x_low: &[B],
    k: usize,
    d_high: DistanceKind,
    d_low: DistanceKind,
) -> Result<f64> {
    check_k(k, x_high.len())?;
    let (rh, rl) = paired_ranks(x_high, x_low, d_high, d_low)?;
    Ok(neighborhood_penalty(&rl, &rh, x_high.len(), k))
}

/// `(k, T(k), C(k))` for `k = 1..=k_max`, reusing one pair of rank matrices.
pub fn trust_continuity_curve<A: AsRef<[f64]>, B: AsRef<[f64]>>(
    x_high: &[A],
    x_low: &[B],
    k_max: usize,
    d_high: DistanceKind,
    d_low: DistanceKind,
) -> Result<Vec<(usize, f64, f64)>> {
    let n = x_high.len();
    check_k(k_max, n)?;
    let (rh, rl) = paired_ranks(x_high, x_low, d_high, d_low)?;
    Ok((1..=k_max)
        .map(|k| (k, neighborhood_penalty(&rh, &rl, n, k), neighborhood_penalty(&rl, &rh, n, k)))
        .collect())
}

/// Mean squared geodesic distance between matched rows.
pub fn reconstruction_error(x: &[SpherePoint], x_rec: &[SpherePoint]) -> Result<f64> {
    check_dim(x.len(), x_rec.len())?;
    if x.is_empty() {
        return Err(Error::InsufficientData { needed: 1, available: 0 });
    }
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(x_rec) {
        check_dim(a.dim(), b.dim())?;
        for p in [a, b] {
            let nr = norm(p.coords());
            if (nr - 1.0).abs() > UNIT_TOL {
                return Err(Error::NonUnitNorm { norm: nr });
            }
        }
        let d = geodesic_raw(a.coords(), b.coords());
        acc += d * d;
    }
    Ok(acc / x.len() as f64)
}

/// Cumulative explained-variance ratios `γ(1), …, γ(N)` of a spectrum.
pub fn cumulative_explained_variance(spectrum: &[f64]) -> Vec<f64> {
    let total: f64 = spectrum.iter().sum();
    let mut acc = 0.0;
    spectrum
        .iter()
        .map(|l| {
            acc += l;
            if total > 0.0 {
                acc / total
            } else {
                0.0
            }
        })
        .collect()
}

/// Neighbor ranks by decreasing inner product. On unit-norm rows these
/// coincide with geodesic ranks, since `acos` is decreasing.
pub fn inner_product_ranks<R: AsRef<[f64]>>(x: &[R]) -> Vec<usize> {
    let n = x.len();
    let mut ranks = vec![0usize; n * n];
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let ip: Vec<f64> = (0..n).map(|j| dot(x[i].as_ref(), x[j].as_ref()).clamp(-1.0, 1.0)).collect();
        order.sort_by(|&a, &b| ip[b].total_cmp(&ip[a]).then(a.cmp(&b)));
        for (r, &j) in order.iter().enumerate() {
            ranks[i * n + j] = r + 1;
        }
    }
    ranks
}
