//! Fidelity kernel `K(x, y) = |⟨φ(x)|φ(y)⟩|²` for amplitude-encoded vectors.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gates::apply_matrix;
use super::state::{amplitude_encode, qubits_for};
use crate::error::{check_dim, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelBackend {
    /// `(x·y)²` on the normalized real vectors.
    #[default]
    Analytic,
    /// Prepare `|x⟩`, apply the adjoint of the preparation of `|y⟩`, and read
    /// the probability of the all-zeros outcome.
    Circuit,
}

impl std::str::FromStr for KernelBackend {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "circuit" => Ok(Self::Circuit),
            other => Err(crate::error::Error::InvalidConfig(format!("unknown kernel backend '{other}'"))),
        }
    }
}

/// Real orthogonal unitary with first column `x` (unit norm): the Householder
/// reflection swapping `e_0` and `x`. It is its own inverse and adjoint.
fn preparation_unitary(x: &[f64]) -> Vec<C64> {
    let d = x.len();
    let mut v: Vec<f64> = x.iter().map(|a| -a).collect();
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let mut u = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            let id = if i == j { 1.0 } else { 0.0 };
            let refl = if vv > 1e-30 { 2.0 * v[i] * v[j] / vv } else { 0.0 };
            u[i * d + j] = C64::new(id - refl, 0.0);
        }
    }
    u
}

pub fn quantum_kernel(x: &[f64], y: &[f64], backend: KernelBackend) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    let q = qubits_for(x.len());
    let sx = amplitude_encode(x, q)?;
    let sy = amplitude_encode(y, q)?;
    match backend {
        KernelBackend::Analytic => {
            let ov: f64 = sx.amplitudes().iter().zip(sy.amplitudes()).map(|(a, b)| a.re * b.re).sum();
            Ok((ov * ov).min(1.0))
        }
        KernelBackend::Circuit => {
            let yr: Vec<f64> = sy.amplitudes().iter().map(|a| a.re).collect();
            let u = preparation_unitary(&yr);
            let mut amps = sx.amplitudes().to_vec();
            let all: Vec<usize> = (0..q).collect();
            apply_matrix(&mut amps, q, &all, &u);
            Ok(amps[0].norm_sqr().min(1.0))
        }
    }
}
