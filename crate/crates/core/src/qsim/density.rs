//! Density-matrix backend with depolarizing noise.
//!
//! A `2^q × 2^q` matrix is stored row-major and treated as a vector over
//! `2q` qubits: row bits first, then column bits. A unitary `U` on qubit `t`
//! acts as `U` on virtual qubit `t` and `U*` on virtual qubit `q + t`, which
//! gives `ρ ↦ UρU†` without forming `U` on the full space.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::gates::{apply_matrix, pauli, Gate};
use super::state::QuantumState;
use crate::error::{Error, Result};

/// Depolarizing probabilities after single- and two-qubit gates.
///
/// Single-qubit: `ρ ↦ (1-p1)ρ + (p1/3)(XρX + YρY + ZρZ)`.
/// Two-qubit: `ρ ↦ (1-p2)ρ + (p2/15) Σ PρP` over the 15 non-identity
/// two-qubit Pauli products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseSpec {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for p in [p1, p2] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!("depolarizing probability {p} outside [0, 1]")));
            }
        }
        Ok(Self { p1, p2 })
    }

    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    rho: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &QuantumState) -> Self {
        let a = state.amplitudes();
        let d = a.len();
        let mut rho = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for j in 0..d {
                rho[i * d + j] = a[i] * a[j].conj();
            }
        }
        Self { qubits: state.qubits(), rho }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.rho
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.rho[i * self.dim() + j]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|ρ_ij - conj(ρ_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    fn apply_local(&mut self, targets: &[usize], m: &[C64]) {
        let q = self.qubits;
        let conj: Vec<C64> = m.iter().map(|c| c.conj()).collect();
        let cols: Vec<usize> = targets.iter().map(|t| q + t).collect();
        apply_matrix(&mut self.rho, 2 * q, targets, m);
        apply_matrix(&mut self.rho, 2 * q, &cols, &conj);
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        self.apply_local(&gate.targets, &gate.matrix());
        Ok(())
    }

    /// Single-qubit depolarizing channel on `target`.
    pub fn depolarize_1q(&mut self, target: usize, p: f64) -> Result<()> {
        if target >= self.qubits {
            return Err(Error::IndexOutOfRange { index: target, qubits: self.qubits });
        }
        if p == 0.0 {
            return Ok(());
        }
        let mut acc: Vec<C64> = self.rho.iter().map(|r| r * (1.0 - p)).collect();
        for k in 1..4 {
            let mut term = self.clone();
            term.apply_local(&[target], &pauli(k));
            acc.iter_mut().zip(&term.rho).for_each(|(a, t)| *a += t * (p / 3.0));
        }
        self.rho = acc;
        Ok(())
    }

    /// Two-qubit depolarizing channel on `(a, b)`.
    pub fn depolarize_2q(&mut self, a: usize, b: usize, p: f64) -> Result<()> {
        for t in [a, b] {
            if t >= self.qubits {
                return Err(Error::IndexOutOfRange { index: t, qubits: self.qubits });
            }
        }
        if p == 0.0 {
            return Ok(());
        }
        let mut acc: Vec<C64> = self.rho.iter().map(|r| r * (1.0 - p)).collect();
        for ka in 0..4 {
            for kb in 0..4 {
                if ka == 0 && kb == 0 {
                    continue;
                }
                let mut term = self.clone();
                if ka != 0 {
                    term.apply_local(&[a], &pauli(ka));
                }
                if kb != 0 {
                    term.apply_local(&[b], &pauli(kb));
                }
                acc.iter_mut().zip(&term.rho).for_each(|(x, t)| *x += t * (p / 15.0));
            }
        }
        self.rho = acc;
        Ok(())
    }

    /// Applies `gate` followed by the matching depolarizing channel.
    pub fn apply_noisy(&mut self, gate: &Gate, noise: &NoiseSpec) -> Result<()> {
        self.apply(gate)?;
        match gate.targets.as_slice() {
            [t] => self.depolarize_1q(*t, noise.p1),
            [a, b] => self.depolarize_2q(*a, *b, noise.p2),
            _ => unreachable!("validated gate arity"),
        }
    }

    /// `Tr(ρ X⊗…⊗X)`.
    pub fn expectation_x_all(&self) -> f64 {
        let d = self.dim();
        let mask = d - 1;
        (0..d).map(|j| self.get(j, j ^ mask).re).sum()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.get(index, index).re
    }
}
