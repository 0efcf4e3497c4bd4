//! Gate matrices and their application to amplitude vectors.
//!
//! Qubit 0 is the most significant bit of a basis index.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    RX,
    RY,
    RZ,
    CZ,
    CX,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            Self::RX | Self::RY | Self::RZ => 1,
            Self::CZ | Self::CX => 2,
        }
    }

    pub fn is_rotation(&self) -> bool {
        self.arity() == 1
    }
}

/// A gate with a concrete angle (ignored for CZ/CX).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angle: f64,
}

impl Gate {
    pub fn rx(q: usize, angle: f64) -> Self {
        Self { kind: GateKind::RX, targets: vec![q], angle }
    }

    pub fn ry(q: usize, angle: f64) -> Self {
        Self { kind: GateKind::RY, targets: vec![q], angle }
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Self { kind: GateKind::RZ, targets: vec![q], angle }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self { kind: GateKind::CZ, targets: vec![a, b], angle: 0.0 }
    }

    /// Controlled-X with `control` first.
    pub fn cx(control: usize, target: usize) -> Self {
        Self { kind: GateKind::CX, targets: vec![control, target], angle: 0.0 }
    }

    pub fn validate(&self, qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::InvalidConfig(format!(
                "{:?} expects {} target(s), got {}",
                self.kind,
                self.kind.arity(),
                self.targets.len()
            )));
        }
        for &t in &self.targets {
            if t >= qubits {
                return Err(Error::IndexOutOfRange { index: t, qubits });
            }
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::InvalidConfig("two-qubit gate targets must differ".into()));
        }
        Ok(())
    }

    /// Dense unitary, row-major, of size `2^arity`.
    pub fn matrix(&self) -> Vec<C64> {
        gate_matrix(self.kind, self.angle)
    }
}

/// Row-major matrix of a gate; 2×2 for rotations, 4×4 for CZ/CX with the
/// first target as the more significant bit.
pub fn gate_matrix(kind: GateKind, angle: f64) -> Vec<C64> {
    let (s, c) = (angle / 2.0).sin_cos();
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match kind {
        GateKind::RX => vec![C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
        GateKind::RY => vec![C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
        GateKind::RZ => vec![C64::new(c, -s), z, z, C64::new(c, s)],
        GateKind::CZ => {
            let mut m = vec![z; 16];
            m[0] = one;
            m[5] = one;
            m[10] = one;
            m[15] = -one;
            m
        }
        GateKind::CX => {
            let mut m = vec![z; 16];
            m[0] = one;
            m[5] = one;
            m[11] = one;
            m[14] = one;
            m
        }
    }
}

/// `max |(UᴴU - I)_ij|` for a square row-major matrix.
pub fn unitarity_defect(u: &[C64]) -> f64 {
    let d = (u.len() as f64).sqrt() as usize;
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += u[k * d + i].conj() * u[k * d + j];
            }
            if i == j {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// Pauli matrices I, X, Y, Z (row-major 2×2).
pub fn pauli(index: usize) -> [C64; 4] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match index {
        0 => [one, z, z, one],
        1 => [z, one, one, z],
        2 => [z, -i, i, z],
        3 => [one, z, z, -one],
        _ => panic!("Pauli index must be 0..4"),
    }
}

/// Applies a `2^k × 2^k` matrix to `targets` (k = targets.len()) of an
/// amplitude vector over `n` qubits. `targets[0]` is the most significant
/// bit of the local index.
pub(crate) fn apply_matrix(amps: &mut [C64], n: usize, targets: &[usize], m: &[C64]) {
    let k = targets.len();
    let local = 1usize << k;
    let masks: Vec<usize> = targets.iter().map(|&t| 1usize << (n - 1 - t)).collect();
    let all: usize = masks.iter().sum();
    let mut idx = vec![0usize; local];
    let mut buf = vec![C64::new(0.0, 0.0); local];
    for base in 0..amps.len() {
        if base & all != 0 {
            continue;
        }
        for (l, slot) in idx.iter_mut().enumerate() {
            let mut off = base;
            for (b, mask) in masks.iter().enumerate() {
                if l & (1 << (k - 1 - b)) != 0 {
                    off |= mask;
                }
            }
            *slot = off;
        }
        for (l, &i) in idx.iter().enumerate() {
            buf[l] = amps[i];
        }
        for (r, &i) in idx.iter().enumerate() {
            let row = &m[r * local..(r + 1) * local];
            amps[i] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}
