//! Parameterized circuits, evolution of pure or mixed registers, and
//! parameter-shift gradients.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::density::{DensityMatrix, NoiseSpec};
use super::gates::{Gate, GateKind};
use super::state::QuantumState;
use crate::error::{Error, Result};

/// Angle source of a gate: a literal value or an entry of the parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Param {
    Fixed(f64),
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub param: Option<Param>,
}

impl GateOp {
    pub fn rotation(kind: GateKind, target: usize, param: Param) -> Self {
        Self { kind, targets: vec![target], param: Some(param) }
    }

    pub fn fixed(gate: Gate) -> Self {
        let param = gate.kind.is_rotation().then_some(Param::Fixed(gate.angle));
        Self { kind: gate.kind, targets: gate.targets, param }
    }
}

/// Ordered gate list over `qubits` qubits whose angles may reference a
/// shared parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubits: usize,
    pub ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Self { qubits, ops: Vec::new() }
    }

    pub fn push(&mut self, op: GateOp) -> &mut Self {
        self.ops.push(op);
        self
    }

    /// One more than the largest parameter index referenced (0 if none).
    pub fn num_params(&self) -> usize {
        self.ops
            .iter()
            .filter_map(|op| match op.param {
                Some(Param::Index(i)) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Resolves every angle against `params`.
    pub fn bind(&self, params: &[f64]) -> Result<Vec<Gate>> {
        let need = self.num_params();
        if params.len() < need {
            return Err(Error::DimensionMismatch { expected: need, actual: params.len() });
        }
        self.ops
            .iter()
            .map(|op| {
                let angle = match op.param {
                    Some(Param::Fixed(a)) => a,
                    Some(Param::Index(i)) => params[i],
                    None => 0.0,
                };
                if op.param.is_some() && !op.kind.is_rotation() {
                    return Err(Error::UnsupportedGate(format!("{:?} takes no angle", op.kind)));
                }
                let gate = Gate { kind: op.kind, targets: op.targets.clone(), angle };
                gate.validate(self.qubits)?;
                Ok(gate)
            })
            .collect()
    }
}

/// A register is either a pure state or a density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Register {
    Pure(QuantumState),
    Mixed(DensityMatrix),
}

impl Register {
    pub fn qubits(&self) -> usize {
        match self {
            Self::Pure(s) => s.qubits(),
            Self::Mixed(r) => r.qubits(),
        }
    }

    pub fn expectation_x_all(&self) -> f64 {
        match self {
            Self::Pure(s) => s.expectation_x_all(),
            Self::Mixed(r) => r.expectation_x_all(),
        }
    }
}

/// Applies `gates` in order. Noise is only meaningful for a density matrix;
/// requesting it on a pure register is an error.
pub fn evolve(register: Register, gates: &[Gate], noise: Option<&NoiseSpec>) -> Result<Register> {
    match (register, noise) {
        (Register::Pure(_), Some(_)) => Err(Error::NoiseOnPureState),
        (Register::Pure(mut s), None) => {
            for g in gates {
                s.apply(g)?;
            }
            Ok(Register::Pure(s))
        }
        (Register::Mixed(mut r), noise) => {
            for g in gates {
                match noise {
                    Some(n) => r.apply_noisy(g, n)?,
                    None => r.apply(g)?,
                }
            }
            Ok(Register::Mixed(r))
        }
    }
}

/// `⟨X⊗…⊗X⟩` after running `circuit` bound to `params` on `input`.
pub fn circuit_expectation(circuit: &Circuit, params: &[f64], input: &QuantumState) -> Result<f64> {
    if input.qubits() != circuit.qubits {
        return Err(Error::DimensionMismatch { expected: circuit.qubits, actual: input.qubits() });
    }
    let gates = circuit.bind(params)?;
    Ok(evolve(Register::Pure(input.clone()), &gates, None)?.expectation_x_all())
}

/// Gradient of `⟨X⊗…⊗X⟩` with respect to each parameter.
///
/// Each occurrence of a parameter contributes `(f(+π/2) - f(-π/2)) / 2`
/// with only that occurrence shifted, so shared parameters are handled by
/// the product rule.
pub fn parameter_shift_gradient(circuit: &Circuit, params: &[f64], input: &QuantumState) -> Result<Vec<f64>> {
    let base = circuit.bind(params)?;
    if input.qubits() != circuit.qubits {
        return Err(Error::DimensionMismatch { expected: circuit.qubits, actual: input.qubits() });
    }
    let mut grad = vec![0.0; params.len()];
    for (pos, op) in circuit.ops.iter().enumerate() {
        let Some(Param::Index(i)) = op.param else { continue };
        if !matches!(op.kind, GateKind::RX | GateKind::RY | GateKind::RZ) {
            return Err(Error::UnsupportedGate(format!("{:?} has no parameter-shift rule", op.kind)));
        }
        let mut shifted = base.clone();
        let mut eval = |delta: f64| -> Result<f64> {
            shifted[pos].angle = base[pos].angle + delta;
            Ok(evolve(Register::Pure(input.clone()), &shifted, None)?.expectation_x_all())
        };
        let plus = eval(FRAC_PI_2)?;
        let minus = eval(-FRAC_PI_2)?;
        grad[i] += 0.5 * (plus - minus);
    }
    Ok(grad)
}
