use num_complex::Complex64 as C64;

use super::gates::{apply_matrix, Gate};
use crate::error::{Error, Result};

/// Pure state of `q` qubits: `2^q` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    qubits: usize,
    amps: Vec<C64>,
}

impl QuantumState {
    /// `|0…0⟩`.
    pub fn zero(qubits: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
        amps[0] = C64::new(1.0, 0.0);
        Self { qubits, amps }
    }

    /// Wraps amplitudes whose squared magnitudes sum to 1 within 1e-9.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("amplitude count {len} is not a power of two")));
        }
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::NonUnitNorm { norm: total.sqrt() });
        }
        Ok(Self { qubits: len.trailing_zeros() as usize, amps })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.qubits)?;
        apply_matrix(&mut self.amps, self.qubits, &gate.targets, &gate.matrix());
        Ok(())
    }

    /// `⟨ψ| X⊗…⊗X |ψ⟩`.
    pub fn expectation_x_all(&self) -> f64 {
        let mask = self.amps.len() - 1;
        self.amps
            .iter()
            .enumerate()
            .map(|(j, a)| (a.conj() * self.amps[j ^ mask]).re)
            .sum()
    }

    /// Probability of measuring basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }
}

/// Qubits needed for `len` amplitudes (at least one).
pub fn qubits_for(len: usize) -> usize {
    crate::bounds::min_qubits(len.max(2)) as usize
}

/// Normalizes `x` and zero-pads it to `2^qubits` real amplitudes.
pub fn amplitude_encode(x: &[f64], qubits: usize) -> Result<QuantumState> {
    let dim = 1usize << qubits;
    if x.len() > dim {
        return Err(Error::TooManyAmplitudes { amplitudes: x.len(), qubits });
    }
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (a, v) in amps.iter_mut().zip(x) {
        *a = C64::new(v / n, 0.0);
    }
    Ok(QuantumState { qubits, amps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gates::Gate;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn encoding_examples() {
        let s = amplitude_encode(&[1.0, 0.0, 0.0, 0.0], 2).unwrap();
        assert_eq!(s, QuantumState::zero(2));

        let s = amplitude_encode(&[1.0, 1.0, 1.0], 2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        for (a, want) in s.amplitudes().iter().zip([r, r, r, 0.0]) {
            assert!((a.re - want).abs() < 1e-15 && a.im == 0.0);
        }

        let s = amplitude_encode(&[3.0, 4.0], 1).unwrap();
        assert!((s.amplitudes()[0].re - 0.6).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn encoding_errors() {
        assert!(matches!(amplitude_encode(&[1.0; 5], 2), Err(Error::TooManyAmplitudes { .. })));
        assert!(matches!(amplitude_encode(&[0.0, 0.0], 1), Err(Error::ZeroVector)));
    }

    #[test]
    fn ry_pi_flips() {
        let mut s = QuantumState::zero(1);
        s.apply(&Gate::ry(0, PI)).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cz_phases_only_11() {
        for idx in 0..4 {
            let mut amps = vec![C64::new(0.0, 0.0); 4];
            amps[idx] = C64::new(1.0, 0.0);
            let mut s = QuantumState::from_amplitudes(amps).unwrap();
            s.apply(&Gate::cz(0, 1)).unwrap();
            let want = if idx == 3 { -1.0 } else { 1.0 };
            assert_eq!(s.amplitudes()[idx], C64::new(want, 0.0));
        }
    }

    #[test]
    fn x_expectations() {
        let plus = vec![C64::new(0.5, 0.0); 4];
        assert!((QuantumState::from_amplitudes(plus).unwrap().expectation_x_all() - 1.0).abs() < 1e-15);
        assert_eq!(QuantumState::zero(3).expectation_x_all(), 0.0);
        for theta in [0.3, 1.1, 2.5] {
            let mut s = QuantumState::zero(1);
            s.apply(&Gate::ry(0, theta)).unwrap();
            assert!((s.expectation_x_all() - f64::sin(theta)).abs() < 1e-14);
        }
        let s = amplitude_encode(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2], 1).unwrap();
        assert!((s.expectation_x_all() + 1.0).abs() < 1e-15);
    }
}
