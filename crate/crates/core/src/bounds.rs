//! Qubit-count bounds for encoding `D` principal components on a noisy
//! device, assuming independent per-qubit errors.
//!
//! Lower bound: `q ≥ ⌈log₂ D⌉`. Upper bound from a maximum acceptable system
//! error `P_max` and per-qubit error `p`: `q ≤ ⌊ln(1 - P_max) / ln(1 - p)⌋`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qpga::components_for_variance;

/// Error model named in every report produced here.
pub const ASSUMPTION: &str = "independent-qubit-errors";

/// Per-qubit error probability and maximum acceptable system error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub p: f64,
    pub p_max: f64,
}

impl NoiseBudget {
    pub fn new(p: f64, p_max: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidConfig(format!("p must lie in [0, 1), got {p}")));
        }
        if !(p_max > 0.0 && p_max < 1.0) {
            return Err(Error::InvalidConfig(format!("p_max must lie in (0, 1), got {p_max}")));
        }
        Ok(Self { p, p_max })
    }
}

/// Upper qubit bound; `Unbounded` in the noiseless limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QubitLimit {
    Finite(u32),
    Unbounded,
}

impl QubitLimit {
    pub fn admits(&self, q: u32) -> bool {
        match self {
            Self::Finite(m) => q <= *m,
            Self::Unbounded => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitBudget {
    pub components: usize,
    pub q_min: u32,
    /// `null` in JSON when unbounded.
    pub q_max: Option<u32>,
    pub feasible: bool,
    pub system_error_at_qmin: f64,
    pub assumptions: String,
}

/// `⌈log₂ d⌉` in integer arithmetic; `d = 1` gives 0.
pub fn min_qubits(d: usize) -> u32 {
    assert!(d >= 1, "component count must be at least 1");
    if d == 1 {
        0
    } else {
        usize::BITS - (d - 1).leading_zeros()
    }
}

/// `⌊ln(1 - P_max) / ln(1 - p)⌋`, with ratios within a 1e-12 relative guard
/// of an integer snapped to that integer before flooring.
pub fn max_qubits(budget: &NoiseBudget) -> QubitLimit {
    if budget.p == 0.0 {
        return QubitLimit::Unbounded;
    }
    let ratio = (-budget.p_max).ln_1p() / (-budget.p).ln_1p();
    let nearest = ratio.round();
    let snapped = if (ratio - nearest).abs() <= 1e-12 * nearest.abs().max(1.0) { nearest } else { ratio.floor() };
    if snapped >= u32::MAX as f64 {
        QubitLimit::Unbounded
    } else {
        QubitLimit::Finite(snapped.max(0.0) as u32)
    }
}

/// `1 - (1 - p)^q`: probability that at least one of `q` qubits errs.
pub fn system_error(p: f64, q: u32) -> f64 {
    -((q as f64) * (-p).ln_1p()).exp_m1()
}

/// Combined lower/upper bound for a spectrum, variance fraction and budget.
pub fn feasible_qubit_range(eigenvalues: &[f64], beta: f64, budget: &NoiseBudget) -> Result<QubitBudget> {
    let d = components_for_variance(eigenvalues, beta)?;
    Ok(budget_for_components(d, budget))
}

/// Same as [`feasible_qubit_range`] with the component count given directly.
pub fn budget_for_components(d: usize, budget: &NoiseBudget) -> QubitBudget {
    let q_min = min_qubits(d);
    let limit = max_qubits(budget);
    QubitBudget {
        components: d,
        q_min,
        q_max: match limit {
            QubitLimit::Finite(q) => Some(q),
            QubitLimit::Unbounded => None,
        },
        feasible: limit.admits(q_min),
        system_error_at_qmin: system_error(budget.p, q_min),
        assumptions: ASSUMPTION.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_qubit_values() {
        assert_eq!(min_qubits(1), 0);
        assert_eq!(min_qubits(2), 1);
        assert_eq!(min_qubits(4), 2);
        assert_eq!(min_qubits(5), 3);
        assert_eq!(min_qubits(16), 4);
        assert_eq!(min_qubits(17), 5);
        for k in 0..=62u32 {
            assert_eq!(min_qubits(1usize << k), k);
        }
    }

    #[test]
    fn max_qubit_values() {
        assert_eq!(max_qubits(&NoiseBudget::new(0.5, 0.5).unwrap()), QubitLimit::Finite(1));
        assert_eq!(max_qubits(&NoiseBudget::new(0.01, 0.05).unwrap()), QubitLimit::Finite(5));
        assert_eq!(max_qubits(&NoiseBudget::new(0.0, 0.05).unwrap()), QubitLimit::Unbounded);
        assert_eq!(max_qubits(&NoiseBudget::new(0.3, 0.3).unwrap()), QubitLimit::Finite(1));
        // 1 - 0.9^2 = 0.19 exactly on paper, slightly off in floating point
        assert_eq!(max_qubits(&NoiseBudget::new(0.1, 0.19).unwrap()), QubitLimit::Finite(2));
    }

    #[test]
    fn budget_validation() {
        assert!(NoiseBudget::new(1.0, 0.5).is_err());
        assert!(NoiseBudget::new(-0.1, 0.5).is_err());
        assert!(NoiseBudget::new(0.1, 0.0).is_err());
        assert!(NoiseBudget::new(0.1, 1.0).is_err());
    }

    #[test]
    fn combined_examples() {
        let l = [4.0, 3.0, 2.0, 1.0];
        let b = feasible_qubit_range(&l, 0.6, &NoiseBudget::new(0.01, 0.05).unwrap()).unwrap();
        assert_eq!((b.q_min, b.q_max, b.feasible), (1, Some(5), true));
        assert!((b.system_error_at_qmin - 0.01).abs() < 1e-15);

        let b = feasible_qubit_range(&l, 0.6, &NoiseBudget::new(0.3, 0.3).unwrap()).unwrap();
        assert_eq!((b.q_min, b.q_max, b.feasible), (1, Some(1), true));

        let flat = [1.0; 8];
        let b = feasible_qubit_range(&flat, 0.5, &NoiseBudget::new(0.5, 0.2).unwrap()).unwrap();
        assert_eq!(b.components, 4);
        assert_eq!((b.q_min, b.q_max, b.feasible), (2, Some(0), false));
        assert_eq!(b.assumptions, ASSUMPTION);
    }

    #[test]
    fn unbounded_serializes_as_null() {
        let b = budget_for_components(4, &NoiseBudget::new(0.0, 0.1).unwrap());
        let v = serde_json::to_value(&b).unwrap();
        assert!(v["q_max"].is_null());
        assert_eq!(v["feasible"], true);
    }
}
