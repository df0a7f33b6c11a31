use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitude vector of length `2^Q`.
///
/// Circuit outputs are unit vectors. Derivative states of controlled
/// rotations are projected insertions and may have norm below one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes after checking the length is a power of two and the norm is one.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let s = StateVector::from_amplitudes(amplitudes)?;
        s.check_unit(1e-12)?;
        Ok(s)
    }

    /// Wraps amplitudes without a norm check.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "state length {n} is not a power of two >= 2"
            )));
        }
        Ok(StateVector { amplitudes })
    }

    pub fn zero(num_qubits: usize) -> Self {
        StateVector::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_unit(&self, tol: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!("state norm {n} is not 1")));
        }
        Ok(())
    }

    /// `⟨self, other⟩ = Σ conj(self_k) other_k`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }
}
