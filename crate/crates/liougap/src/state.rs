//! Exact statevector storage and the action of Pauli sums on it.
//!
//! Amplitudes are indexed by computational basis states with qubit 0 as the
//! least significant bit. Applying a Pauli sum costs `O(terms · 2^n)`: each
//! string permutes the basis by XOR with its X-mask and multiplies by a
//! phase, so no dense matrix is ever formed.

use num_complex::Complex64;

use crate::pauli::PauliSum;
use crate::{Error, Result};

/// A pure state of `n` qubits as `2^n` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amps: Vec<Complex64>,
    qubits: usize,
}

impl Statevector {
    /// The all-zeros basis state `|0…0⟩`.
    pub fn zero_state(qubits: usize) -> Self {
        assert!(qubits >= 1 && qubits <= 30, "qubit count {qubits} outside 1..=30");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Statevector { amps, qubits }
    }

    /// Wrap an amplitude vector; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Domain(format!(
                "amplitude vector length {len} is not a power of two ≥ 2"
            )));
        }
        Ok(Statevector { amps, qubits: len.trailing_zeros() as usize })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Euclidean norm `‖ψ‖`.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Rescale to unit norm; errors on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        for a in &mut self.amps {
            *a /= n;
        }
        Ok(self)
    }

    /// In-place `self ← self − c · other`.
    pub fn sub_scaled(&mut self, c: Complex64, other: &Statevector) -> Result<()> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch { left: self.qubits, right: other.qubits });
        }
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a -= c * b;
        }
        Ok(())
    }
}

/// Inner product `⟨a|b⟩` (conjugate-linear in the first argument).
pub fn overlap(a: &Statevector, b: &Statevector) -> Result<Complex64> {
    if a.qubits != b.qubits {
        return Err(Error::DimensionMismatch { left: a.qubits, right: b.qubits });
    }
    Ok(a.amps
        .iter()
        .zip(&b.amps)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `A|ψ⟩` for a Pauli sum `A`, without forming a dense matrix.
pub fn apply_operator(a: &PauliSum, psi: &Statevector) -> Result<Statevector> {
    if a.qubit_count() != psi.qubits {
        return Err(Error::DimensionMismatch { left: a.qubit_count(), right: psi.qubits });
    }
    let dim = psi.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for &(coeff, s) in a.terms() {
        let x = s.x_mask() as usize;
        let z = s.z_mask();
        let base = coeff * s.column_factor(0);
        for idx in 0..dim {
            let sign = if ((idx as u64) & z).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
            out[idx ^ x] += base * sign * psi.amps[idx];
        }
    }
    Ok(Statevector { amps: out, qubits: psi.qubits })
}

/// Matrix element `⟨ψ|A|ψ⟩`.
pub fn expectation(a: &PauliSum, psi: &Statevector) -> Result<Complex64> {
    let api = apply_operator(a, psi)?;
    overlap(psi, &api)
}
