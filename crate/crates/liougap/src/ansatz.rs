//! Hardware-efficient variational circuit on a linear qubit chain.
//!
//! One block applies, in order: a layer of `Rz` on every qubit, a layer of
//! `Rx` on every qubit, an `Rzz` on every nearest-neighbour pair, and an
//! `Rxx` on every nearest-neighbour pair. Every gate carries its own angle,
//! consumed from the parameter vector in exactly that order, so a block on
//! `q` qubits uses `2q + 2(q − 1)` parameters.
//!
//! Rotation convention: `R_u(θ) = exp(−iθ σᵘ)` — a **full-angle** generator,
//! so `Rx(π/2)|0⟩ = −i|1⟩` and every gate has period π up to global phase.

use num_complex::Complex64;

use crate::state::Statevector;
use crate::{Error, Result};

/// Shape of the circuit: qubit count and number of repeated blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnsatzSpec {
    qubits: usize,
    blocks: usize,
}

/// Build a circuit description; at least two qubits (the chain needs a bond)
/// and one block.
pub fn build_ansatz(qubits: usize, blocks: usize) -> Result<AnsatzSpec> {
    if qubits < 2 {
        return Err(Error::Domain(format!(
            "ansatz needs at least 2 qubits, got {qubits}"
        )));
    }
    if blocks < 1 {
        return Err(Error::Domain("ansatz needs at least one block".into()));
    }
    if qubits > 30 {
        return Err(Error::Domain(format!("ansatz qubit count {qubits} too large")));
    }
    Ok(AnsatzSpec { qubits, blocks })
}

impl AnsatzSpec {
    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    /// Total number of rotation angles the circuit consumes.
    pub fn parameter_count(&self) -> usize {
        self.blocks * (2 * self.qubits + 2 * (self.qubits - 1))
    }

    /// Run the circuit on `|0…0⟩` with the given angles.
    pub fn run_circuit(&self, theta: &[f64]) -> Result<Statevector> {
        if theta.len() != self.parameter_count() {
            return Err(Error::Domain(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                theta.len()
            )));
        }
        let mut psi = Statevector::zero_state(self.qubits);
        let mut k = 0;
        for _ in 0..self.blocks {
            for q in 0..self.qubits {
                apply_rz(&mut psi, q, theta[k]);
                k += 1;
            }
            for q in 0..self.qubits {
                apply_rx(&mut psi, q, theta[k]);
                k += 1;
            }
            for q in 0..self.qubits - 1 {
                apply_rzz(&mut psi, q, q + 1, theta[k]);
                k += 1;
            }
            for q in 0..self.qubits - 1 {
                apply_rxx(&mut psi, q, q + 1, theta[k]);
                k += 1;
            }
        }
        Ok(psi)
    }
}

/// `exp(−iθZ)`: phase `e^{∓iθ}` on the `|0⟩`/`|1⟩` components of one qubit.
fn apply_rz(psi: &mut Statevector, qubit: usize, theta: f64) {
    let mask = 1usize << qubit;
    let p0 = Complex64::from_polar(1.0, -theta);
    let p1 = Complex64::from_polar(1.0, theta);
    for (idx, a) in psi.amplitudes_mut().iter_mut().enumerate() {
        *a *= if idx & mask == 0 { p0 } else { p1 };
    }
}

/// `exp(−iθX) = cos θ · I − i sin θ · X` on one qubit.
fn apply_rx(psi: &mut Statevector, qubit: usize, theta: f64) {
    let mask = 1usize << qubit;
    let cos = Complex64::new(theta.cos(), 0.0);
    let msin = Complex64::new(0.0, -theta.sin());
    let amps = psi.amplitudes_mut();
    for idx in 0..amps.len() {
        if idx & mask != 0 {
            continue;
        }
        let j = idx | mask;
        let (a, b) = (amps[idx], amps[j]);
        amps[idx] = cos * a + msin * b;
        amps[j] = cos * b + msin * a;
    }
}

/// `exp(−iθ Z_a Z_b)`: phase `e^{−iθ}` where the two bits agree, `e^{+iθ}`
/// where they differ.
fn apply_rzz(psi: &mut Statevector, a: usize, b: usize, theta: f64) {
    let (ma, mb) = (1usize << a, 1usize << b);
    let same = Complex64::from_polar(1.0, -theta);
    let diff = Complex64::from_polar(1.0, theta);
    for (idx, amp) in psi.amplitudes_mut().iter_mut().enumerate() {
        let parity = (idx & ma != 0) != (idx & mb != 0);
        *amp *= if parity { diff } else { same };
    }
}

/// `exp(−iθ X_a X_b) = cos θ · I − i sin θ · X_a X_b`.
fn apply_rxx(psi: &mut Statevector, a: usize, b: usize, theta: f64) {
    let (ma, mb) = (1usize << a, 1usize << b);
    let m = ma | mb;
    let cos = Complex64::new(theta.cos(), 0.0);
    let msin = Complex64::new(0.0, -theta.sin());
    let amps = psi.amplitudes_mut();
    for idx in 0..amps.len() {
        if idx & ma != 0 {
            continue; // visit each {idx, idx^m} pair once, from the bit-a=0 side
        }
        let j = idx ^ m;
        let (x, y) = (amps[idx], amps[j]);
        amps[idx] = cos * x + msin * y;
        amps[j] = cos * y + msin * x;
    }
}
