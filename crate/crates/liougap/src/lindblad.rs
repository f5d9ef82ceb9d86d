//! Lindblad models and their vectorized (superoperator) form.
//!
//! A model is a Hermitian Hamiltonian `H` plus jump operators `L_j` with
//! rates `γ_j`, generating `dρ/dt = −i[H,ρ] + Σ_j γ_j (L_j ρ L_j† −
//! ½{L_j†L_j, ρ})`. Vectorization maps the density matrix to a state of
//! `2N` qubits — `ρ ↦ Σ_{mn} ρ_{mn} |m⟩_ket ⊗ |n⟩_bra`, with the ket factor
//! on qubits `0..N` and the bra factor on qubits `N..2N` — under which the
//! generator becomes the (generally non-Hermitian) Pauli sum
//!
//! ```text
//! L̂ = −i H⊗I + i I⊗Hᵀ + Σ_j γ_j ( L_j ⊗ L_j* − ½ L_j†L_j ⊗ I − ½ I ⊗ L_jᵀL_j* )
//! ```
//!
//! where `A ⊗ B` means `A` on the ket register and `B` on the bra register.
//! Trace preservation turns into `L̂†|B⟩ = 0` for the uniform Bell state
//! `|B⟩ = 2^{−N/2} Σ_n |n⟩⊗|n⟩`, and the trace of a vectorized matrix is
//! proportional to `⟨B|ρ⟩` — the penalty the variational solver uses to
//! steer away from the steady state.

use ndarray::Array2;
use num_complex::Complex64;

use crate::pauli::{Axis, PauliString, PauliSum, DEFAULT_DROP_TOL};
use crate::state::Statevector;
use crate::{Error, Result};

/// Which single-site dissipation channel an XXZ model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// `σ⁻ = (X − iY)/2` on every site.
    Lowering,
    /// `Z` on every site.
    Dephasing,
}

/// One dissipation channel: a non-negative rate and its jump operator.
#[derive(Debug, Clone)]
pub struct Jump {
    pub rate: f64,
    pub operator: PauliSum,
}

/// A Lindblad master equation on `N` spins.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    spins: usize,
    hamiltonian: PauliSum,
    jumps: Vec<Jump>,
    kappa_hint: Option<f64>,
}

impl LindbladModel {
    /// Assemble a model from parts. The Hamiltonian must be Hermitian (all
    /// collected coefficients real within `1e-12`) and rates non-negative.
    pub fn new(spins: usize, hamiltonian: PauliSum, jumps: Vec<Jump>) -> Result<Self> {
        if spins < 1 {
            return Err(Error::Domain("model needs at least one spin".into()));
        }
        if hamiltonian.qubit_count() != spins {
            return Err(Error::DimensionMismatch {
                left: spins,
                right: hamiltonian.qubit_count(),
            });
        }
        let collected = hamiltonian.collect(0.0);
        for (c, s) in collected.terms() {
            if c.im.abs() > 1e-12 {
                return Err(Error::Domain(format!(
                    "Hamiltonian is not Hermitian: term {} has imaginary coefficient {}",
                    s.label(),
                    c.im
                )));
            }
        }
        for j in &jumps {
            if !(j.rate >= 0.0) {
                return Err(Error::Domain(format!("negative jump rate {}", j.rate)));
            }
            if j.operator.qubit_count() != spins {
                return Err(Error::DimensionMismatch {
                    left: spins,
                    right: j.operator.qubit_count(),
                });
            }
        }
        Ok(LindbladModel { spins, hamiltonian, jumps, kappa_hint: None })
    }

    /// Heisenberg XXZ chain with single-site dissipation:
    /// `H = Σ_{j<N−1} (X_j X_{j+1} + Y_j Y_{j+1} + J_z Z_j Z_{j+1})` and one
    /// jump of the chosen kind with rate `γ` on every site. `N = 1` yields
    /// an empty Hamiltonian (no bonds) with dissipation only.
    pub fn xxz(spins: usize, jz: f64, gamma: f64, kind: JumpKind) -> Result<Self> {
        if spins < 1 {
            return Err(Error::Domain("model needs at least one spin".into()));
        }
        if !(gamma >= 0.0) {
            return Err(Error::Domain(format!("negative dissipation rate {gamma}")));
        }
        let one = Complex64::new(1.0, 0.0);
        let mut h = PauliSum::zero(spins);
        for j in 0..spins.saturating_sub(1) {
            for (axis, w) in [(Axis::X, 1.0), (Axis::Y, 1.0), (Axis::Z, jz)] {
                let mut axes = vec![Axis::I; spins];
                axes[j] = axis;
                axes[j + 1] = axis;
                h.push(one * w, PauliString::from_axes(&axes))?;
            }
        }
        let jumps = (0..spins)
            .map(|site| {
                let operator = match kind {
                    JumpKind::Lowering => {
                        // σ⁻ = (X − iY)/2
                        let mut op = PauliSum::zero(spins);
                        op.push(Complex64::new(0.5, 0.0), PauliString::single(spins, site, Axis::X))
                            .unwrap();
                        op.push(Complex64::new(0.0, -0.5), PauliString::single(spins, site, Axis::Y))
                            .unwrap();
                        op
                    }
                    JumpKind::Dephasing => {
                        PauliSum::single(spins, site, Axis::Z, Complex64::new(1.0, 0.0))
                    }
                };
                Jump { rate: gamma, operator }
            })
            .collect();
        let mut model = LindbladModel::new(spins, h.collect(DEFAULT_DROP_TOL), jumps)?;
        // spin-count-squared penalty weight works well for this family
        model.kappa_hint = Some((spins * spins) as f64);
        Ok(model)
    }

    pub fn spin_count(&self) -> usize {
        self.spins
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Model-specific penalty weight suggestion, if the builder set one.
    pub fn kappa_hint(&self) -> Option<f64> {
        self.kappa_hint
    }
}

/// The vectorized generator: a Pauli sum on `2N` qubits tagged with the spin
/// count so ket/bra registers stay identifiable.
#[derive(Debug, Clone)]
pub struct VectorizedLiouvillian {
    spins: usize,
    op: PauliSum,
}

impl VectorizedLiouvillian {
    /// Wrap an arbitrary collected operator on `2·spins` qubits. Lets the
    /// variance machinery target any operator, not only generators built by
    /// [`vectorize`].
    pub fn from_operator(spins: usize, op: PauliSum) -> Result<Self> {
        if spins == 0 {
            return Err(Error::Domain("spin count must be positive".into()));
        }
        if op.qubit_count() != 2 * spins {
            return Err(Error::DimensionMismatch {
                left: op.qubit_count(),
                right: 2 * spins,
            });
        }
        Ok(Self { spins, op: op.collect(DEFAULT_DROP_TOL) })
    }

    pub fn spin_count(&self) -> usize {
        self.spins
    }

    pub fn qubit_count(&self) -> usize {
        2 * self.spins
    }

    pub fn operator(&self) -> &PauliSum {
        &self.op
    }
}

/// Pad an `N`-qubit operator to `2N` qubits acting on the ket register
/// (qubits `0..N`).
fn embed_ket(a: &PauliSum, spins: usize) -> PauliSum {
    embed(a, spins, 0)
}

/// Pad an `N`-qubit operator to `2N` qubits acting on the bra register
/// (qubits `N..2N`).
fn embed_bra(a: &PauliSum, spins: usize) -> PauliSum {
    embed(a, spins, spins)
}

fn embed(a: &PauliSum, spins: usize, offset: usize) -> PauliSum {
    let mut out = PauliSum::zero(2 * spins);
    for &(c, s) in a.terms() {
        let mut axes = vec![Axis::I; 2 * spins];
        for k in 0..spins {
            axes[k + offset] = s.axis(k);
        }
        out.push(c, PauliString::from_axes(&axes)).unwrap();
    }
    out
}

/// `A` on the ket register times `B` on the bra register in one step; the
/// registers are disjoint so no phases arise.
fn tensor_ket_bra(a: &PauliSum, b: &PauliSum, spins: usize) -> PauliSum {
    let mut out = PauliSum::zero(2 * spins);
    for &(ca, sa) in a.terms() {
        for &(cb, sb) in b.terms() {
            let mut axes = vec![Axis::I; 2 * spins];
            for k in 0..spins {
                axes[k] = sa.axis(k);
                axes[k + spins] = sb.axis(k);
            }
            out.push(ca * cb, PauliString::from_axes(&axes)).unwrap();
        }
    }
    out
}

/// The `2N`-qubit operator `A ⊗ Bᵀ` satisfying
/// `sandwich_operator(A, B) · vec(ρ) = vec(A ρ B)` under this crate's
/// vectorization layout (ket register low, bra register high).
pub fn sandwich_operator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    if a.qubit_count() != b.qubit_count() {
        return Err(Error::DimensionMismatch { left: a.qubit_count(), right: b.qubit_count() });
    }
    let n = a.qubit_count();
    Ok(tensor_ket_bra(a, &b.transpose(), n).collect(DEFAULT_DROP_TOL))
}

/// Vectorize the generator of a model into a collected Pauli sum on `2N`
/// qubits (see the module docs for the formula and register layout).
pub fn vectorize(model: &LindbladModel) -> VectorizedLiouvillian {
    let n = model.spins;
    let i = Complex64::new(0.0, 1.0);
    let mut acc = PauliSum::zero(2 * n);

    let h = &model.hamiltonian;
    acc = acc.add(&embed_ket(h, n).scaled(-i)).unwrap();
    acc = acc.add(&embed_bra(&h.transpose(), n).scaled(i)).unwrap();

    for jump in &model.jumps {
        let g = Complex64::new(jump.rate, 0.0);
        let l = &jump.operator;
        let sandwich = tensor_ket_bra(l, &l.conjugate(), n);
        let ldl = l.adjoint().multiply(l).unwrap();
        let ldl_bra = l.transpose().multiply(&l.conjugate()).unwrap();
        acc = acc.add(&sandwich.scaled(g)).unwrap();
        acc = acc.add(&embed_ket(&ldl, n).scaled(-0.5 * g)).unwrap();
        acc = acc.add(&embed_bra(&ldl_bra, n).scaled(-0.5 * g)).unwrap();
    }

    VectorizedLiouvillian { spins: n, op: acc.collect(DEFAULT_DROP_TOL) }
}

/// The uniform Bell state `|B⟩ = 2^{−N/2} Σ_n |n⟩_ket ⊗ |n⟩_bra` on `2N`
/// qubits; `⟨B|ρ⟩ ∝ Tr ρ` for vectorized matrices.
pub fn bell_state(spins: usize) -> Statevector {
    assert!(spins >= 1 && spins <= 15, "spin count {spins} outside 1..=15");
    let dim = 1usize << (2 * spins);
    let amp = Complex64::new((1.0 / (1u64 << spins) as f64).sqrt(), 0.0);
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for m in 0..1usize << spins {
        amps[m + (m << spins)] = amp;
    }
    Statevector::from_amplitudes(amps).unwrap()
}

/// Vectorize a density matrix (or any square matrix on `2^N` dimensions)
/// into a normalized state: amplitudes `ρ_{mn}/C` at index `m + 2^N·n` with
/// `C = ‖ρ‖_F`.
pub fn vectorize_density(rho: &Array2<Complex64>) -> Result<Statevector> {
    let (rows, cols) = rho.dim();
    if rows != cols || rows < 2 || !rows.is_power_of_two() {
        return Err(Error::Domain(format!(
            "density matrix must be square with power-of-two dimension, got {rows}×{cols}"
        )));
    }
    let n = rows.trailing_zeros() as usize;
    let norm = rho.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("cannot vectorize the zero matrix".into()));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); rows * rows];
    for m in 0..rows {
        for nn in 0..rows {
            amps[m + (nn << n)] = rho[[m, nn]] / norm;
        }
    }
    Statevector::from_amplitudes(amps)
}

/// The Hermitian part `(L̂ + L̂†)/2`, collected.
pub fn hermitian_part(l: &VectorizedLiouvillian) -> PauliSum {
    l.op
        .add(&l.op.adjoint())
        .unwrap()
        .scaled(Complex64::new(0.5, 0.0))
        .collect(DEFAULT_DROP_TOL)
}

/// Offset-step heuristic for the degenerate-gap scan: a dimension-normalized
/// fraction of the Hermitian part's coefficient budget,
/// `safety · ‖(L̂+L̂†)/2‖₁ / 2^e` with `e = exponent_qubits`, floored at
/// `1e-3` so the scan always moves.
pub fn delta_e_heuristic(l: &VectorizedLiouvillian, safety: f64, exponent_qubits: usize) -> f64 {
    let norm = hermitian_part(l).one_norm();
    (safety * norm / (1u64 << exponent_qubits) as f64).max(1e-3)
}

/// [`delta_e_heuristic`] with the default safety factor `0.5` and exponent
/// `2N` (the vectorized qubit count).
pub fn default_delta_e(l: &VectorizedLiouvillian) -> f64 {
    delta_e_heuristic(l, 0.5, l.qubit_count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{dagger, identity, kron, max_abs_diff};
    use crate::state::{apply_operator, overlap};
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_f64(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0
    }

    fn rand_sum(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> PauliSum {
        let mut sum = PauliSum::zero(n);
        for _ in 0..terms {
            let mut axes = Vec::new();
            for _ in 0..n {
                axes.push(match rng.next_u64() % 4 {
                    0 => Axis::I,
                    1 => Axis::X,
                    2 => Axis::Y,
                    _ => Axis::Z,
                });
            }
            sum.push(c(rand_f64(rng), rand_f64(rng)), PauliString::from_axes(&axes)).unwrap();
        }
        sum
    }

    /// Random Hermitian operator: real coefficients on random strings.
    fn rand_hermitian(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> PauliSum {
        let mut sum = PauliSum::zero(n);
        for _ in 0..terms {
            let mut axes = Vec::new();
            for _ in 0..n {
                axes.push(match rng.next_u64() % 4 {
                    0 => Axis::I,
                    1 => Axis::X,
                    2 => Axis::Y,
                    _ => Axis::Z,
                });
            }
            sum.push(c(rand_f64(rng), 0.0), PauliString::from_axes(&axes)).unwrap();
        }
        sum
    }

    /// Superoperator assembled the pedestrian way, by Kronecker products on
    /// dense matrices, with the bra register in the high index bits:
    /// `embed(A_ket, B_bra) = B ⊗ A`.
    fn dense_superop(model: &LindbladModel) -> Array2<Complex64> {
        let n = model.spin_count();
        let dim = 1usize << n;
        let id = identity(dim);
        let h = model.hamiltonian().to_dense().unwrap();
        let i = c(0., 1.);
        let mut sup = kron(&id, &h).mapv(|v| v * (-i)) + kron(&h.t().to_owned(), &id).mapv(|v| v * i);
        for jump in model.jumps() {
            let l = jump.operator.to_dense().unwrap();
            let lc = l.mapv(|v| v.conj());
            let ldl = dagger(&l).dot(&l);
            let g = c(jump.rate, 0.);
            sup = sup
                + kron(&lc, &l).mapv(|v| v * g)
                + kron(&id, &ldl).mapv(|v| v * (-0.5 * g))
                + kron(&ldl.t().to_owned(), &id).mapv(|v| v * (-0.5 * g));
        }
        sup
    }

    #[test]
    fn xxz_builder_produces_expected_terms() {
        let m = LindbladModel::xxz(2, 0.5, 1.0, JumpKind::Lowering).unwrap();
        let h = m.hamiltonian();
        assert_eq!(h.term_count(), 3); // XX + YY + 0.5 ZZ on the single bond
        let labels: Vec<String> = h.terms().iter().map(|(_, s)| s.label()).collect();
        assert_eq!(labels, ["XX", "YY", "ZZ"]);
        assert_eq!(h.terms()[2].0, c(0.5, 0.));
        assert_eq!(m.jumps().len(), 2);
        assert_eq!(m.jumps()[0].operator.term_count(), 2); // (X − iY)/2
        assert_eq!(m.kappa_hint(), Some(4.0));

        // N = 1: no bonds, dissipation only
        let m1 = LindbladModel::xxz(1, 0.7, 1.0, JumpKind::Lowering).unwrap();
        assert!(m1.hamiltonian().is_zero());
        assert_eq!(m1.jumps().len(), 1);

        let d = LindbladModel::xxz(3, 1.0, 0.5, JumpKind::Dephasing).unwrap();
        assert_eq!(d.hamiltonian().term_count(), 6);
        assert_eq!(d.jumps()[1].operator.terms()[0].1.label(), "IZI");
    }

    #[test]
    fn non_hermitian_hamiltonian_is_rejected() {
        let mut h = PauliSum::zero(2);
        h.push(c(0., 1.), "XX".parse().unwrap()).unwrap();
        assert!(LindbladModel::new(2, h, vec![]).is_err());
        // negative rate
        let jump = Jump { rate: -1.0, operator: PauliSum::identity(2) };
        assert!(LindbladModel::new(2, PauliSum::zero(2), vec![jump]).is_err());
        assert!(LindbladModel::xxz(2, 1.0, -0.1, JumpKind::Lowering).is_err());
    }

    #[test]
    fn vectorization_matches_dense_superoperator() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        // random single- and two-spin models with one or two jumps
        for _ in 0..20 {
            let n = 1 + (rng.next_u64() % 2) as usize;
            let h = rand_hermitian(&mut rng, n, 3);
            let jumps = (0..1 + (rng.next_u64() % 2) as usize)
                .map(|_| Jump { rate: 0.25 + rand_f64(&mut rng).abs(), operator: rand_sum(&mut rng, n, 2) })
                .collect();
            let model = LindbladModel::new(n, h, jumps).unwrap();
            let l = vectorize(&model);
            assert!(max_abs_diff(&l.operator().to_dense().unwrap(), &dense_superop(&model)) < 1e-12);
        }
        // and the named models used throughout
        for kind in [JumpKind::Lowering, JumpKind::Dephasing] {
            let model = LindbladModel::xxz(2, 0.5, 1.0, kind).unwrap();
            let l = vectorize(&model);
            assert!(max_abs_diff(&l.operator().to_dense().unwrap(), &dense_superop(&model)) < 1e-12);
        }
    }

    #[test]
    fn vectorized_action_matches_lindblad_rhs_on_random_density() {
        // vec(ℒρ) computed densely must equal L̂ · vec(ρ)
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let model = LindbladModel::xxz(2, 0.5, 1.0, JumpKind::Lowering).unwrap();
        let l = vectorize(&model);
        let dim = 4;
        for _ in 0..10 {
            let mut rho = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    rho[[i, j]] = c(rand_f64(&mut rng), rand_f64(&mut rng));
                }
            }
            let h = model.hamiltonian().to_dense().unwrap();
            let i_unit = c(0., 1.);
            let mut rhs = h.dot(&rho).mapv(|v| v * (-i_unit)) + rho.dot(&h).mapv(|v| v * i_unit);
            for jump in model.jumps() {
                let lm = jump.operator.to_dense().unwrap();
                let ld = dagger(&lm);
                let g = c(jump.rate, 0.);
                let anti = ld.dot(&lm).dot(&rho) + rho.dot(&ld.dot(&lm));
                rhs = rhs + (lm.dot(&rho).dot(&ld) - anti.mapv(|v| v * 0.5)).mapv(|v| v * g);
            }
            // compare unnormalized vectorizations: both sides scaled by ‖ρ‖_F
            let rho_vec = vectorize_density(&rho).unwrap();
            let lhs = apply_operator(l.operator(), &rho_vec).unwrap();
            let rho_norm = rho.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for m in 0..dim {
                for nn in 0..dim {
                    let got = lhs.amplitudes()[m + (nn << 2)] * rho_norm;
                    assert!((got - rhs[[m, nn]]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn vec_of_product_identity() {
        // vec(AρB) = embed_ket(A)·embed_bra(Bᵀ)·vec(ρ) on random operators
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let n = 1 + (rng.next_u64() % 2) as usize;
            let dim = 1usize << n;
            let a = rand_sum(&mut rng, n, 2);
            let b = rand_sum(&mut rng, n, 2);
            let mut rho = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    rho[[i, j]] = c(rand_f64(&mut rng), rand_f64(&mut rng));
                }
            }
            let arb = a.to_dense().unwrap().dot(&rho).dot(&b.to_dense().unwrap());
            let embedded = embed_ket(&a, n).multiply(&embed_bra(&b.transpose(), n)).unwrap();
            let rho_vec = vectorize_density(&rho).unwrap();
            let got = apply_operator(&embedded, &rho_vec).unwrap();
            let rho_norm = rho.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for m in 0..dim {
                for nn in 0..dim {
                    let want = arb[[m, nn]] / rho_norm;
                    assert!((got.amplitudes()[m + (nn << n)] - want).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bell_state_is_annihilated_by_adjoint_generator() {
        // trace preservation: L̂†|B⟩ = 0 for every model
        for (n, kind) in [(1, JumpKind::Lowering), (2, JumpKind::Lowering), (2, JumpKind::Dephasing), (3, JumpKind::Lowering)] {
            let model = LindbladModel::xxz(n, 0.8, 1.3, kind).unwrap();
            let l = vectorize(&model);
            let bell = bell_state(n);
            assert!((bell.norm() - 1.0).abs() < 1e-14);
            let residual = apply_operator(&l.operator().adjoint(), &bell).unwrap().norm();
            assert!(residual < 1e-10, "N={n} {kind:?}: residual {residual}");
        }
        // and for a random model
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let h = rand_hermitian(&mut rng, 2, 3);
        let jumps = vec![Jump { rate: 0.9, operator: rand_sum(&mut rng, 2, 2) }];
        let model = LindbladModel::new(2, h, jumps).unwrap();
        let residual =
            apply_operator(&vectorize(&model).operator().adjoint(), &bell_state(2)).unwrap().norm();
        assert!(residual < 1e-10);
    }

    #[test]
    fn bell_overlap_measures_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let n = 2;
        let dim = 1usize << n;
        let mut rho = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                rho[[i, j]] = c(rand_f64(&mut rng), rand_f64(&mut rng));
            }
        }
        let trace: Complex64 = (0..dim).map(|i| rho[[i, i]]).sum();
        let rho_norm = rho.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let v = vectorize_density(&rho).unwrap();
        let got = overlap(&bell_state(n), &v).unwrap();
        // ⟨B|vec(ρ)⟩ = Tr(ρ) / (2^{N/2} ‖ρ‖_F)
        let want = trace / (rho_norm * (dim as f64).sqrt());
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn vectorize_density_rejects_bad_shapes() {
        assert!(vectorize_density(&Array2::zeros((3, 3))).is_err());
        assert!(vectorize_density(&Array2::zeros((2, 4))).is_err());
        assert!(vectorize_density(&Array2::zeros((2, 2))).is_err()); // zero matrix
        let rho = Array2::from_diag_elem(2, c(0.5, 0.));
        let v = vectorize_density(&rho).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_part_is_hermitian_and_halves_the_sum() {
        let model = LindbladModel::xxz(2, 0.5, 1.0, JumpKind::Lowering).unwrap();
        let l = vectorize(&model);
        let h = hermitian_part(&l);
        let hd = h.to_dense().unwrap();
        assert!(max_abs_diff(&hd, &dagger(&hd)) < 1e-12);
        let ld = l.operator().to_dense().unwrap();
        let want = (&ld + &dagger(&ld)).mapv(|v| v * c(0.5, 0.));
        assert!(max_abs_diff(&hd, &want) < 1e-12);
    }

    #[test]
    fn dephasing_generator_is_hermitian_with_known_offset_scale() {
        // pure dephasing: Hamiltonian part is anti-Hermitian, dissipator part
        // Hermitian with coefficient budget 2γN (N Z⊗Z terms + N identities)
        let model = LindbladModel::xxz(2, 1.0, 1.0, JumpKind::Dephasing).unwrap();
        let l = vectorize(&model);
        let h = hermitian_part(&l);
        assert!((h.one_norm() - 4.0).abs() < 1e-12);
        let de = delta_e_heuristic(&l, 0.5, l.qubit_count());
        assert!((de - 0.5 * 4.0 / 16.0).abs() < 1e-12);
        assert!((default_delta_e(&l) - de).abs() < 1e-15);
        // floor: a trace-preserving unitary-only model has zero Hermitian part
        let unitary = LindbladModel::xxz(2, 1.0, 0.0, JumpKind::Dephasing).unwrap();
        let lu = vectorize(&unitary);
        assert_eq!(default_delta_e(&lu), 1e-3);
    }

    #[test]
    fn vectorized_term_count_is_stable() {
        let model = LindbladModel::xxz(2, 0.5, 1.0, JumpKind::Lowering).unwrap();
        let a = vectorize(&model).operator().term_count();
        let b = vectorize(&model).operator().term_count();
        assert_eq!(a, b);
        assert!(a > 0);
        let labels_a: Vec<String> =
            vectorize(&model).operator().terms().iter().map(|(_, s)| s.label()).collect();
        let labels_b: Vec<String> =
            vectorize(&model).operator().terms().iter().map(|(_, s)| s.label()).collect();
        assert_eq!(labels_a, labels_b);
    }
}
