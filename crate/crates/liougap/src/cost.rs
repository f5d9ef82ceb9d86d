//! Variance cost, steady-state penalty, and gradients.
//!
//! For a candidate eigenpair `(E, |ψ⟩)` of the vectorized generator `L̂`, the
//! residual vector is `|f⟩ = (L̂ − E)|ψ⟩` and the cost is its squared norm
//! `C(E, θ) = ⟨f|f⟩` — zero exactly on eigenpairs, even though `L̂` is not
//! Hermitian. Because the zero-eigenvalue steady state always minimizes `C`
//! at `E = 0`, the pre-training stage adds an overlap penalty with the
//! uniform Bell state `|B⟩` (the trace witness): `C₁ = C + κ·|⟨ψ|B⟩|²`,
//! which pushes the search into the traceless sector where the first excited
//! eigenvector lives.
//!
//! Gradients: the cost is an exact quadratic in `E`, so the `E`-components
//! are analytic (`∂C/∂E_r = −2 Re⟨ψ|f⟩`, `∂C/∂E_i = −2 Im⟨ψ|f⟩`, the
//! penalty being `E`-independent); the circuit parameters use central finite
//! differences with step [`FD_STEP`].

use num_complex::Complex64;

use crate::ansatz::AnsatzSpec;
use crate::lindblad::{bell_state, VectorizedLiouvillian};
use crate::pauli::PauliSum;
use crate::state::{apply_operator, overlap, Statevector};
use crate::{Error, Result};

/// Central finite-difference step for circuit-parameter derivatives:
/// balances `O(h²)` truncation against `O(ulp/h)` roundoff at double
/// precision.
pub const FD_STEP: f64 = 1e-5;

/// The complex energy parameter `E = E_r + i·E_i` carried through the
/// optimization; at convergence `|E_r|` is the reported gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParam {
    pub e_r: f64,
    pub e_i: f64,
}

impl EnergyParam {
    pub fn new(e_r: f64, e_i: f64) -> Result<Self> {
        if !e_r.is_finite() || !e_i.is_finite() {
            return Err(Error::Domain(format!(
                "energy parameter must be finite, got {e_r} + {e_i}i"
            )));
        }
        Ok(Self { e_r, e_i })
    }

    pub fn as_complex(&self) -> Complex64 {
        Complex64::new(self.e_r, self.e_i)
    }
}

/// Everything a cost evaluation needs: the operator, the Bell witness on the
/// same register, the penalty strength, and the circuit family.
#[derive(Debug, Clone)]
pub struct CostContext {
    liouvillian: VectorizedLiouvillian,
    bell: Statevector,
    kappa: f64,
    ansatz: AnsatzSpec,
}

impl CostContext {
    pub fn new(liouvillian: VectorizedLiouvillian, ansatz: AnsatzSpec, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be finite and ≥ 0, got {kappa}")));
        }
        if ansatz.qubit_count() != liouvillian.qubit_count() {
            return Err(Error::DimensionMismatch {
                left: ansatz.qubit_count(),
                right: liouvillian.qubit_count(),
            });
        }
        let bell = bell_state(liouvillian.spin_count());
        Ok(Self { liouvillian, bell, kappa, ansatz })
    }

    pub fn liouvillian(&self) -> &VectorizedLiouvillian {
        &self.liouvillian
    }

    pub fn bell(&self) -> &Statevector {
        &self.bell
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn ansatz(&self) -> &AnsatzSpec {
        &self.ansatz
    }
}

/// `‖(A − E)|ψ⟩‖²` for an arbitrary operator: the squared residual of the
/// candidate eigenpair, non-negative by construction.
pub fn operator_variance(op: &PauliSum, e: Complex64, psi: &Statevector) -> Result<f64> {
    let f = residual_vector(op, e, psi)?;
    Ok(f.norm().powi(2))
}

/// `|f⟩ = (A − E)|ψ⟩`.
fn residual_vector(op: &PauliSum, e: Complex64, psi: &Statevector) -> Result<Statevector> {
    let mut f = apply_operator(op, psi)?;
    f.sub_scaled(e, psi)?;
    Ok(f)
}

/// The plain variance cost `C = ‖(L̂ − E)|ψ⟩‖²`.
pub fn variance_cost(ctx: &CostContext, e: EnergyParam, psi: &Statevector) -> Result<f64> {
    operator_variance(ctx.liouvillian.operator(), e.as_complex(), psi)
}

/// The penalized cost `C₁ = C + κ·|⟨ψ|B⟩|²` used while the steady state must
/// be excluded.
pub fn penalized_cost(ctx: &CostContext, e: EnergyParam, psi: &Statevector) -> Result<f64> {
    let c = variance_cost(ctx, e, psi)?;
    let b = overlap(psi, &ctx.bell)?;
    Ok(c + ctx.kappa * b.norm_sqr())
}

/// Penalty strength: an explicit model hint wins (the XXZ builder suggests
/// `N²`); otherwise fall back to `s²` with `s` the term count of `L̂`, the
/// same scale as the largest possible cost value.
pub fn default_kappa(l: &VectorizedLiouvillian, model_hint: Option<f64>) -> f64 {
    match model_hint {
        Some(k) if k.is_finite() && k >= 0.0 => k,
        _ => {
            let s = l.operator().term_count() as f64;
            s * s
        }
    }
}

/// Cost and gradient of the stage objective at circuit parameters `theta`
/// and energy `e`, with or without the penalty term.
///
/// Layout: `[∂/∂θ_1 … ∂/∂θ_p, ∂/∂E_r, ∂/∂E_i]` (length `p + 2`). The
/// `θ`-components are central finite differences with step [`FD_STEP`]; the
/// `E`-components are analytic and exact.
pub fn cost_gradient(
    ctx: &CostContext,
    e: EnergyParam,
    theta: &[f64],
    penalized: bool,
) -> Result<Vec<f64>> {
    let p = ctx.ansatz.parameter_count();
    if theta.len() != p {
        return Err(Error::DimensionMismatch { left: theta.len(), right: p });
    }
    let mut grad = Vec::with_capacity(p + 2);
    let mut shifted = theta.to_vec();
    for k in 0..p {
        let original = shifted[k];
        shifted[k] = original + FD_STEP;
        let plus = stage_cost(ctx, e, &shifted, penalized)?;
        shifted[k] = original - FD_STEP;
        let minus = stage_cost(ctx, e, &shifted, penalized)?;
        shifted[k] = original;
        grad.push((plus - minus) / (2.0 * FD_STEP));
    }
    let psi = ctx.ansatz.run_circuit(theta)?;
    let f = residual_vector(ctx.liouvillian.operator(), e.as_complex(), &psi)?;
    let psi_f = overlap(&psi, &f)?;
    grad.push(-2.0 * psi_f.re);
    grad.push(-2.0 * psi_f.im);
    let _ = penalized; // the penalty term carries no E-dependence
    Ok(grad)
}

/// The stage objective as a function of circuit parameters: run the circuit,
/// then evaluate the (optionally penalized) cost.
pub fn stage_cost(ctx: &CostContext, e: EnergyParam, theta: &[f64], penalized: bool) -> Result<f64> {
    let psi = ctx.ansatz.run_circuit(theta)?;
    if penalized {
        penalized_cost(ctx, e, &psi)
    } else {
        variance_cost(ctx, e, &psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::build_ansatz;
    use crate::lindblad::{vectorize, JumpKind, LindbladModel};
    use crate::pauli::Axis;
    use crate::spectrum::dense_spectrum;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    fn random_state(rng: &mut rand_chacha::ChaCha8Rng, qubits: usize) -> Statevector {
        let dim = 1usize << qubits;
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)))
            .collect();
        Statevector::from_amplitudes(amps).unwrap().normalized().unwrap()
    }

    fn decay_context() -> CostContext {
        let model = LindbladModel::xxz(1, 0.0, 1.0, JumpKind::Lowering).unwrap();
        let l = vectorize(&model);
        let kappa = default_kappa(&l, model.kappa_hint());
        let ansatz = build_ansatz(l.qubit_count(), 2).unwrap();
        CostContext::new(l, ansatz, kappa).unwrap()
    }

    #[test]
    fn variance_vanishes_on_exact_eigenpairs() {
        let ctx = decay_context();
        let spec = dense_spectrum(ctx.liouvillian()).unwrap();
        for (lambda, v) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
            let psi = Statevector::from_amplitudes(v.clone()).unwrap();
            let e = EnergyParam::new(lambda.re, lambda.im).unwrap();
            let c = variance_cost(&ctx, e, &psi).unwrap();
            assert!(c.abs() <= 1e-10, "eigenpair λ={lambda} gave cost {c:.3e}");
        }
    }

    #[test]
    fn lowering_operator_maps_ground_to_excited_with_unit_cost() {
        // A = σ⁻ = (X − iY)/2 sends |0⟩ to |1⟩, so the residual against
        // E = 0 has unit norm.
        let mut op = PauliSum::single(1, 0, Axis::X, Complex64::new(0.5, 0.0));
        op.push(Complex64::new(0.0, -0.5), crate::pauli::PauliString::single(1, 0, Axis::Y))
            .unwrap();
        let psi = Statevector::zero_state(1);
        let c = operator_variance(&op, Complex64::new(0.0, 0.0), &psi).unwrap();
        assert!((c - 1.0).abs() <= 1e-12, "got {c}");
    }

    #[test]
    fn decay_steady_state_has_zero_cost_at_zero_energy() {
        // vectorized |1⟩⟨1| is the basis state |11⟩ = index 3
        let ctx = decay_context();
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[3] = Complex64::new(1.0, 0.0);
        let psi = Statevector::from_amplitudes(amps).unwrap();
        let e = EnergyParam::new(0.0, 0.0).unwrap();
        let c = variance_cost(&ctx, e, &psi).unwrap();
        assert!(c.abs() <= 1e-10, "got {c:.3e}");
    }

    #[test]
    fn penalty_adds_kappa_on_the_bell_state_itself() {
        let ctx = decay_context();
        let e = EnergyParam::new(0.3, -0.2).unwrap();
        let bell = ctx.bell().clone();
        let plain = variance_cost(&ctx, e, &bell).unwrap();
        let penalized = penalized_cost(&ctx, e, &bell).unwrap();
        assert!((penalized - plain - ctx.kappa()).abs() <= 1e-12);
    }

    #[test]
    fn penalty_is_inert_on_states_orthogonal_to_bell() {
        let ctx = decay_context();
        let e = EnergyParam::new(-0.4, 0.7).unwrap();
        // |01⟩ has zero overlap with (|00⟩ + |11⟩)/√2
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[1] = Complex64::new(1.0, 0.0);
        let psi = Statevector::from_amplitudes(amps).unwrap();
        let plain = variance_cost(&ctx, e, &psi).unwrap();
        let penalized = penalized_cost(&ctx, e, &psi).unwrap();
        assert_eq!(plain, penalized);
    }

    #[test]
    fn xxz_kappa_hint_overrides_the_term_count_square() {
        for n in [2usize, 4] {
            let model = LindbladModel::xxz(n, 0.5, 1.0, JumpKind::Lowering).unwrap();
            let l = vectorize(&model);
            let k = default_kappa(&l, model.kappa_hint());
            assert_eq!(k, (n * n) as f64);
        }
    }

    #[test]
    fn generic_kappa_is_term_count_squared() {
        let model = LindbladModel::xxz(1, 0.0, 1.0, JumpKind::Lowering).unwrap();
        let l = vectorize(&model);
        let s = l.operator().term_count() as f64;
        assert_eq!(default_kappa(&l, None), s * s);
        // a single-term operator gives κ = 1
        let op = PauliSum::single(2, 0, Axis::X, Complex64::new(1.0, 0.0));
        let single = VectorizedLiouvillian::from_operator(1, op).unwrap();
        assert_eq!(default_kappa(&single, None), 1.0);
    }

    #[test]
    fn variance_is_non_negative_on_random_inputs() {
        let ctx = decay_context();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..1000 {
            let psi = random_state(&mut rng, ctx.liouvillian().qubit_count());
            let e =
                EnergyParam::new(uniform(&mut rng, -3.0, 3.0), uniform(&mut rng, -3.0, 3.0))
                    .unwrap();
            let c = variance_cost(&ctx, e, &psi).unwrap();
            assert!(c >= -1e-12, "variance {c:.3e} below tolerance");
        }
    }

    #[test]
    fn direct_evaluation_matches_the_pauli_expansion_path() {
        // ⟨ψ|(L̂†−E*)(L̂−E)|ψ⟩ expanded symbolically must equal the direct
        // two-application evaluation — validates the O(s²) product algebra.
        let model = LindbladModel::xxz(2, 0.5, 1.0, JumpKind::Lowering).unwrap();
        let l = vectorize(&model);
        let ansatz = build_ansatz(l.qubit_count(), 1).unwrap();
        let ctx = CostContext::new(l, ansatz, 0.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let psi = random_state(&mut rng, ctx.liouvillian().qubit_count());
            let e = Complex64::new(uniform(&mut rng, -2.0, 2.0), uniform(&mut rng, -2.0, 2.0));
            let n = ctx.liouvillian().qubit_count();
            let shifted = ctx
                .liouvillian()
                .operator()
                .add(&PauliSum::identity(n).scaled(-e))
                .unwrap();
            let m = shifted.adjoint().multiply(&shifted).unwrap();
            let expanded = crate::state::expectation(&m, &psi).unwrap();
            let direct =
                variance_cost(&ctx, EnergyParam::new(e.re, e.im).unwrap(), &psi).unwrap();
            assert!(
                (expanded.re - direct).abs() <= 1e-10 && expanded.im.abs() <= 1e-10,
                "expansion path {expanded} vs direct {direct}"
            );
        }
    }

    #[test]
    fn gradient_vanishes_at_an_exact_eigenpair() {
        // Rx(π/2) on both qubits sends |00⟩ to −|11⟩ — the vectorized decay
        // steady state up to phase, an eigenvector with eigenvalue 0.
        let ctx = decay_context();
        let p = ctx.ansatz().parameter_count();
        let mut theta = vec![0.0; p];
        // block layout: [rz q0, rz q1, rx q0, rx q1, rzz, rxx] × blocks
        theta[2] = std::f64::consts::FRAC_PI_2;
        theta[3] = std::f64::consts::FRAC_PI_2;
        let e = EnergyParam::new(0.0, 0.0).unwrap();
        let cost = stage_cost(&ctx, e, &theta, false).unwrap();
        assert!(cost <= 1e-12, "not at the minimum: cost {cost:.3e}");
        let grad = cost_gradient(&ctx, e, &theta, false).unwrap();
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm <= 1e-6, "gradient norm {norm:.3e} at an exact eigenpair");
    }

    #[test]
    fn analytic_energy_gradient_matches_finite_differences() {
        let ctx = decay_context();
        let p = ctx.ansatz().parameter_count();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let h = 1e-6;
        for penalized in [false, true] {
            for _ in 0..10 {
                let theta: Vec<f64> =
                    (0..p).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
                let e_r = uniform(&mut rng, -2.0, 2.0);
                let e_i = uniform(&mut rng, -2.0, 2.0);
                let e = EnergyParam::new(e_r, e_i).unwrap();
                let grad = cost_gradient(&ctx, e, &theta, penalized).unwrap();
                let fd_r = (stage_cost(&ctx, EnergyParam::new(e_r + h, e_i).unwrap(), &theta, penalized)
                    .unwrap()
                    - stage_cost(&ctx, EnergyParam::new(e_r - h, e_i).unwrap(), &theta, penalized)
                        .unwrap())
                    / (2.0 * h);
                let fd_i = (stage_cost(&ctx, EnergyParam::new(e_r, e_i + h).unwrap(), &theta, penalized)
                    .unwrap()
                    - stage_cost(&ctx, EnergyParam::new(e_r, e_i - h).unwrap(), &theta, penalized)
                        .unwrap())
                    / (2.0 * h);
                assert!(
                    (grad[p] - fd_r).abs() <= 1e-6,
                    "E_r gradient {:.9} vs FD {:.9}",
                    grad[p],
                    fd_r
                );
                assert!(
                    (grad[p + 1] - fd_i).abs() <= 1e-6,
                    "E_i gradient {:.9} vs FD {:.9}",
                    grad[p + 1],
                    fd_i
                );
            }
        }
    }

    #[test]
    fn theta_gradient_matches_a_coarser_finite_difference() {
        let ctx = decay_context();
        let p = ctx.ansatz().parameter_count();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
        let theta: Vec<f64> = (0..p).map(|_| uniform(&mut rng, -1.0, 1.0)).collect();
        let e = EnergyParam::new(0.3, -0.4).unwrap();
        let grad = cost_gradient(&ctx, e, &theta, true).unwrap();
        let h = 1e-4;
        for k in 0..p {
            let mut t = theta.clone();
            t[k] += h;
            let plus = stage_cost(&ctx, e, &t, true).unwrap();
            t[k] = theta[k] - h;
            let minus = stage_cost(&ctx, e, &t, true).unwrap();
            let fd = (plus - minus) / (2.0 * h);
            assert!(
                (grad[k] - fd).abs() <= 1e-5,
                "θ[{k}] gradient {:.9} vs coarse FD {:.9}",
                grad[k],
                fd
            );
        }
    }

    #[test]
    fn energy_expectation_minimizes_the_variance_over_e() {
        let ctx = decay_context();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(45);
        for _ in 0..5 {
            let psi = random_state(&mut rng, ctx.liouvillian().qubit_count());
            let best = crate::state::expectation(ctx.liouvillian().operator(), &psi).unwrap();
            let c_best =
                variance_cost(&ctx, EnergyParam::new(best.re, best.im).unwrap(), &psi).unwrap();
            for _ in 0..100 {
                let e = EnergyParam::new(
                    uniform(&mut rng, -3.0, 3.0),
                    uniform(&mut rng, -3.0, 3.0),
                )
                .unwrap();
                let c = variance_cost(&ctx, e, &psi).unwrap();
                assert!(
                    c + 1e-12 >= c_best,
                    "E = ⟨L̂⟩ not optimal: {c:.6e} < {c_best:.6e}"
                );
            }
        }
    }

    #[test]
    fn gradient_rejects_wrong_parameter_count() {
        let ctx = decay_context();
        let e = EnergyParam::new(0.0, 0.0).unwrap();
        let err = cost_gradient(&ctx, e, &[0.0; 3], false).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn non_finite_energy_is_rejected() {
        assert!(EnergyParam::new(f64::NAN, 0.0).is_err());
        assert!(EnergyParam::new(0.0, f64::INFINITY).is_err());
    }
}
