//! Liouvillian gap solver for Markovian open quantum systems.
//!
//! A Lindblad master equation `dρ/dt = ℒρ` relaxes towards its steady state
//! at an asymptotic rate set by the Liouvillian gap: the smallest nonzero
//! `|Re λ|` over the spectrum of the generator ℒ. This crate computes that
//! gap two independent ways:
//!
//! * a **variational solver** ([`solver::solve_gap`]) that vectorizes ℒ into a
//!   non-Hermitian operator on `2N` qubits, prepares trial states with a
//!   hardware-efficient circuit on an exact statevector simulator, and drives
//!   the variance cost `‖(L̂ − E)|ψ⟩‖²` to zero with BFGS so that `(E, |ψ⟩)`
//!   converges to an eigenpair of L̂;
//! * an **exact dense oracle** ([`spectrum::dense_spectrum`]) — balancing,
//!   Householder Hessenberg reduction, shifted complex QR, and inverse
//!   iteration — used to cross-check the variational result on small systems.
//!
//! Supporting modules: [`pauli`] (sparse Pauli-string algebra), [`lindblad`]
//! (model definitions and vectorization), [`state`] / [`ansatz`] (simulator),
//! [`cost`] (variance and penalty costs), [`bfgs`] (optimizer), and
//! [`checks`] (runtime self-test suite over the algebraic invariants).

pub mod ansatz;
pub mod bfgs;
pub mod checks;
pub mod cost;
pub mod dense;
pub mod lindblad;
pub mod pauli;
pub mod solver;
pub mod spectrum;
pub mod state;

pub use num_complex::Complex64;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two operands act on different qubit counts.
    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A dense construction would exceed the configured size limit.
    #[error("dense limit exceeded: {requested} qubits (limit {limit})")]
    DenseLimit { requested: usize, limit: usize },

    /// Invalid input outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative numerical routine failed to converge or lost accuracy.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The optimizer hit a non-finite objective or could not proceed.
    #[error("optimization error: {0}")]
    Optimization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
