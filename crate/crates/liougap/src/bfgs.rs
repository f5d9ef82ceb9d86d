//! Quasi-Newton (BFGS) minimization with a backtracking line search.
//!
//! The inverse Hessian is maintained directly and updated with the standard
//! symmetric rank-two formula; updates that would break positive-definiteness
//! (non-positive curvature `yᵀs`) are skipped. The line search backtracks
//! until the Armijo sufficient-decrease condition holds, so the cost at
//! accepted iterates is strictly non-increasing.
//!
//! [`BfgsState`] exposes the iteration one accepted step at a time, which
//! lets callers interleave work between steps (trace recording, UI updates,
//! checkpointing); [`bfgs_minimize`] is the run-to-completion wrapper.

use ndarray::{Array1, Array2};

use crate::{Error, Result};

/// Tunables shared by the optimizer stack. The BFGS engine reads the
/// iteration and tolerance fields; the gap drivers additionally use
/// `fd_step`, `seed`, and `theta_init_scale` to build their objectives and
/// starting points.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Cap on accepted BFGS steps per minimization.
    pub max_iterations: usize,
    /// Stop when the gradient 2-norm falls below this.
    pub grad_tol: f64,
    /// Stop when the cost decrease between accepted steps falls below this.
    pub cost_tol: f64,
    /// Central finite-difference step for circuit-parameter derivatives.
    pub fd_step: f64,
    /// Seed for the circuit-parameter initialization.
    pub seed: u64,
    /// Circuit parameters start uniform in `[−scale, scale]`.
    pub theta_init_scale: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            grad_tol: 1e-8,
            cost_tol: 1e-10,
            fd_step: crate::cost::FD_STEP,
            seed: 7,
            theta_init_scale: 0.1,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) || !(self.cost_tol > 0.0) || !(self.fd_step > 0.0) {
            return Err(Error::Domain(
                "optimizer tolerances and the finite-difference step must be positive".into(),
            ));
        }
        if !(self.theta_init_scale >= 0.0) {
            return Err(Error::Domain("theta_init_scale must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// A differentiable objective. Line-search trial points only call
/// [`Objective::value`]; the gradient is requested once per accepted step —
/// the split matters when the gradient costs `O(p)` value evaluations, as
/// with finite differences.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        Ok(self.evaluate(x)?.0)
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<F> Objective for F
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self(x)
    }
}

/// Why an iteration loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Gradient norm fell below `grad_tol`.
    GradientTolerance,
    /// Cost decrease between accepted steps fell below `cost_tol`.
    CostTolerance,
    /// `max_iterations` accepted steps were taken.
    MaxIterations,
    /// The line search could not find any decrease (numerical floor).
    LineSearchStall,
}

impl StopReason {
    /// Tolerance-based stops count as convergence; caps and stalls do not.
    pub fn converged(self) -> bool {
        matches!(self, StopReason::GradientTolerance | StopReason::CostTolerance)
    }
}

/// One accepted iterate: the cost and gradient norm after `step` accepted
/// BFGS steps (step 0 is the starting point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsRecord {
    pub step: usize,
    pub cost: f64,
    pub grad_norm: f64,
}

/// Result of a completed minimization.
#[derive(Debug, Clone)]
pub struct BfgsRun {
    pub x: Vec<f64>,
    pub cost: f64,
    pub grad_norm: f64,
    pub stop: StopReason,
    pub trace: Vec<BfgsRecord>,
}

/// Armijo sufficient-decrease constant.
const ARMIJO_C1: f64 = 1e-4;
/// Line-search backtracking factor.
const BACKTRACK: f64 = 0.5;
/// Maximum backtracking halvings before declaring a stall.
const MAX_BACKTRACKS: usize = 45;
/// Relative curvature floor below which the inverse-Hessian update is
/// skipped.
const CURVATURE_FLOOR: f64 = 1e-12;

/// The iteration state between accepted steps.
#[derive(Debug, Clone)]
pub struct BfgsState {
    x: Array1<f64>,
    cost: f64,
    grad: Array1<f64>,
    h_inv: Array2<f64>,
    step: usize,
    stop: Option<StopReason>,
}

impl BfgsState {
    /// Evaluate the objective at `x0` and set up the identity inverse
    /// Hessian.
    pub fn new(objective: &mut dyn Objective, x0: &[f64], opts: &OptimizerOptions) -> Result<Self> {
        opts.validate()?;
        let (f0, g0) = checked_eval(objective, x0)?;
        let n = x0.len();
        if g0.len() != n {
            return Err(Error::Optimization(format!(
                "gradient length {} does not match parameter count {n}",
                g0.len()
            )));
        }
        let mut state = Self {
            x: Array1::from(x0.to_vec()),
            cost: f0,
            grad: Array1::from(g0),
            h_inv: Array2::eye(n),
            step: 0,
            stop: None,
        };
        if state.grad_norm() < opts.grad_tol {
            state.stop = Some(StopReason::GradientTolerance);
        }
        Ok(state)
    }

    pub fn x(&self) -> &[f64] {
        self.x.as_slice().expect("contiguous")
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad.dot(&self.grad).sqrt()
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    /// `Some` once the iteration has ended (tolerance, cap, or stall).
    pub fn stop(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn record(&self) -> BfgsRecord {
        BfgsRecord { step: self.step, cost: self.cost, grad_norm: self.grad_norm() }
    }

    /// Take one accepted BFGS step (direction, Armijo backtracking, inverse
    /// Hessian update). Returns the new record, or the final one when the
    /// iteration has ended.
    pub fn advance(
        &mut self,
        objective: &mut dyn Objective,
        opts: &OptimizerOptions,
    ) -> Result<BfgsRecord> {
        if self.stop.is_some() {
            return Ok(self.record());
        }
        if self.step >= opts.max_iterations {
            self.stop = Some(StopReason::MaxIterations);
            return Ok(self.record());
        }

        // search direction: d = −H⁻¹ g, reset to steepest descent if the
        // accumulated curvature information has gone indefinite
        let mut direction = -self.h_inv.dot(&self.grad);
        let mut slope = self.grad.dot(&direction);
        if !(slope < 0.0) {
            self.h_inv = Array2::eye(self.x.len());
            direction = -self.grad.clone();
            slope = self.grad.dot(&direction);
            if !(slope < 0.0) {
                // zero gradient: already at a stationary point
                self.stop = Some(StopReason::GradientTolerance);
                return Ok(self.record());
            }
        }

        // backtracking Armijo line search (cost-only trials)
        let mut alpha = 1.0;
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = self
                .x
                .iter()
                .zip(direction.iter())
                .map(|(xi, di)| xi + alpha * di)
                .collect();
            let f = objective.value(&trial)?;
            if f.is_finite() && f <= self.cost + ARMIJO_C1 * alpha * slope {
                accepted = Some((trial, f));
                break;
            }
            alpha *= BACKTRACK;
        }
        let Some((x_new, f_new)) = accepted else {
            self.stop = Some(StopReason::LineSearchStall);
            return Ok(self.record());
        };
        let (_, g_new) = objective.evaluate(&x_new)?;
        if g_new.iter().any(|g| !g.is_finite()) {
            return Err(Error::Optimization(format!(
                "non-finite gradient at x = {:?}",
                &x_new
            )));
        }

        let x_new = Array1::from(x_new);
        let g_new = Array1::from(g_new);
        let s = &x_new - &self.x;
        let y = &g_new - &self.grad;
        let sy = s.dot(&y);
        let s_norm = s.dot(&s).sqrt();
        let y_norm = y.dot(&y).sqrt();
        if sy > CURVATURE_FLOOR * s_norm * y_norm {
            // H ← H + (sᵀy + yᵀHy)/(sᵀy)² · ssᵀ − (Hysᵀ + syᵀH)/(sᵀy)
            let hy = self.h_inv.dot(&y);
            let yhy = y.dot(&hy);
            let c1 = (sy + yhy) / (sy * sy);
            let n = self.x.len();
            for i in 0..n {
                for j in 0..n {
                    self.h_inv[[i, j]] += c1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }

        let decrease = self.cost - f_new;
        self.x = x_new;
        self.cost = f_new;
        self.grad = g_new;
        self.step += 1;

        if self.grad_norm() < opts.grad_tol {
            self.stop = Some(StopReason::GradientTolerance);
        } else if decrease.abs() < opts.cost_tol {
            self.stop = Some(StopReason::CostTolerance);
        } else if self.step >= opts.max_iterations {
            self.stop = Some(StopReason::MaxIterations);
        }
        Ok(self.record())
    }
}

fn checked_eval(objective: &mut dyn Objective, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (f, g) = objective.evaluate(x)?;
    if !f.is_finite() {
        return Err(Error::Optimization(format!("non-finite cost {f} at x = {x:?}")));
    }
    Ok((f, g))
}

/// Minimize to completion: iterate [`BfgsState::advance`] until a stop
/// condition fires and return the final point with the full per-step trace.
pub fn bfgs_minimize(
    objective: &mut dyn Objective,
    x0: &[f64],
    opts: &OptimizerOptions,
) -> Result<BfgsRun> {
    let mut state = BfgsState::new(objective, x0, opts)?;
    let mut trace = vec![state.record()];
    while state.stop().is_none() {
        let before = state.step_count();
        let record = state.advance(objective, opts)?;
        if state.step_count() > before {
            trace.push(record);
        }
    }
    Ok(BfgsRun {
        x: state.x().to_vec(),
        cost: state.cost(),
        grad_norm: state.grad_norm(),
        stop: state.stop().expect("loop ended"),
        trace,
    })
}
