//! Browser bindings for the gap solver. Three operations cross the JS
//! boundary, all speaking JSON strings so the page needs no generated
//! types: exact diagonalization of a configured model, a resumable
//! variational gap run that streams its optimizer trace, and a
//! dissipation-rate sweep with a through-origin line fit.
//!
//! The exported API is a thin `wasm_bindgen` shell over plain Rust
//! functions, so the JSON layer is unit-tested on the host without a wasm
//! toolchain.

use liougap::bfgs::OptimizerOptions;
use liougap::lindblad::{vectorize, JumpKind, LindbladModel};
use liougap::solver::{GapSolver, IterationRecord, RunOverrides, ScanSettings};
use liougap::spectrum::{dense_spectrum, DENSE_DIM_LIMIT};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// Browser-facing model + run parameters. Everything but the model shape
/// is optional; defaults match the command-line runner.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WebConfig {
    /// Spin count, 1 to 3 in the demo (the statevector doubles it).
    n: usize,
    #[serde(default = "default_jz")]
    jz: f64,
    #[serde(default = "default_gamma")]
    gamma: f64,
    /// "lowering" or "dephasing".
    #[serde(default = "default_jump")]
    jump: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    max_iterations: Option<usize>,
    #[serde(default)]
    blocks: Option<usize>,
    /// Run the offset scan instead of the plain driver.
    #[serde(default)]
    scan: bool,
    #[serde(default)]
    delta_e: Option<f64>,
}

fn default_jz() -> f64 {
    0.5
}

fn default_gamma() -> f64 {
    1.0
}

fn default_jump() -> String {
    "lowering".into()
}

/// The browser runs single solves interactively, so cap the work per run
/// well below the command-line default.
const WEB_MAX_SPINS: usize = 3;
const WEB_DEFAULT_ITERATIONS: usize = 1200;

fn parse_config(json: &str) -> Result<(WebConfig, LindbladModel), String> {
    let cfg: WebConfig =
        serde_json::from_str(json).map_err(|e| format!("bad config: {e}"))?;
    if cfg.n == 0 || cfg.n > WEB_MAX_SPINS {
        return Err(format!("n must be between 1 and {WEB_MAX_SPINS}, got {}", cfg.n));
    }
    let kind = match cfg.jump.as_str() {
        "lowering" => JumpKind::Lowering,
        "dephasing" => JumpKind::Dephasing,
        other => return Err(format!("jump must be \"lowering\" or \"dephasing\", got {other:?}")),
    };
    let model =
        LindbladModel::xxz(cfg.n, cfg.jz, cfg.gamma, kind).map_err(|e| e.to_string())?;
    Ok((cfg, model))
}

fn optimizer_options(cfg: &WebConfig) -> OptimizerOptions {
    OptimizerOptions {
        max_iterations: cfg.max_iterations.unwrap_or(WEB_DEFAULT_ITERATIONS),
        seed: cfg.seed.unwrap_or(7),
        ..OptimizerOptions::default()
    }
}

#[derive(Serialize)]
struct SpectrumOut {
    eigenvalues: Vec<[f64; 2]>,
    gap: f64,
    zero_count: usize,
}

fn spectrum_impl(json: &str) -> Result<String, String> {
    let (_, model) = parse_config(json)?;
    let l = vectorize(&model);
    let spectrum = dense_spectrum(&l).map_err(|e| e.to_string())?;
    let out = SpectrumOut {
        eigenvalues: spectrum.eigenvalues.iter().map(|v| [v.re, v.im]).collect(),
        gap: spectrum.gap,
        zero_count: spectrum.zero_count,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Exact spectrum, gap, and steady-state degeneracy of the configured
/// model, as `{"eigenvalues": [[re, im], …], "gap": g, "zero_count": k}`.
#[wasm_bindgen]
pub fn exact_spectrum(config_json: &str) -> Result<String, JsError> {
    spectrum_impl(config_json).map_err(|e| JsError::new(&e))
}

#[derive(Serialize)]
struct RecordOut {
    offset_m: usize,
    stage: String,
    step: usize,
    cost: f64,
    e_r: f64,
    e_i: f64,
    grad_norm: f64,
    fidelity: Option<f64>,
}

impl From<&IterationRecord> for RecordOut {
    fn from(r: &IterationRecord) -> Self {
        Self {
            offset_m: r.offset_m,
            stage: r.stage.to_string(),
            step: r.step,
            cost: r.cost,
            e_r: r.e_r,
            e_i: r.e_i,
            grad_norm: r.grad_norm,
            fidelity: r.fidelity,
        }
    }
}

#[derive(Serialize)]
struct AdvanceOut {
    new_records: Vec<RecordOut>,
    finished: bool,
}

#[derive(Serialize)]
struct ResultOut {
    gap: f64,
    e_r: f64,
    e_i: f64,
    converged: bool,
    final_cost: f64,
    iterations: usize,
    offsets_tried: Vec<f64>,
    ed_gap: Option<f64>,
}

/// A gap solve the page drives incrementally, polling a few optimizer
/// steps per animation frame so the cost curve draws live.
#[wasm_bindgen]
pub struct GapRun {
    solver: GapSolver,
    published: usize,
    ed_gap: Option<f64>,
}

impl GapRun {
    fn build(config_json: &str) -> Result<Self, String> {
        let (cfg, model) = parse_config(config_json)?;
        let opts = optimizer_options(&cfg);
        let overrides = RunOverrides { blocks: cfg.blocks, ..Default::default() };
        let solver = if cfg.scan {
            let l = vectorize(&model);
            let delta_e =
                cfg.delta_e.unwrap_or_else(|| liougap::lindblad::default_delta_e(&l));
            let scan = ScanSettings { delta_e, max_offsets: 8 };
            GapSolver::scanning(&model, scan, &opts, &overrides)
        } else {
            GapSolver::plain(&model, &opts, &overrides)
        }
        .map_err(|e| e.to_string())?;
        let l = vectorize(&model);
        let ed_gap = if (1usize << l.qubit_count()) <= DENSE_DIM_LIMIT {
            dense_spectrum(&l).ok().map(|s| s.gap)
        } else {
            None
        };
        Ok(Self { solver, published: 0, ed_gap })
    }

    fn advance_impl(&mut self, steps: usize) -> Result<String, String> {
        for _ in 0..steps.max(1) {
            if !self.solver.step().map_err(|e| e.to_string())? {
                break;
            }
        }
        let records = self.solver.records();
        let new_records: Vec<RecordOut> =
            records[self.published..].iter().map(RecordOut::from).collect();
        self.published = records.len();
        let out = AdvanceOut { new_records, finished: self.solver.is_finished() };
        serde_json::to_string(&out).map_err(|e| e.to_string())
    }

    fn result_impl(&self) -> Result<String, String> {
        let result = self
            .solver
            .result()
            .ok_or_else(|| "the run has not finished yet".to_string())?;
        let out = ResultOut {
            gap: result.gap,
            e_r: result.e_r_final,
            e_i: result.e_i_final,
            converged: result.converged,
            final_cost: result.final_cost,
            iterations: result.iteration_count(),
            offsets_tried: result.offsets_tried.clone(),
            ed_gap: self.ed_gap,
        };
        serde_json::to_string(&out).map_err(|e| e.to_string())
    }
}

#[wasm_bindgen]
impl GapRun {
    #[wasm_bindgen(constructor)]
    pub fn new(config_json: &str) -> Result<GapRun, JsError> {
        Self::build(config_json).map_err(|e| JsError::new(&e))
    }

    /// Advance up to `steps` optimizer steps. Returns
    /// `{"new_records": […], "finished": bool}` with every trace record
    /// produced since the previous call.
    pub fn advance(&mut self, steps: usize) -> Result<String, JsError> {
        self.advance_impl(steps).map_err(|e| JsError::new(&e))
    }

    /// Final summary once `finished` came back true.
    pub fn result(&self) -> Result<String, JsError> {
        self.result_impl().map_err(|e| JsError::new(&e))
    }
}

#[derive(Serialize)]
struct SweepPointOut {
    gamma: f64,
    gap_vqa: f64,
    gap_ed: f64,
    rel_err: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct SweepOut {
    points: Vec<SweepPointOut>,
    slope: f64,
    max_rel_dev: f64,
}

fn sweep_impl(config_json: &str, gammas: &[f64]) -> Result<String, String> {
    if gammas.is_empty() {
        return Err("the sweep needs at least one rate".into());
    }
    if gammas.iter().any(|g| !g.is_finite() || *g <= 0.0) {
        return Err("rates must be finite and positive".into());
    }
    let (cfg, _) = parse_config(config_json)?;
    let opts = optimizer_options(&cfg);
    let kind = match cfg.jump.as_str() {
        "dephasing" => JumpKind::Dephasing,
        _ => JumpKind::Lowering,
    };

    let mut points = Vec::new();
    for &gamma in gammas {
        let model =
            LindbladModel::xxz(cfg.n, cfg.jz, gamma, kind).map_err(|e| e.to_string())?;
        let l = vectorize(&model);
        let gap_ed = dense_spectrum(&l).map_err(|e| e.to_string())?.gap;
        let overrides = RunOverrides { blocks: cfg.blocks, ..Default::default() };
        let result = GapSolver::plain(&model, &opts, &overrides)
            .map_err(|e| e.to_string())?
            .run()
            .map_err(|e| e.to_string())?;
        let rel_err =
            if gap_ed != 0.0 { (result.gap - gap_ed).abs() / gap_ed.abs() } else { f64::NAN };
        points.push(SweepPointOut {
            gamma,
            gap_vqa: result.gap,
            gap_ed,
            rel_err,
            iterations: result.iteration_count(),
            converged: result.converged,
        });
    }

    let slope = points.iter().map(|p| p.gamma * p.gap_ed).sum::<f64>()
        / points.iter().map(|p| p.gamma * p.gamma).sum::<f64>();
    let max_rel_dev = points
        .iter()
        .map(|p| (p.gap_ed - slope * p.gamma).abs() / (slope * p.gamma).abs())
        .fold(0.0, f64::max);
    let out = SweepOut { points, slope, max_rel_dev };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Solve once per dissipation rate and fit a line through the origin to
/// the exact gaps. Returns `{"points": […], "slope": s, "max_rel_dev": d}`.
#[wasm_bindgen]
pub fn gamma_sweep(config_json: &str, gammas: Vec<f64>) -> Result<String, JsError> {
    sweep_impl(config_json, &gammas).map_err(|e| JsError::new(&e))
}
