//! One driver per subcommand. Each returns the process exit code:
//! 0 for success/convergence, 2 for non-convergence or a failed point
//! (malformed configs never reach these functions — they exit 1 upstream).

use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use liougap::checks::check_functions;
use liougap::lindblad::{vectorize, LindbladModel};
use liougap::solver::{GapResult, GapSolver, ScanSettings};
use liougap::spectrum::{dense_spectrum, DENSE_DIM_LIMIT};
use rayon::prelude::*;

use crate::config::{ConfigError, Resolved, XxzParams};
use crate::output::{self, SweepRow};

/// Exact gap when the vectorized dimension fits the dense oracle, `None`
/// above it (the artifact column stays empty).
fn ed_reference(model: &LindbladModel) -> Result<Option<f64>> {
    let l = vectorize(model);
    if (1usize << l.qubit_count()) > DENSE_DIM_LIMIT {
        return Ok(None);
    }
    Ok(Some(dense_spectrum(&l)?.gap))
}

fn summarize(result: &GapResult, ed: Option<f64>, out: &Path) {
    println!(
        "gap = {} (E_i = {}), converged = {}, iterations = {}",
        result.gap,
        result.e_i_final,
        result.converged,
        result.iteration_count()
    );
    match ed {
        Some(g) => println!("exact reference gap = {g}"),
        None => println!("exact reference skipped: dimension above the dense limit"),
    }
    println!("wrote {} and {}", out.join("trace.csv").display(), out.join("result.csv").display());
}

pub fn cmd_gap(run: &Resolved) -> Result<u8> {
    let result = GapSolver::plain(&run.model, &run.opts, &run.overrides())?.run()?;
    let ed = ed_reference(&run.model)?;
    let header = run.solve_header("gap");
    fs::create_dir_all(&run.out)
        .with_context(|| format!("cannot create output directory {}", run.out.display()))?;
    output::write_trace(&run.out.join("trace.csv"), &header, &result.stage_traces, false)?;
    output::write_result(&run.out.join("result.csv"), &header, &result, ed, false)?;
    summarize(&result, ed, &run.out);
    Ok(if result.converged { 0 } else { 2 })
}

pub fn cmd_gap_degenerate(run: &Resolved) -> Result<u8> {
    let scan = ScanSettings { delta_e: run.delta_e, max_offsets: run.max_offsets };
    let result = GapSolver::scanning(&run.model, scan, &run.opts, &run.overrides())?.run()?;
    let ed = ed_reference(&run.model)?;
    let mut header = run.solve_header("gap-degenerate");
    header.extend(run.scan_header());
    fs::create_dir_all(&run.out)
        .with_context(|| format!("cannot create output directory {}", run.out.display()))?;
    output::write_trace(&run.out.join("trace.csv"), &header, &result.stage_traces, true)?;
    output::write_result(&run.out.join("result.csv"), &header, &result, ed, true)?;
    let offsets: Vec<String> = result.offsets_tried.iter().map(|o| o.to_string()).collect();
    println!("offsets tried: {}", offsets.join(" "));
    summarize(&result, ed, &run.out);
    Ok(if result.converged { 0 } else { 2 })
}

/// The model parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Gamma,
    SpinCount,
}

impl SweepAxis {
    fn name(self) -> &'static str {
        match self {
            SweepAxis::Gamma => "gamma",
            SweepAxis::SpinCount => "N",
        }
    }
}

fn point_model(base: XxzParams, axis: SweepAxis, value: f64) -> Result<LindbladModel> {
    let model = match axis {
        SweepAxis::Gamma => LindbladModel::xxz(base.n, base.jz, value, base.kind)?,
        SweepAxis::SpinCount => LindbladModel::xxz(value as usize, base.jz, base.gamma, base.kind)?,
    };
    Ok(model)
}

fn run_point(run: &Resolved, base: XxzParams, axis: SweepAxis, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        gap_vqa: None,
        gap_ed: None,
        rel_err: None,
        iterations: None,
        failed: true,
    };
    let Ok(model) = point_model(base, axis, value) else {
        return row;
    };
    // Depth and penalty follow the per-point model unless the config pinned
    // them explicitly; the solver recomputes its own defaults from `None`.
    let mut overrides = run.overrides();
    if !run.blocks_explicit {
        overrides.blocks = None;
    }
    if !run.kappa_explicit {
        overrides.kappa = None;
    }
    let result = match GapSolver::plain(&model, &run.opts, &overrides) {
        Ok(mut solver) => match solver.run() {
            Ok(r) => r,
            Err(_) => return row,
        },
        Err(_) => return row,
    };
    row.gap_vqa = Some(result.gap);
    row.iterations = Some(result.iteration_count());
    row.failed = !result.converged;
    if let Ok(Some(ed)) = ed_reference(&model) {
        row.gap_ed = Some(ed);
        if ed != 0.0 {
            row.rel_err = Some((result.gap - ed).abs() / ed.abs());
        }
    }
    row
}

pub fn cmd_sweep(run: &Resolved, axis: SweepAxis, values: &[f64]) -> Result<u8> {
    if values.is_empty() {
        return Err(ConfigError::new("sweep needs at least one axis value").into());
    }
    for v in values {
        if !v.is_finite() || *v <= 0.0 {
            return Err(ConfigError::new(format!(
                "axis values must be finite and positive, got {v}"
            ))
            .into());
        }
        if axis == SweepAxis::SpinCount && (v.fract() != 0.0 || *v < 1.0) {
            return Err(ConfigError::new(format!(
                "N values must be positive integers, got {v}"
            ))
            .into());
        }
    }
    let base = run.xxz.ok_or_else(|| {
        ConfigError::new("sweep requires model = \"xxz\": axis values rebuild the model per point")
    })?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(run.workers.unwrap_or(0))
        .build()
        .context("cannot build the sweep worker pool")?;
    let rows: Vec<SweepRow> =
        pool.install(|| values.par_iter().map(|&v| run_point(run, base, axis, v)).collect());

    let mut header = run.solve_header("sweep");
    header.push(format!("# axis = {}", axis.name()));
    let rendered: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    header.push(format!("# values = {}", rendered.join(" ")));

    fs::create_dir_all(&run.out)
        .with_context(|| format!("cannot create output directory {}", run.out.display()))?;
    output::write_sweep(&run.out.join("sweep.csv"), &header, &rows)?;

    let failed = rows.iter().filter(|r| r.failed).count();
    println!(
        "swept {} over {} points ({} failed), wrote {}",
        axis.name(),
        rows.len(),
        failed,
        run.out.join("sweep.csv").display()
    );
    Ok(if failed == 0 { 0 } else { 2 })
}

pub fn cmd_ed(run: &Resolved) -> Result<u8> {
    let l = vectorize(&run.model);
    let spectrum = dense_spectrum(&l)?;
    for line in run.model_header("ed") {
        println!("{line}");
    }
    println!("# gap = {}", spectrum.gap);
    println!("# zero_count = {}", spectrum.zero_count);
    println!("index,re,im");
    // +0.0 folds any negative zero into the plain one before printing
    for (i, v) in spectrum.eigenvalues.iter().enumerate() {
        println!("{i},{},{}", v.re + 0.0, v.im + 0.0);
    }
    Ok(0)
}

pub fn cmd_check(seed: u64) -> Result<u8> {
    let mut all_passed = true;
    println!("{:<30} {:>6} {:>10}  detail", "check", "status", "time_ms");
    for f in check_functions() {
        let start = Instant::now();
        let outcome = f(seed)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        all_passed &= outcome.passed;
        println!(
            "{:<30} {:>6} {:>10.1}  {}",
            outcome.name,
            if outcome.passed { "pass" } else { "FAIL" },
            ms,
            outcome.detail
        );
    }
    Ok(if all_passed { 0 } else { 2 })
}
