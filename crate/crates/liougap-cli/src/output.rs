//! CSV artifacts with `#`-comment metadata.
//!
//! Column sets are fixed: `trace.csv` carries
//! `stage,step,cost,E_r,E_i,grad_norm,fidelity` (the offset scan prepends
//! `offset_m`), `result.csv` carries `gap,E_i_final,converged,gap_ED` (the
//! scan appends `offsets_tried`), and `sweep.csv` carries
//! `value,gap_VQA,gap_ED,rel_err,iterations,status`. Floats print in
//! shortest round-trip form, so identical runs write identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use liougap::solver::{GapResult, IterationRecord};

pub const TRACE_HEADER: &str = "stage,step,cost,E_r,E_i,grad_norm,fidelity";
pub const TRACE_HEADER_SCAN: &str = "offset_m,stage,step,cost,E_r,E_i,grad_norm,fidelity";
pub const RESULT_HEADER: &str = "gap,E_i_final,converged,gap_ED";
pub const RESULT_HEADER_SCAN: &str = "gap,E_i_final,converged,gap_ED,offsets_tried";
pub const SWEEP_HEADER: &str = "value,gap_VQA,gap_ED,rel_err,iterations,status";

/// One sweep point, already solved (or failed).
pub struct SweepRow {
    pub value: f64,
    pub gap_vqa: Option<f64>,
    pub gap_ed: Option<f64>,
    pub rel_err: Option<f64>,
    pub iterations: Option<usize>,
    pub failed: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trace(
    path: &Path,
    header: &[String],
    records: &[IterationRecord],
    with_offset: bool,
) -> Result<()> {
    let mut w = create(path)?;
    for line in header {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{}", if with_offset { TRACE_HEADER_SCAN } else { TRACE_HEADER })?;
    for r in records {
        if with_offset {
            write!(w, "{},", r.offset_m)?;
        }
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.stage,
            r.step,
            r.cost,
            r.e_r,
            r.e_i,
            r.grad_norm,
            opt_f64(r.fidelity)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_result(
    path: &Path,
    header: &[String],
    result: &GapResult,
    ed_gap: Option<f64>,
    with_offsets: bool,
) -> Result<()> {
    let mut w = create(path)?;
    for line in header {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{}", if with_offsets { RESULT_HEADER_SCAN } else { RESULT_HEADER })?;
    write!(
        w,
        "{},{},{},{}",
        result.gap,
        result.e_i_final,
        result.converged,
        opt_f64(ed_gap)
    )?;
    if with_offsets {
        let offsets: Vec<String> = result.offsets_tried.iter().map(|o| o.to_string()).collect();
        write!(w, ",{}", offsets.join(" "))?;
    }
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_sweep(path: &Path, header: &[String], rows: &[SweepRow]) -> Result<()> {
    let mut w = create(path)?;
    for line in header {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.value,
            opt_f64(r.gap_vqa),
            opt_f64(r.gap_ed),
            opt_f64(r.rel_err),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            if r.failed { "failed" } else { "ok" }
        )?;
    }
    w.flush()?;
    Ok(())
}
