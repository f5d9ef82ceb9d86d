//! End-to-end tests of the `liougap` binary: artifact schemas, exit codes,
//! reproducibility, and diagnostics, all through real process invocations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Single decaying spin: zero Hamiltonian, one lowering channel at rate 1.
/// Its vectorized generator is 4-dimensional with spectrum {0, −1/2 (twice),
/// −1}, so the gap is exactly 1/2 — fast and exactly checkable.
const DECAY: &str = r#"
[model]
model = "custom"
N = 1
hamiltonian = []
jumps = [{ rate = 1.0, operator = ["(0.5,0) X", "(0,-0.5) Y"] }]
"#;

/// Two-spin XXZ chain with uniform lowering, the standard dense-verified
/// benchmark (gap 1/2 at these couplings).
const XXZ2: &str = r#"
[model]
model = "xxz"
N = 2
Jz = 0.5
gamma = 1.0
jump = "lowering"
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liougap"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("the binary should run")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).expect("config should write");
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// Splits a CSV artifact into its `#` metadata block, header line, and
/// data rows.
fn split_csv(path: &Path) -> (String, String, Vec<String>) {
    let body = fs::read_to_string(path).expect("artifact should exist");
    let mut meta = String::new();
    let mut header = String::new();
    let mut rows = Vec::new();
    for line in body.lines() {
        if line.starts_with('#') {
            meta.push_str(line);
            meta.push('\n');
        } else if header.is_empty() {
            header = line.to_string();
        } else if !line.is_empty() {
            rows.push(line.to_string());
        }
    }
    (meta, header, rows)
}

fn field(row: &str, idx: usize) -> String {
    row.split(',').nth(idx).unwrap_or_default().to_string()
}

#[test]
fn gap_on_a_single_decaying_spin_matches_the_exact_gap() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "decay.toml", DECAY);
    let out_dir = dir.path().join("run");
    let out = run(&["gap", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", text(&out.stderr));

    let (meta, header, rows) = split_csv(&out_dir.join("result.csv"));
    assert_eq!(header, "gap,E_i_final,converged,gap_ED");
    assert!(meta.contains("# command = gap"));
    assert!(meta.contains("# seed = 7"), "default seed is materialized:\n{meta}");
    assert_eq!(rows.len(), 1);
    let gap: f64 = field(&rows[0], 0).parse().expect("gap parses");
    let ed: f64 = field(&rows[0], 3).parse().expect("reference gap parses");
    assert!((gap - 0.5).abs() < 1e-3, "gap {gap} should be 1/2");
    assert!((ed - 0.5).abs() < 1e-9, "exact gap {ed} should be 1/2");
    assert_eq!(field(&rows[0], 2), "true");

    let (_, trace_header, trace_rows) = split_csv(&out_dir.join("trace.csv"));
    assert_eq!(trace_header, "stage,step,cost,E_r,E_i,grad_norm,fidelity");
    assert!(trace_rows.iter().any(|r| r.starts_with("pretrain,")));
    assert!(trace_rows.iter().any(|r| r.starts_with("main,")));
}

#[test]
fn identical_config_and_seed_give_byte_identical_artifacts() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "decay.toml", DECAY);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out =
            run(&["gap", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "stderr: {}", text(&out.stderr));
    }
    for name in ["trace.csv", "result.csv"] {
        let a = fs::read(out_a.join(name)).expect("first artifact");
        let b = fs::read(out_b.join(name)).expect("second artifact");
        assert_eq!(a, b, "{name} should be byte-identical across identical runs");
    }
}

#[test]
fn the_seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "decay.toml", &format!("seed = 3\n{DECAY}"));
    let out_default = dir.path().join("d");
    let out_flagged = dir.path().join("f");
    let out = run(&[
        "gap",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_default.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "gap",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        out_flagged.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    let (meta_d, _, _) = split_csv(&out_default.join("result.csv"));
    let (meta_f, _, _) = split_csv(&out_flagged.join("result.csv"));
    assert!(meta_d.contains("# seed = 3"));
    assert!(meta_f.contains("# seed = 5"));
    let trace_d = fs::read(out_default.join("trace.csv")).expect("trace");
    let trace_f = fs::read(out_flagged.join("trace.csv")).expect("trace");
    assert_ne!(trace_d, trace_f, "a different seed should change the trace");
}

#[test]
fn a_config_missing_the_model_block_exits_one_and_writes_nothing() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "empty.toml", "seed = 7\n");
    let out_dir = dir.path().join("never");
    let out = run(&["gap", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(text(&out.stderr).contains("model"), "diagnostic names the missing field");
    assert!(!out_dir.exists(), "no output may be created for a bad config");
}

#[test]
fn malformed_values_are_diagnosed_with_line_and_field() {
    let dir = tempfile::tempdir().expect("tempdir");

    let cfg = write_config(
        dir.path(),
        "badtype.toml",
        "[model]\nmodel = \"xxz\"\nN = 2\nJz = 0.5\ngamma = \"high\"\njump = \"lowering\"\n",
    );
    let out = run(&["gap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = text(&out.stderr);
    assert!(err.contains("line 5"), "diagnostic should point at the line: {err}");

    let cfg = write_config(dir.path(), "unknown.toml", &format!("typo_key = 1\n{XXZ2}"));
    let out = run(&["gap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = text(&out.stderr);
    assert!(err.contains("typo_key"), "diagnostic should name the unknown key: {err}");
}

#[test]
fn degenerate_artifacts_gain_offset_columns_and_record_delta_e() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "decay.toml", DECAY);
    let out_dir = dir.path().join("run");
    let out = run(&[
        "gap-degenerate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", text(&out.stderr));

    let (meta, header, rows) = split_csv(&out_dir.join("result.csv"));
    assert_eq!(header, "gap,E_i_final,converged,gap_ED,offsets_tried");
    assert!(meta.contains("# delta_e = "), "the defaulted spacing is recorded:\n{meta}");
    assert!(meta.contains("# max_offsets = 8"));
    assert_eq!(field(&rows[0], 4), "0", "a unique steady state needs only the zero offset");

    let (_, trace_header, _) = split_csv(&out_dir.join("trace.csv"));
    assert_eq!(trace_header, "offset_m,stage,step,cost,E_r,E_i,grad_norm,fidelity");
}

#[test]
fn sweep_tabulates_points_against_exact_diagonalization() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "xxz.toml", XXZ2);
    let out_dir = dir.path().join("run");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "gamma",
        "--values",
        "0.5,1.0",
        "--workers",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", text(&out.stderr));

    let (meta, header, rows) = split_csv(&out_dir.join("sweep.csv"));
    assert_eq!(header, "value,gap_VQA,gap_ED,rel_err,iterations,status");
    assert!(meta.contains("# axis = gamma"));
    assert!(meta.contains("# values = 0.5 1"));
    assert_eq!(rows.len(), 2);
    assert_eq!(field(&rows[0], 0), "0.5", "rows keep the input order");
    assert_eq!(field(&rows[1], 0), "1");
    for row in &rows {
        assert_eq!(field(row, 5), "ok");
        let rel: f64 = field(row, 3).parse().expect("relative error parses");
        assert!(rel <= 1e-2, "VQA should track the exact gap, got rel_err {rel}");
        let iters: usize = field(row, 4).parse().expect("iterations parse");
        assert!(iters > 0);
    }
}

#[test]
fn a_sweep_point_that_cannot_converge_is_marked_failed() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "starved.toml", &format!("max_iterations = 1\n{XXZ2}"));
    let out_dir = dir.path().join("run");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "gamma",
        "--values",
        "0.5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "a failed point fails the sweep");
    let (_, _, rows) = split_csv(&out_dir.join("sweep.csv"));
    assert_eq!(rows.len(), 1, "the sweep still writes its table");
    assert_eq!(field(&rows[0], 5), "failed");
}

#[test]
fn an_empty_values_list_exits_one() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "xxz.toml", XXZ2);
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--axis",
        "gamma",
        "--values",
        "",
    ]);
    assert_eq!(code(&out), 1, "stderr: {}", text(&out.stderr));
}

#[test]
fn ed_prints_the_sorted_spectrum_and_gap() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = write_config(dir.path(), "decay.toml", DECAY);
    let out = run(&["ed", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("# gap = 0.5"), "stdout:\n{stdout}");
    assert!(stdout.contains("# zero_count = 1"));

    let data: Vec<&str> =
        stdout.lines().skip_while(|l| *l != "index,re,im").skip(1).collect();
    assert_eq!(data.len(), 4, "a single spin has a 4-dimensional generator");
    let reals: Vec<f64> =
        data.iter().map(|r| field(r, 1).parse().expect("re parses")).collect();
    assert!(reals[0].abs() <= 1e-9, "the steady state leads the spectrum");
    assert!(reals.windows(2).all(|w| w[0] >= w[1]), "rows sorted by descending real part");
    assert!((reals[3] + 1.0).abs() <= 1e-9, "the fastest mode decays at rate 1");
}

#[test]
fn the_check_suite_passes_and_reports_timings() {
    let out = run(&["check"]);
    assert_eq!(code(&out), 0, "stderr: {}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("time_ms"), "the table reports per-check wall time");
    let passes = stdout.lines().filter(|l| l.contains(" pass ")).count();
    assert_eq!(passes, 7, "all seven checks pass:\n{stdout}");
    assert!(!stdout.contains("FAIL"));
}
