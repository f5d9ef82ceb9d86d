//! Run configuration: TOML schema, validation, and default resolution.
//!
//! The file format is flat key/value TOML with a single nested `[model]`
//! block. Unknown keys are rejected, and every diagnostic names the
//! offending line or field so a bad config fails fast before any output
//! file is created.
//!
//! ```toml
//! # optional top-level keys (defaults in parentheses)
//! blocks = 4            # ansatz depth          (2N)
//! kappa = 4.0           # penalty strength      (model hint, else term count²)
//! delta_e = 0.3         # offset spacing        (spectral-width heuristic)
//! max_offsets = 8       # offset-scan cap       (8)
//! seed = 7              # RNG seed              (7)
//! out = "runs/demo"     # output directory      (".")
//! workers = 4           # sweep threads         (available parallelism)
//! max_iterations = 2000 # optimizer caps and tolerances
//! grad_tol = 1e-8
//! cost_tol = 1e-10
//! fd_step = 1e-5
//! theta_init_scale = 0.1
//! pretrain_starts = 4   # pre-training starts per offset
//!
//! [model]
//! model = "xxz"         # or "custom"
//! N = 2
//! Jz = 0.5
//! gamma = 1.0
//! jump = "lowering"     # or "dephasing"
//! ```
//!
//! A custom model instead lists operators in the textual notation
//! `"(re,im) LABEL"` with one Pauli letter per site:
//!
//! ```toml
//! [model]
//! model = "custom"
//! N = 1
//! hamiltonian = ["(0.5,0) Z"]
//! jumps = [{ rate = 1.0, operator = ["(0.5,0) X", "(0,-0.5) Y"] }]
//! ```

use std::path::{Path, PathBuf};

use anyhow::Result;
use liougap::bfgs::OptimizerOptions;
use liougap::cost::default_kappa;
use liougap::lindblad::{default_delta_e, vectorize, Jump, JumpKind, LindbladModel};
use liougap::pauli::{parse_term, PauliSum};
use liougap::solver::{RunOverrides, DEFAULT_PRETRAIN_STARTS};
use serde::Deserialize;

/// Offsets tried before a scan gives up, unless the config says otherwise.
pub const DEFAULT_MAX_OFFSETS: usize = 8;

/// Seed used when neither the config nor the command line names one.
pub const DEFAULT_SEED: u64 = 7;

/// A malformed or inconsistent configuration. Carrying this type through
/// `anyhow` lets `main` map config problems to exit code 1 while every
/// other failure maps to 2.
#[derive(Debug)]
pub struct ConfigError(String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError::new(msg).into()
}

/// Top-level file schema. Every field except the model block is optional.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: ModelSection,
    pub blocks: Option<usize>,
    pub kappa: Option<f64>,
    pub delta_e: Option<f64>,
    pub max_offsets: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub max_iterations: Option<usize>,
    pub grad_tol: Option<f64>,
    pub cost_tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub theta_init_scale: Option<f64>,
    pub pretrain_starts: Option<usize>,
}

/// The `[model]` block: either the built-in XXZ family or a custom
/// Hamiltonian/jump list.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub model: String,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "Jz")]
    pub jz: Option<f64>,
    pub gamma: Option<f64>,
    pub jump: Option<String>,
    pub hamiltonian: Option<Vec<String>>,
    pub jumps: Option<Vec<CustomJump>>,
}

/// One dissipation channel of a custom model.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomJump {
    pub rate: f64,
    pub operator: Vec<String>,
}

/// Command-line overrides that outrank the file's values.
#[derive(Debug, Default, Clone)]
pub struct CliOverrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Scalar parameters of a configured XXZ model, kept so sweeps can rebuild
/// the model with one axis value substituted.
#[derive(Debug, Clone, Copy)]
pub struct XxzParams {
    pub n: usize,
    pub jz: f64,
    pub gamma: f64,
    pub kind: JumpKind,
}

/// A fully validated run with every default materialized.
#[derive(Debug)]
pub struct Resolved {
    pub model: LindbladModel,
    /// `Some` when the model block chose the XXZ family.
    pub xxz: Option<XxzParams>,
    pub blocks: usize,
    /// Whether the config pinned the depth (sweeps then keep it per point).
    pub blocks_explicit: bool,
    pub kappa: f64,
    /// Whether the config pinned the penalty strength.
    pub kappa_explicit: bool,
    pub delta_e: f64,
    pub max_offsets: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// `None` leaves the sweep pool at the machine's available parallelism.
    pub workers: Option<usize>,
    pub opts: OptimizerOptions,
    pub pretrain_starts: usize,
    model_lines: Vec<(String, String)>,
}

pub fn load(path: &Path, cli: &CliOverrides) -> Result<Resolved> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
    let file: FileConfig = toml::from_str(&text)
        .map_err(|e| bad(format!("malformed config {}: {e}", path.display())))?;
    resolve(&file, cli)
}

pub fn resolve(file: &FileConfig, cli: &CliOverrides) -> Result<Resolved> {
    let (model, xxz) = build_model(&file.model)?;
    let model_lines = model_lines(&file.model);
    let l = vectorize(&model);

    let blocks = file.blocks.unwrap_or_else(|| l.qubit_count());
    if blocks == 0 {
        return Err(bad("blocks must be at least 1"));
    }
    let kappa = file.kappa.unwrap_or_else(|| default_kappa(&l, model.kappa_hint()));
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(bad(format!("kappa must be finite and non-negative, got {kappa}")));
    }
    let delta_e = file.delta_e.unwrap_or_else(|| default_delta_e(&l));
    if !delta_e.is_finite() || delta_e <= 0.0 {
        return Err(bad(format!("delta_e must be finite and positive, got {delta_e}")));
    }
    let max_offsets = file.max_offsets.unwrap_or(DEFAULT_MAX_OFFSETS);
    if max_offsets == 0 {
        return Err(bad("max_offsets must be at least 1"));
    }
    let pretrain_starts = file.pretrain_starts.unwrap_or(DEFAULT_PRETRAIN_STARTS);
    if pretrain_starts == 0 {
        return Err(bad("pretrain_starts must be at least 1"));
    }

    let seed = cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
    let defaults = OptimizerOptions::default();
    let opts = OptimizerOptions {
        max_iterations: file.max_iterations.unwrap_or(defaults.max_iterations),
        grad_tol: file.grad_tol.unwrap_or(defaults.grad_tol),
        cost_tol: file.cost_tol.unwrap_or(defaults.cost_tol),
        fd_step: file.fd_step.unwrap_or(defaults.fd_step),
        seed,
        theta_init_scale: file.theta_init_scale.unwrap_or(defaults.theta_init_scale),
    };
    if opts.max_iterations == 0 {
        return Err(bad("max_iterations must be at least 1"));
    }
    for (name, v) in [("grad_tol", opts.grad_tol), ("cost_tol", opts.cost_tol)] {
        if !v.is_finite() || v < 0.0 {
            return Err(bad(format!("{name} must be finite and non-negative, got {v}")));
        }
    }
    for (name, v) in [("fd_step", opts.fd_step), ("theta_init_scale", opts.theta_init_scale)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(bad(format!("{name} must be finite and positive, got {v}")));
        }
    }

    let out = cli
        .out
        .clone()
        .or_else(|| file.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let workers = cli.workers.or(file.workers);
    if workers == Some(0) {
        return Err(bad("workers must be at least 1"));
    }

    Ok(Resolved {
        model,
        xxz,
        blocks,
        blocks_explicit: file.blocks.is_some(),
        kappa,
        kappa_explicit: file.kappa.is_some(),
        delta_e,
        max_offsets,
        seed,
        out,
        workers,
        opts,
        pretrain_starts,
        model_lines,
    })
}

impl Resolved {
    pub fn overrides(&self) -> RunOverrides {
        RunOverrides {
            blocks: Some(self.blocks),
            kappa: Some(self.kappa),
            pretrain_starts: Some(self.pretrain_starts),
        }
    }

    /// `# key = value` comment lines naming the model alone; the `ed`
    /// command uses these, the solve commands extend them.
    pub fn model_header(&self, command: &str) -> Vec<String> {
        let mut lines = vec![format!("# command = {command}")];
        lines.extend(self.model_lines.iter().map(|(k, v)| format!("# model.{k} = {v}")));
        lines
    }

    /// Full resolved configuration of a solve, defaults materialized.
    /// Output location and worker count are deliberately left out so that
    /// identical configs produce byte-identical files wherever they run.
    pub fn solve_header(&self, command: &str) -> Vec<String> {
        let mut lines = self.model_header(command);
        lines.push(format!("# blocks = {}", self.blocks));
        lines.push(format!("# kappa = {}", self.kappa));
        lines.push(format!("# max_iterations = {}", self.opts.max_iterations));
        lines.push(format!("# grad_tol = {}", self.opts.grad_tol));
        lines.push(format!("# cost_tol = {}", self.opts.cost_tol));
        lines.push(format!("# fd_step = {}", self.opts.fd_step));
        lines.push(format!("# theta_init_scale = {}", self.opts.theta_init_scale));
        lines.push(format!("# pretrain_starts = {}", self.pretrain_starts));
        lines.push(format!("# seed = {}", self.seed));
        lines
    }

    /// Scan parameters appended to the degenerate driver's header.
    pub fn scan_header(&self) -> Vec<String> {
        vec![
            format!("# delta_e = {}", self.delta_e),
            format!("# max_offsets = {}", self.max_offsets),
        ]
    }
}

fn build_model(m: &ModelSection) -> Result<(LindbladModel, Option<XxzParams>)> {
    match m.model.as_str() {
        "xxz" => {
            if m.hamiltonian.is_some() || m.jumps.is_some() {
                return Err(bad(
                    "model.hamiltonian and model.jumps apply only to model = \"custom\"",
                ));
            }
            let n = m.n.ok_or_else(|| bad("model.N is required for model = \"xxz\""))?;
            let jz = m.jz.ok_or_else(|| bad("model.Jz is required for model = \"xxz\""))?;
            let gamma =
                m.gamma.ok_or_else(|| bad("model.gamma is required for model = \"xxz\""))?;
            let kind = match m.jump.as_deref() {
                Some("lowering") => JumpKind::Lowering,
                Some("dephasing") => JumpKind::Dephasing,
                Some(other) => {
                    return Err(bad(format!(
                        "model.jump must be \"lowering\" or \"dephasing\", got {other:?}"
                    )))
                }
                None => return Err(bad("model.jump is required for model = \"xxz\"")),
            };
            let model =
                LindbladModel::xxz(n, jz, gamma, kind).map_err(|e| bad(format!("model: {e}")))?;
            Ok((model, Some(XxzParams { n, jz, gamma, kind })))
        }
        "custom" => {
            if m.jz.is_some() || m.gamma.is_some() || m.jump.is_some() {
                return Err(bad(
                    "model.Jz, model.gamma, and model.jump apply only to model = \"xxz\"",
                ));
            }
            let n = m.n.ok_or_else(|| bad("model.N is required for model = \"custom\""))?;
            let h = parse_sum(n, m.hamiltonian.as_deref().unwrap_or(&[]), "model.hamiltonian")?;
            let mut jumps = Vec::new();
            for (i, j) in m.jumps.as_deref().unwrap_or(&[]).iter().enumerate() {
                let field = format!("model.jumps[{i}]");
                if !j.rate.is_finite() || j.rate < 0.0 {
                    return Err(bad(format!(
                        "{field}.rate must be finite and non-negative, got {}",
                        j.rate
                    )));
                }
                if j.operator.is_empty() {
                    return Err(bad(format!("{field}.operator must list at least one term")));
                }
                let operator = parse_sum(n, &j.operator, &format!("{field}.operator"))?;
                jumps.push(Jump { rate: j.rate, operator });
            }
            let model =
                LindbladModel::new(n, h, jumps).map_err(|e| bad(format!("model: {e}")))?;
            Ok((model, None))
        }
        other => Err(bad(format!("model.model must be \"xxz\" or \"custom\", got {other:?}"))),
    }
}

fn parse_sum(n: usize, terms: &[String], field: &str) -> Result<PauliSum> {
    let mut parsed = Vec::new();
    for t in terms {
        let (coeff, string) = parse_term(t).map_err(|e| bad(format!("{field}: {e}")))?;
        if string.qubit_count() != n {
            return Err(bad(format!(
                "{field}: term {t:?} acts on {} sites, expected N = {n}",
                string.qubit_count()
            )));
        }
        parsed.push((coeff, string));
    }
    if parsed.is_empty() {
        return Ok(PauliSum::zero(n));
    }
    PauliSum::from_terms(n, parsed).map_err(|e| bad(format!("{field}: {e}")))
}

fn model_lines(m: &ModelSection) -> Vec<(String, String)> {
    let mut lines = vec![("model".to_string(), m.model.clone())];
    if let Some(n) = m.n {
        lines.push(("N".into(), n.to_string()));
    }
    match m.model.as_str() {
        "custom" => {
            let h = m.hamiltonian.as_deref().unwrap_or(&[]);
            let joined = if h.is_empty() { "0".to_string() } else { h.join(" + ") };
            lines.push(("hamiltonian".into(), joined));
            for (i, j) in m.jumps.as_deref().unwrap_or(&[]).iter().enumerate() {
                lines.push((format!("jumps.{i}.rate"), format!("{}", j.rate)));
                lines.push((format!("jumps.{i}.operator"), j.operator.join(" + ")));
            }
        }
        _ => {
            if let Some(jz) = m.jz {
                lines.push(("Jz".into(), format!("{jz}")));
            }
            if let Some(g) = m.gamma {
                lines.push(("gamma".into(), format!("{g}")));
            }
            if let Some(j) = &m.jump {
                lines.push(("jump".into(), j.clone()));
            }
        }
    }
    lines
}
