//! The `frachq` command line.
//!
//! Every command validates its whole configuration before computing, and
//! computes everything before writing, so a failed run leaves the output
//! untouched. Exit codes: 0 success, 2 invalid input, 3 numerical failure,
//! 4 verification failure.

mod matrix;
mod output;
mod verify;

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

pub use matrix::MatrixFile;
pub use output::{fmt_num, Cell, Table};
pub use verify::{run_suite, CheckOutcome, Level};

use crate::error::Error;
use crate::kernel::{eval_kernel, eval_kernel_positive, FractionalOrder, KernelConfig};
use crate::models::{
    coeffs_from_envelope, free_particle_coeffs, oscillator_envelope, EnvelopeMode, FreeMode, OscillatorParams,
};
use crate::spectral::{
    eigendecompose, fractional_heisenberg_evolve, fractional_vonneumann_evolve, heisenberg_trajectory, sigma_x,
    sigma_z, DensityMatrix, HermitianOperator,
};
use crate::states::{evolve_moments, free_disp_q_printed, GaussianPacket};
use crate::subordinator::subordinate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) | CliError::Verify(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "frachq", version, about = "Fractional Heisenberg dynamics by Bochner-Phillips subordination")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the stable kernel f_alpha(t, s) on an s-grid.
    Kernel {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        grid: KernelGrid,
    },
    /// Harmonic-oscillator envelopes, means and dispersions over a t-grid.
    Oscillator {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Free-particle moment g and wave-packet statistics over a t-grid.
    Free {
        #[command(flatten)]
        common: CommonArgs,
        /// Truncation point for `--mode truncated-numeric`.
        #[arg(long)]
        s_max: Option<f64>,
    },
    /// Fractional Heisenberg evolution of an observable.
    MatrixEvolve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        inputs: MatrixInputs,
        /// Observable matrix file.
        #[arg(long)]
        observable: Option<PathBuf>,
    },
    /// Fractional von Neumann evolution of a density matrix.
    DensityEvolve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        inputs: MatrixInputs,
        /// Density-matrix file.
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// Run the invariant suites and report pass/fail per check.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// quick | full
        #[arg(long)]
        level: Option<String>,
    },
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_stop: Option<f64>,
    #[arg(long)]
    pub t_count: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p0: Option<f64>,
    /// Command-specific evaluation mode.
    #[arg(long)]
    pub mode: Option<String>,
    /// csv | json | svg
    #[arg(long)]
    pub format: Option<String>,
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Contour angle in (pi/2, pi]; automatic when omitted.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct KernelGrid {
    /// Kernel time (default 1).
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub s_start: Option<f64>,
    #[arg(long)]
    pub s_stop: Option<f64>,
    #[arg(long)]
    pub s_count: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct MatrixInputs {
    /// Hamiltonian matrix file.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Built-in system: `qubit` (H = sigma_z/2 with sigma_x, or a coherent state).
    #[arg(long)]
    pub preset: Option<String>,
    /// spectral | subordination
    #[arg(long)]
    pub method: Option<String>,
}

const CONFIG_KEYS: &[&str] = &[
    "alpha",
    "t-start",
    "t-stop",
    "t-count",
    "omega",
    "mass",
    "hbar",
    "b",
    "x0",
    "p0",
    "mode",
    "format",
    "out",
    "threads",
    "rel-tol",
    "abs-tol",
    "theta",
    "t",
    "s-start",
    "s-stop",
    "s-count",
    "s-max",
    "hamiltonian",
    "observable",
    "density",
    "preset",
    "method",
    "level",
];

/// Flat `key = value` configuration with `#` comments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| invalid(format!("config line {}: expected key = value", i + 1)))?;
            let key = k.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(invalid(format!("config line {}: unknown key '{}'", i + 1, k.trim())));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Flag value if given, else the config value, else `None`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| invalid(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format '{other}' (expected csv, json or svg)")),
        }
    }
}

/// Fully resolved settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: f64,
    pub t_start: f64,
    pub t_stop: f64,
    pub t_count: usize,
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
    pub b: f64,
    pub x0: f64,
    pub p0: f64,
    pub kernel: KernelConfig,
    pub format: Format,
    pub mode: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    fn resolve(args: &CommonArgs, file: &ConfigFile, default_stop: f64) -> CliResult<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(invalid(format!("--{name} = {v} must be positive")))
            }
        };
        let alpha = file.pick(args.alpha, "alpha")?.unwrap_or(0.5);
        FractionalOrder::new(alpha)?;
        let t_start = file.pick(args.t_start, "t-start")?.unwrap_or(0.0);
        let t_stop = file.pick(args.t_stop, "t-stop")?.unwrap_or(default_stop);
        let t_count = file.pick(args.t_count, "t-count")?.unwrap_or(51);
        if t_count < 1 {
            return Err(invalid("--t-count must be at least 1"));
        }
        if !(t_start.is_finite() && t_start >= 0.0) {
            return Err(invalid(format!("--t-start = {t_start} must be nonnegative")));
        }
        if !t_stop.is_finite() || (t_count > 1 && t_stop <= t_start) {
            return Err(invalid(format!("--t-stop = {t_stop} must exceed --t-start = {t_start}")));
        }
        let mass = positive("mass", file.pick(args.mass, "mass")?.unwrap_or(1.0))?;
        let omega = positive("omega", file.pick(args.omega, "omega")?.unwrap_or(1.0))?;
        let hbar = positive("hbar", file.pick(args.hbar, "hbar")?.unwrap_or(1.0))?;
        let b = positive("b", file.pick(args.b, "b")?.unwrap_or(1.0))?;
        let x0 = file.pick(args.x0, "x0")?.unwrap_or(1.0);
        let p0 = file.pick(args.p0, "p0")?.unwrap_or(1.0);
        if !(x0.is_finite() && p0.is_finite()) {
            return Err(invalid("--x0 and --p0 must be finite"));
        }
        let mut kernel = KernelConfig::default();
        if let Some(v) = file.pick(args.rel_tol, "rel-tol")? {
            kernel.rel_tol = v;
        }
        if let Some(v) = file.pick(args.abs_tol, "abs-tol")? {
            kernel.abs_tol = v;
        }
        kernel.theta = file.pick(args.theta, "theta")?;
        kernel.validate()?;
        let format = match file.pick(args.format.clone(), "format")? {
            Some(f) => f.parse::<Format>().map_err(invalid)?,
            None => Format::Csv,
        };
        let mode = file.pick(args.mode.clone(), "mode")?;
        let out = file.pick(args.out.as_ref().map(|p| p.display().to_string()), "out")?.map(PathBuf::from);
        let threads = file.pick(args.threads, "threads")?;
        if threads == Some(0) {
            return Err(invalid("--threads must be at least 1"));
        }
        Ok(Self { alpha, t_start, t_stop, t_count, mass, omega, hbar, b, x0, p0, kernel, format, mode, out, threads })
    }

    pub fn order(&self) -> FractionalOrder {
        FractionalOrder::new(self.alpha).expect("validated")
    }

    pub fn t_grid(&self) -> Vec<f64> {
        linspace(self.t_start, self.t_stop, self.t_count)
    }

    pub fn packet(&self) -> GaussianPacket {
        GaussianPacket::new(self.x0, self.p0, self.b, self.hbar).expect("validated")
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

fn load_config(args: &CommonArgs) -> CliResult<ConfigFile> {
    match &args.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

/// Evaluates `f` on every grid point, in parallel when allowed, keeping
/// input order. Returns the first failure in grid order.
fn grid_map<T: Send>(
    grid: &[f64],
    threads: Option<usize>,
    f: impl Fn(f64) -> CliResult<T> + Sync + Send,
) -> CliResult<Vec<T>> {
    let run = || grid.par_iter().map(|&t| f(t)).collect::<Vec<CliResult<T>>>();
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    results.into_iter().collect()
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
        Format::Svg => table.to_svg(),
    }
}

fn cmd_kernel(cfg: &RunConfig, grid: &KernelGrid, file: &ConfigFile) -> CliResult<String> {
    let order = cfg.order();
    if order.is_classical() {
        return Err(invalid("the kernel command needs 0 < alpha < 1 (alpha = 1 has no density)"));
    }
    let t = file.pick(grid.t, "t")?.unwrap_or(1.0);
    if !(t.is_finite() && t > 0.0) {
        return Err(invalid(format!("--t = {t} must be positive")));
    }
    let s_start = file.pick(grid.s_start, "s-start")?.unwrap_or(0.0);
    let s_stop = file.pick(grid.s_stop, "s-stop")?.unwrap_or(10.0);
    let s_count = file.pick(grid.s_count, "s-count")?.unwrap_or(101);
    if s_count < 1 || !(s_start.is_finite() && s_start >= 0.0) || (s_count > 1 && !(s_stop > s_start)) {
        return Err(invalid("s-grid needs s-count >= 1, s-start >= 0 and s-stop > s-start"));
    }
    let route = cfg.mode.clone().unwrap_or_else(|| "contour".into());
    if route != "contour" && route != "positive" {
        return Err(invalid(format!("kernel --mode '{route}' (expected contour or positive)")));
    }
    let s_grid = linspace(s_start, s_stop, s_count);
    let values = grid_map(&s_grid, cfg.threads, |s| {
        let v = if route == "contour" {
            eval_kernel(order, t, s, &cfg.kernel)?
        } else {
            eval_kernel_positive(order, t, s)?
        };
        Ok(v)
    })?;
    let mut table = Table::new(&["s", "f"]);
    for (s, v) in s_grid.iter().zip(values) {
        table.push(vec![Cell::Num(*s), Cell::Num(v)]);
    }
    table.meta = vec![("alpha".into(), fmt_num(cfg.alpha)), ("t".into(), fmt_num(t)), ("route".into(), route)];
    Ok(render(&table, cfg.format))
}

fn cmd_oscillator(cfg: &RunConfig) -> CliResult<String> {
    let mode = match cfg.mode.as_deref().unwrap_or("closed-form") {
        "closed-form" => EnvelopeMode::ClosedForm,
        "quadrature" => EnvelopeMode::Quadrature,
        other => return Err(invalid(format!("oscillator --mode '{other}' (expected closed-form or quadrature)"))),
    };
    let params = OscillatorParams::new(cfg.mass, cfg.omega, cfg.hbar)?;
    let packet = cfg.packet();
    let order = cfg.order();
    let grid = cfg.t_grid();
    let rows = grid_map(&grid, cfg.threads, |t| {
        let env = oscillator_envelope(order, params.omega, t, mode, &cfg.kernel)?;
        let coeffs = coeffs_from_envelope(&params, &env);
        let m = evolve_moments(&packet, &coeffs);
        Ok(vec![t, env.c, env.s, m.mean_q, m.mean_p, m.disp_q, m.disp_p])
    })?;
    let mut table = Table::new(&["t", "C", "S", "mean_q", "mean_p", "D_Q", "D_P"]);
    for r in rows {
        table.push(r.into_iter().map(Cell::Num).collect());
    }
    table.meta = vec![("alpha".into(), fmt_num(cfg.alpha)), ("omega".into(), fmt_num(cfg.omega))];
    Ok(render(&table, cfg.format))
}

fn cmd_free(cfg: &RunConfig, s_max: Option<f64>) -> CliResult<String> {
    let (mode, label) = match cfg.mode.as_deref().unwrap_or("eq-free") {
        "paper-half" => (FreeMode::PaperHalf, "paper-half"),
        "regularized-half" | "eq-free" => (FreeMode::RegularizedHalf, "regularized-half"),
        "truncated-numeric" => (FreeMode::TruncatedNumeric { s_max }, "truncated-numeric"),
        other => {
            return Err(invalid(format!(
                "free --mode '{other}' (expected eq-free, paper-half, regularized-half or truncated-numeric)"
            )))
        }
    };
    let order = cfg.order();
    if !order.is_classical() && !matches!(mode, FreeMode::TruncatedNumeric { .. }) && cfg.alpha != 0.5 {
        return Err(invalid(format!("free --mode {label} needs alpha = 0.5 or alpha = 1 (got {})", cfg.alpha)));
    }
    if let Some(v) = s_max {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!("--s-max = {v} must be positive")));
        }
    }
    let packet = cfg.packet();
    let grid = cfg.t_grid();
    let rows = grid_map(&grid, cfg.threads, |t| {
        let (coeffs, diag) = free_particle_coeffs(order, t, cfg.mass, mode, &cfg.kernel)?;
        let g = coeffs.m[0][1] * cfg.mass;
        let m = evolve_moments(&packet, &coeffs);
        let mut note = if diag.divergent { "divergent".to_string() } else { "convergent".to_string() };
        if let (Some(s), Some(p)) = (diag.truncation_point, diag.measured_exponent) {
            note.push_str(&format!(";s_max={};growth_exponent={}", fmt_num(s), fmt_num(p)));
        }
        Ok(vec![
            Cell::Num(t),
            Cell::Num(g),
            Cell::Num(m.mean_q),
            Cell::Num(m.mean_p),
            Cell::Num(m.disp_q),
            Cell::Num(m.disp_p),
            Cell::Num(free_disp_q_printed(&packet, cfg.mass, t)),
            Cell::Text(if order.is_classical() { "classical".into() } else { label.into() }),
            Cell::Text(note),
        ])
    })?;
    let mut table = Table::new(&["t", "g", "mean_q", "mean_p", "D_Q", "D_P", "D_Q_printed", "mode", "diagnostics"]);
    for r in rows {
        table.push(r);
    }
    table.meta = vec![("alpha".into(), fmt_num(cfg.alpha)), ("mass".into(), fmt_num(cfg.mass))];
    Ok(render(&table, cfg.format))
}

fn read_matrix(path: &Path) -> CliResult<DMatrix<Complex64>> {
    MatrixFile::read(path).and_then(|f| f.to_matrix()).map_err(CliError::Validation)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Observable,
    Density,
}

fn matrix_table(grid: &[f64], mats: &[DMatrix<Complex64>], extra: &[(&str, Vec<f64>)]) -> Table {
    let n = mats.first().map_or(0, |m| m.nrows());
    let mut cols = vec!["t".to_string()];
    for j in 0..n {
        for k in 0..n {
            cols.push(format!("re_{j}_{k}"));
            cols.push(format!("im_{j}_{k}"));
        }
    }
    cols.extend(extra.iter().map(|(name, _)| name.to_string()));
    let mut table = Table { columns: cols, rows: Vec::new(), meta: Vec::new() };
    for (i, (t, m)) in grid.iter().zip(mats).enumerate() {
        let mut row = vec![Cell::Num(*t)];
        for j in 0..n {
            for k in 0..n {
                row.push(Cell::Num(m[(j, k)].re));
                row.push(Cell::Num(m[(j, k)].im));
            }
        }
        row.extend(extra.iter().map(|(_, v)| Cell::Num(v[i])));
        table.push(row);
    }
    table
}

fn matrix_json(cfg: &RunConfig, role: Role, grid: &[f64], mats: &[DMatrix<Complex64>]) -> String {
    let round = |v: f64| fmt_num(v).parse::<f64>().unwrap_or(f64::NAN);
    let steps: Vec<_> = grid
        .iter()
        .zip(mats)
        .map(|(t, m)| {
            let n = m.nrows();
            let re: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|k| round(m[(j, k)].re)).collect()).collect();
            let im: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|k| round(m[(j, k)].im)).collect()).collect();
            json!({ "t": round(*t), "dim": n, "re": re, "im": im })
        })
        .collect();
    let role = if role == Role::Observable { "observable" } else { "density" };
    let doc = json!({ "alpha": round(cfg.alpha), "role": role, "steps": steps });
    let mut s = serde_json::to_string_pretty(&doc).expect("matrix series serializes");
    s.push('\n');
    s
}

fn qubit_preset(role: Role) -> (HermitianOperator, DMatrix<Complex64>) {
    let h = HermitianOperator::new(sigma_z().into_inner() * Complex64::new(0.5, 0.0)).expect("preset is Hermitian");
    let m = match role {
        Role::Observable => sigma_x().into_inner(),
        Role::Density => DMatrix::from_element(2, 2, Complex64::new(0.5, 0.0)),
    };
    (h, m)
}

fn cmd_matrix(
    cfg: &RunConfig,
    inputs: &MatrixInputs,
    target: Option<&PathBuf>,
    role: Role,
    file: &ConfigFile,
) -> CliResult<String> {
    let hamiltonian = file.pick(inputs.hamiltonian.as_ref().map(|p| p.display().to_string()), "hamiltonian")?;
    let key = if role == Role::Observable { "observable" } else { "density" };
    let target = file.pick(target.map(|p| p.display().to_string()), key)?;
    let preset = file.pick(inputs.preset.clone(), "preset")?;
    let method = file.pick(inputs.method.clone(), "method")?.unwrap_or_else(|| "spectral".into());
    if method != "spectral" && method != "subordination" {
        return Err(invalid(format!("--method '{method}' (expected spectral or subordination)")));
    }
    if role == Role::Density && method != "spectral" {
        return Err(invalid("density-evolve supports only --method spectral"));
    }

    let (h, m) = match (preset.as_deref(), hamiltonian, target) {
        (Some("qubit"), None, None) => qubit_preset(role),
        (Some(p), None, None) => return Err(invalid(format!("unknown preset '{p}' (expected qubit)"))),
        (None, Some(hp), Some(tp)) => {
            let h = HermitianOperator::new(read_matrix(Path::new(&hp))?)
                .map_err(|e| invalid(format!("hamiltonian: {e}")))?;
            (h, read_matrix(Path::new(&tp))?)
        }
        _ => return Err(invalid(format!("give either --preset qubit or both --hamiltonian and --{key}"))),
    };
    if m.nrows() != h.dim() {
        return Err(invalid(format!(
            "{key} is {}×{} but the hamiltonian is {}×{}",
            m.nrows(),
            m.nrows(),
            h.dim(),
            h.dim()
        )));
    }

    let order = cfg.order();
    let spec = eigendecompose(&h, cfg.hbar)?;
    let grid = cfg.t_grid();
    match role {
        Role::Observable => {
            let a = HermitianOperator::new(m).map_err(|e| invalid(format!("observable: {e}")))?;
            let traj = heisenberg_trajectory(&spec, &a)?;
            let mats = grid_map(&grid, cfg.threads, |t| {
                if method == "spectral" || t == 0.0 {
                    Ok(fractional_heisenberg_evolve(&spec, &a, order, t)?.into_inner())
                } else {
                    Ok(subordinate(order, t, &traj, &cfg.kernel)?.value)
                }
            })?;
            Ok(match cfg.format {
                Format::Json => matrix_json(cfg, role, &grid, &mats),
                f => render(&matrix_table(&grid, &mats, &[]), f),
            })
        }
        Role::Density => {
            let rho = DensityMatrix::new(m).map_err(|e| invalid(format!("density: {e}")))?;
            let out = grid_map(&grid, cfg.threads, |t| {
                let r = fractional_vonneumann_evolve(&spec, &rho, order, t)?;
                let min_ev = r.min_eigenvalue()?;
                Ok((r.entries().clone(), r.trace(), min_ev))
            })?;
            let mats: Vec<_> = out.iter().map(|(m, _, _)| m.clone()).collect();
            let traces: Vec<f64> = out.iter().map(|(_, tr, _)| *tr).collect();
            let mins: Vec<f64> = out.iter().map(|(_, _, e)| *e).collect();
            Ok(match cfg.format {
                Format::Json => matrix_json(cfg, role, &grid, &mats),
                f => render(&matrix_table(&grid, &mats, &[("trace", traces), ("min_eig", mins)]), f),
            })
        }
    }
}

fn cmd_verify(cfg: &RunConfig, level: Option<String>, file: &ConfigFile) -> CliResult<(String, bool)> {
    let level = match file.pick(level, "level")?.as_deref().unwrap_or("quick") {
        "quick" => Level::Quick,
        "full" => Level::Full,
        other => return Err(invalid(format!("--level '{other}' (expected quick or full)"))),
    };
    let outcomes = run_suite(level, &cfg.kernel);
    let mut text = String::new();
    for o in &outcomes {
        text.push_str(&o.line());
        text.push('\n');
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    text.push_str(&format!("{} checks, {} failed\n", outcomes.len(), failed));
    Ok((text, failed == 0))
}

fn execute(cli: Cli) -> CliResult<(String, Option<PathBuf>)> {
    let (common, default_stop) = match &cli.command {
        Command::Kernel { common, .. } | Command::Verify { common, .. } => (common, 5.0),
        Command::Oscillator { common } | Command::Free { common, .. } => (common, 5.0),
        Command::MatrixEvolve { common, .. } | Command::DensityEvolve { common, .. } => (common, 5.0),
    };
    let file = load_config(common)?;
    let cfg = RunConfig::resolve(common, &file, default_stop)?;
    let text = match &cli.command {
        Command::Kernel { grid, .. } => cmd_kernel(&cfg, grid, &file)?,
        Command::Oscillator { .. } => cmd_oscillator(&cfg)?,
        Command::Free { s_max, .. } => {
            let s_max = file.pick(*s_max, "s-max")?;
            cmd_free(&cfg, s_max)?
        }
        Command::MatrixEvolve { inputs, observable, .. } => {
            cmd_matrix(&cfg, inputs, observable.as_ref(), Role::Observable, &file)?
        }
        Command::DensityEvolve { inputs, density, .. } => {
            cmd_matrix(&cfg, inputs, density.as_ref(), Role::Density, &file)?
        }
        Command::Verify { level, .. } => {
            let (text, ok) = cmd_verify(&cfg, level.clone(), &file)?;
            if !ok {
                return Err(CliError::Verify(text));
            }
            text
        }
    };
    Ok((text, cfg.out.clone()))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
                EXIT_VALIDATION
            } else {
                let _ = write!(stdout, "{rendered}");
                EXIT_OK
            };
        }
    };
    match execute(cli) {
        Ok((text, out)) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_VALIDATION
                }
            }
        }
        Err(CliError::Verify(report)) => {
            let _ = write!(stdout, "{report}");
            let _ = writeln!(stderr, "error: verification failed");
            EXIT_VERIFY
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}
