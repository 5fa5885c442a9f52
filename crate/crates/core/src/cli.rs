//! Declarative runs: JSON configuration in, CSV/JSON artifacts out.
//!
//! A configuration names a task, the driven system and the numerical knobs
//! for that task. Parsing validates everything (shapes, Hermitian pairing of
//! Fourier terms, grid sanity) before any computation starts. Output is
//! byte-for-byte reproducible: iteration order is fixed and floats are
//! printed in their shortest round-trip form.
//!
//! Exit codes: `0` success, `1` I/O or internal failure, `2` configuration
//! error, `3` resonance, `4` integrator accuracy.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::fourier::{FrequencyVector, MultiIndex, QPOperator};
use crate::lambda::{run_experiment, DriveSpec, LambdaExperiment};
use crate::magnus::{expand, DEFAULT_ORDER};
use crate::propagator::{evolve_exact_with, unitarity_residual, EvolveOptions, TimeGrid, DEFAULT_STEPS_PER_PERIOD, DEFAULT_STEP_TOLERANCE};
use crate::sambe::build_extended;
use crate::{CMatrix, C64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESONANCE: i32 = 3;
pub const EXIT_ACCURACY: i32 = 4;

/// Relative tolerance for the `H_{−n} = H_n†` pairing check.
const PAIRING_TOLERANCE: f64 = 1e-12;

/// Formats a float in its shortest round-trip form (never more than 17
/// significant digits). Plain notation for moderate magnitudes, scientific
/// otherwise.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Rectangular table of finite reals with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveTable {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CurveTable {
    pub fn new(header: Vec<String>) -> Self {
        CurveTable { header, rows: Vec::new() }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> crate::Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Contract(format!(
                "row has {} values but the table has {} columns",
                row.len(),
                self.header.len()
            )));
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::Contract(format!("non-finite value {x} in table row")));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Values of the named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_float(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    EffectiveHamiltonian,
    Evolve,
    LambdaDemo,
    SambeCompare,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Task::EffectiveHamiltonian => "effective-hamiltonian",
            Task::Evolve => "evolve",
            Task::LambdaDemo => "lambda-demo",
            Task::SambeCompare => "sambe-compare",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: Option<Task>,
    system: RawSystem,
    order: Option<usize>,
    cutoff: Option<u32>,
    grid: Option<RawGrid>,
    resonance_threshold: Option<f64>,
    output: Option<PathBuf>,
    elements: Option<Vec<[usize; 2]>>,
    steps_per_period: Option<usize>,
    step_tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    dim: Option<usize>,
    d: Option<usize>,
    omega: Vec<f64>,
    terms: Option<Vec<RawTerm>>,
    lambda_drive: Option<Vec<RawDriveTerm>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    index: Vec<i32>,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDriveTerm {
    index: Vec<i32>,
    amplitude: [f64; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t0: f64,
    t1: f64,
    steps: usize,
}

/// The driven system described by a configuration.
#[derive(Clone, Debug)]
pub enum SystemSpec {
    /// Explicit matrix Fourier coefficients.
    Matrix(QPOperator),
    /// Lambda system given by its scalar drive coefficients.
    Lambda(DriveSpec),
}

impl SystemSpec {
    pub fn hamiltonian(&self) -> QPOperator {
        match self {
            SystemSpec::Matrix(h) => h.clone(),
            SystemSpec::Lambda(drive) => crate::lambda::build_lambda(drive),
        }
    }
}

/// Validated run description.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub system: SystemSpec,
    pub order: usize,
    pub cutoff: Option<u32>,
    pub grid: Option<TimeGrid>,
    pub resonance_threshold: f64,
    pub output: Option<PathBuf>,
    /// Matrix elements reported by `evolve`; empty means all.
    pub elements: Vec<(usize, usize)>,
    pub evolve: EvolveOptions,
}

/// Rejected configuration: the offending key path and what is wrong with it.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
    pub line: Option<usize>,
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { path: path.into(), message: message.into(), line: None }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at `{}` (line {line}): {}", self.path, self.message),
            None => write!(f, "config error at `{}`: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn to_matrix(rows: &[Vec<[f64; 2]>], dim: usize, path: &str) -> Result<CMatrix, ConfigError> {
    if rows.len() != dim {
        return Err(ConfigError::at(path, format!("expected {dim} rows, found {}", rows.len())));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(ConfigError::at(
                format!("{path}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        for (j, [re, im]) in row.iter().enumerate() {
            if !(re.is_finite() && im.is_finite()) {
                return Err(ConfigError::at(format!("{path}[{i}][{j}]"), "entry must be finite"));
            }
            m[(i, j)] = C64::new(*re, *im);
        }
    }
    Ok(m)
}

fn check_index(index: &[i32], d: usize, path: &str) -> Result<MultiIndex, ConfigError> {
    if index.len() != d {
        return Err(ConfigError::at(path, format!("multi-index has length {} but d = {d}", index.len())));
    }
    Ok(MultiIndex::new(index.to_vec()))
}

fn validate_system(raw: RawSystem) -> Result<SystemSpec, ConfigError> {
    for (k, w) in raw.omega.iter().enumerate() {
        if !(w.is_finite() && *w > 0.0) {
            return Err(ConfigError::at(format!("system.omega[{k}]"), "frequency must be finite and positive"));
        }
    }
    let omega = FrequencyVector::new(raw.omega.clone())
        .map_err(|e| ConfigError::at("system.omega", e.to_string()))?;
    let d = omega.len();
    if let Some(given) = raw.d {
        if given != d {
            return Err(ConfigError::at("system.d", format!("d = {given} but omega has {d} entries")));
        }
    }

    match (raw.terms, raw.lambda_drive) {
        (Some(_), Some(_)) => Err(ConfigError::at("system", "give either `terms` or `lambda_drive`, not both")),
        (None, None) => Err(ConfigError::at("system", "missing `terms` or `lambda_drive`")),
        (None, Some(drive)) => {
            if let Some(dim) = raw.dim {
                if dim != 3 {
                    return Err(ConfigError::at("system.dim", "a Lambda system has dim = 3"));
                }
            }
            let mut coeffs = Vec::with_capacity(drive.len());
            let mut seen = BTreeSet::new();
            for (k, term) in drive.iter().enumerate() {
                let path = format!("system.lambda_drive[{k}]");
                let n = check_index(&term.index, d, &format!("{path}.index"))?;
                if n.is_zero() {
                    return Err(ConfigError::at(format!("{path}.index"), "the drive must have no static component"));
                }
                if !seen.insert(n.clone()) {
                    return Err(ConfigError::at(format!("{path}.index"), format!("duplicate harmonic {n}")));
                }
                let [re, im] = term.amplitude;
                if !(re.is_finite() && im.is_finite()) {
                    return Err(ConfigError::at(format!("{path}.amplitude"), "amplitude must be finite"));
                }
                coeffs.push((n, C64::new(re, im)));
            }
            let drive = DriveSpec::new(omega, coeffs).map_err(|e| ConfigError::at("system.lambda_drive", e.to_string()))?;
            Ok(SystemSpec::Lambda(drive))
        }
        (Some(terms), None) => {
            let dim = raw.dim.ok_or_else(|| ConfigError::at("system.dim", "missing Hilbert-space dimension"))?;
            if dim == 0 {
                return Err(ConfigError::at("system.dim", "dimension must be positive"));
            }
            let mut parsed: Vec<(MultiIndex, CMatrix, usize)> = Vec::with_capacity(terms.len());
            let mut seen = BTreeSet::new();
            for (k, term) in terms.iter().enumerate() {
                let path = format!("system.terms[{k}]");
                let n = check_index(&term.index, d, &format!("{path}.index"))?;
                if !seen.insert(n.clone()) {
                    return Err(ConfigError::at(format!("{path}.index"), format!("duplicate harmonic {n}")));
                }
                let m = to_matrix(&term.matrix, dim, &format!("{path}.matrix"))?;
                parsed.push((n, m, k));
            }
            let zero = CMatrix::zeros(dim, dim);
            for (n, m, k) in &parsed {
                let partner_n = -n;
                let partner = parsed.iter().find(|(p, _, _)| *p == partner_n);
                let partner_m = partner.map(|(_, pm, _)| pm).unwrap_or(&zero);
                let defect = (partner_m - m.adjoint()).norm();
                if defect > PAIRING_TOLERANCE * m.norm().max(1.0) {
                    let detail = match partner {
                        Some((_, _, pk)) => format!(
                            "terms[{pk}] (harmonic {partner_n}) is not the conjugate transpose of harmonic {n} (defect {defect:e})"
                        ),
                        None => format!("harmonic {n} has no Hermitian partner at {partner_n}"),
                    };
                    return Err(ConfigError::at(format!("system.terms[{k}]"), detail));
                }
            }
            let op = QPOperator::from_terms(dim, omega, parsed.into_iter().map(|(n, m, _)| (n, m)))
                .map_err(|e| ConfigError::at("system.terms", e.to_string()))?;
            Ok(SystemSpec::Matrix(op))
        }
    }
}

/// Parses and validates a JSON configuration.
pub fn parse_config(text: &[u8]) -> Result<RunConfig, ConfigError> {
    std::str::from_utf8(text).map_err(|e| ConfigError::at("<document>", format!("not valid UTF-8: {e}")))?;
    let mut de = serde_json::Deserializer::from_slice(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError { path, line: Some(inner.line()), message: inner.to_string() }
    })?;
    de.end()
        .map_err(|e| ConfigError { path: "<document>".into(), line: Some(e.line()), message: e.to_string() })?;

    let system = validate_system(raw.system)?;
    let omega = match &system {
        SystemSpec::Matrix(h) => h.omega().clone(),
        SystemSpec::Lambda(drive) => drive.omega().clone(),
    };

    let order = raw.order.unwrap_or(DEFAULT_ORDER);
    if order == 0 {
        return Err(ConfigError::at("order", "expansion order must be at least 1"));
    }
    let grid = raw
        .grid
        .map(|g| TimeGrid::new(g.t0, g.t1, g.steps).map_err(|e| ConfigError::at("grid", e.to_string())))
        .transpose()?;
    let resonance_threshold = match raw.resonance_threshold {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(ConfigError::at("resonance_threshold", "threshold must be finite and positive"))
        }
        Some(t) => t,
        None => omega.default_resonance_threshold(),
    };
    let steps_per_period = raw.steps_per_period.unwrap_or(DEFAULT_STEPS_PER_PERIOD);
    if steps_per_period == 0 {
        return Err(ConfigError::at("steps_per_period", "must be positive"));
    }
    let tolerance = raw.step_tolerance.unwrap_or(DEFAULT_STEP_TOLERANCE);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(ConfigError::at("step_tolerance", "must be finite and positive"));
    }
    let dim = system.hamiltonian().dim();
    let mut elements = Vec::new();
    for (k, [i, j]) in raw.elements.unwrap_or_default().into_iter().enumerate() {
        if i >= dim || j >= dim {
            return Err(ConfigError::at(format!("elements[{k}]"), format!("index out of range for dim = {dim}")));
        }
        elements.push((i, j));
    }

    Ok(RunConfig {
        task: raw.task,
        system,
        order,
        cutoff: raw.cutoff,
        grid,
        resonance_threshold,
        output: raw.output,
        elements,
        evolve: EvolveOptions { steps_per_period, tolerance: Some(tolerance) },
    })
}

/// Files produced by a run, keyed by their role.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    /// CSV or JSON document for the task.
    pub primary: String,
    /// Quasienergy list written next to the primary output by `sambe-compare`.
    pub quasienergies: Option<String>,
}

/// Failure of a run: either the configuration or the computation.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Compute(Error::Resonance(_)) => EXIT_RESONANCE,
            RunError::Compute(Error::Accuracy { .. }) => EXIT_ACCURACY,
            RunError::Compute(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Compute(e) => e.fmt(f),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Compute(e)
    }
}

type Entry = [f64; 2];

fn matrix_json(m: &CMatrix) -> Vec<Vec<Entry>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Serialize)]
struct OrderJson {
    order: usize,
    norm: f64,
    hq: Vec<Vec<Entry>>,
}

#[derive(Serialize)]
struct EffectiveHamiltonianJson {
    task: Task,
    dim: usize,
    omega: Vec<f64>,
    order: usize,
    resonance_threshold: f64,
    input_hash: String,
    orders: Vec<OrderJson>,
    effective_hamiltonian: Vec<Vec<Entry>>,
}

#[derive(Serialize)]
struct QuasienergyJson {
    dim: usize,
    omega: Vec<f64>,
    cutoff: u32,
    quasienergies: Vec<f64>,
}

fn require_grid(config: &RunConfig, task: Task) -> Result<TimeGrid, RunError> {
    config
        .grid
        .ok_or_else(|| RunError::Config(ConfigError::at("grid", format!("task {task} needs a time grid"))))
}

fn pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Executes `task` for an already validated configuration.
pub fn run(config: &RunConfig, task: Task) -> Result<Artifacts, RunError> {
    if let Some(declared) = config.task {
        if declared != task {
            return Err(RunError::Config(ConfigError::at(
                "task",
                format!("configuration declares task {declared} but {task} was requested"),
            )));
        }
    }
    let h = config.system.hamiltonian();
    match task {
        Task::EffectiveHamiltonian => {
            let series = expand(&h, config.order, config.resonance_threshold)?;
            let doc = EffectiveHamiltonianJson {
                task,
                dim: h.dim(),
                omega: h.omega().as_slice().to_vec(),
                order: config.order,
                resonance_threshold: config.resonance_threshold,
                input_hash: series.input_hash().to_string(),
                orders: series
                    .terms()
                    .iter()
                    .map(|t| OrderJson { order: t.order, norm: t.hq.norm(), hq: matrix_json(&t.hq) })
                    .collect(),
                effective_hamiltonian: matrix_json(&series.effective_hamiltonian(config.order)?),
            };
            Ok(Artifacts { primary: pretty_json(&doc), quasienergies: None })
        }
        Task::Evolve => {
            let grid = require_grid(config, task)?;
            let trace = evolve_exact_with(&h, &grid, &config.evolve)?;
            let dim = h.dim();
            let elements: Vec<(usize, usize)> = if config.elements.is_empty() {
                (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).collect()
            } else {
                config.elements.clone()
            };
            let mut header = vec!["t".to_string()];
            for (i, j) in &elements {
                header.push(format!("re_U_{i}_{j}"));
                header.push(format!("im_U_{i}_{j}"));
            }
            header.push("unitarity_residual".to_string());
            let mut table = CurveTable::new(header);
            for (t, u) in trace.times.iter().zip(&trace.unitaries) {
                let mut row = vec![*t];
                for (i, j) in &elements {
                    row.push(u[(*i, *j)].re);
                    row.push(u[(*i, *j)].im);
                }
                row.push(unitarity_residual(u));
                table.push_row(row)?;
            }
            Ok(Artifacts { primary: table.to_csv(), quasienergies: None })
        }
        Task::LambdaDemo => {
            let grid = require_grid(config, task)?;
            let drive = match &config.system {
                SystemSpec::Lambda(drive) => drive.clone(),
                SystemSpec::Matrix(_) => {
                    return Err(RunError::Config(ConfigError::at(
                        "system",
                        "lambda-demo needs `system.lambda_drive`",
                    )))
                }
            };
            if config.evolve.steps_per_period != DEFAULT_STEPS_PER_PERIOD
                || config.evolve.tolerance != Some(DEFAULT_STEP_TOLERANCE)
            {
                eprintln!("note: lambda-demo uses the default integrator settings");
            }
            let table = run_experiment(&LambdaExperiment::new(drive, grid))?;
            Ok(Artifacts { primary: table.to_csv(), quasienergies: None })
        }
        Task::SambeCompare => {
            let grid = require_grid(config, task)?;
            let cutoff = config
                .cutoff
                .ok_or_else(|| RunError::Config(ConfigError::at("cutoff", "sambe-compare needs a harmonic cutoff")))?;
            let k = build_extended(&h, cutoff)?;
            let spectrum = k.diagonalize()?;
            let trace = evolve_exact_with(&h, &grid, &config.evolve)?;
            let mut table = CurveTable::new(vec!["t".into(), "frobenius_error".into()]);
            for (t, u) in trace.times.iter().zip(&trace.unitaries) {
                table.push_row(vec![*t, (spectrum.propagator(*t) - u).norm()])?;
            }
            let q = QuasienergyJson {
                dim: h.dim(),
                omega: h.omega().as_slice().to_vec(),
                cutoff,
                quasienergies: spectrum.eigenvalues().to_vec(),
            };
            Ok(Artifacts { primary: table.to_csv(), quasienergies: Some(pretty_json(&q)) })
        }
    }
}

/// `out.csv` → `out.quasienergies.json`
pub fn quasienergy_path(primary: &Path) -> PathBuf {
    primary.with_extension("quasienergies.json")
}

fn primary_extension(task: Task) -> &'static str {
    match task {
        Task::EffectiveHamiltonian => "json",
        _ => "csv",
    }
}

/// First 16 hex digits of the SHA-256 of the configuration bytes.
pub fn config_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Parser)]
#[command(name = "qflq", version, about = "Effective Hamiltonians for quasi-periodically driven quantum systems")]
pub struct Cli {
    /// Task to run.
    pub task: Task,
    /// JSON run configuration.
    #[arg(long, required_unless_present = "sweep")]
    pub config: Option<PathBuf>,
    /// Output path (file for a single run, directory for --sweep). Defaults to
    /// the configuration's `output` key, then standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the expansion order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Override the harmonic cutoff.
    #[arg(long)]
    pub cutoff: Option<u32>,
    /// Run every `*.json` configuration in this directory; outputs are named
    /// by configuration hash. Parallelism is capped by `QFLQ_THREADS`.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
}

fn load(path: &Path, cli: &Cli) -> Result<RunConfig, RunError> {
    let bytes = fs::read(path).map_err(|e| {
        RunError::Config(ConfigError::at("<file>", format!("cannot read {}: {e}", path.display())))
    })?;
    let mut config = parse_config(&bytes).map_err(RunError::Config)?;
    if let Some(order) = cli.order {
        if order == 0 {
            return Err(RunError::Config(ConfigError::at("--order", "expansion order must be at least 1")));
        }
        config.order = order;
    }
    if cli.cutoff.is_some() {
        config.cutoff = cli.cutoff;
    }
    Ok(config)
}

fn write_artifacts(artifacts: &Artifacts, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, &artifacts.primary)?;
            if let Some(q) = &artifacts.quasienergies {
                fs::write(quasienergy_path(path), q)?;
            }
        }
        None => {
            print!("{}", artifacts.primary);
            if artifacts.quasienergies.is_some() {
                eprintln!("note: quasienergies are only written when an output path is given");
            }
        }
    }
    Ok(())
}

fn report(err: &RunError) -> i32 {
    eprintln!("{err}");
    err.exit_code()
}

fn run_single(cli: &Cli, path: &Path) -> i32 {
    let config = match load(path, cli) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    let artifacts = match run(&config, cli.task) {
        Ok(a) => a,
        Err(e) => return report(&e),
    };
    let out = cli.out.as_deref().or(config.output.as_deref());
    if let Err(e) = write_artifacts(&artifacts, out) {
        eprintln!("cannot write output: {e}");
        return EXIT_FAILURE;
    }
    EXIT_OK
}

/// Config hash and artifacts, or the failure.
type SweepOutcome = Result<(String, Artifacts), RunError>;

fn run_sweep(cli: &Cli, dir: &Path) -> i32 {
    let mut configs: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect(),
        Err(e) => {
            eprintln!("cannot read sweep directory {}: {e}", dir.display());
            return EXIT_FAILURE;
        }
    };
    configs.sort();
    let out_dir = cli.out.clone().unwrap_or_else(|| dir.to_path_buf());
    if let Err(e) = fs::create_dir_all(&out_dir) {
        eprintln!("cannot create {}: {e}", out_dir.display());
        return EXIT_FAILURE;
    }

    let threads = std::env::var("QFLQ_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };
    let results: Vec<(PathBuf, SweepOutcome)> = pool.install(|| {
        configs
            .par_iter()
            .map(|path| {
                let outcome = load(path, cli).and_then(|config| {
                    let bytes = fs::read(path).unwrap_or_default();
                    run(&config, cli.task).map(|a| (config_hash(&bytes), a))
                });
                (path.clone(), outcome)
            })
            .collect()
    });

    let mut code = EXIT_OK;
    for (path, outcome) in results {
        match outcome {
            Ok((hash, artifacts)) => {
                let target = out_dir.join(format!("{hash}.{}", primary_extension(cli.task)));
                if let Err(e) = write_artifacts(&artifacts, Some(&target)) {
                    eprintln!("{}: cannot write output: {e}", path.display());
                    code = code.max(EXIT_FAILURE);
                } else {
                    eprintln!("{} -> {}", path.display(), target.display());
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                if code == EXIT_OK {
                    code = e.exit_code();
                }
            }
        }
    }
    code
}

/// Entry point of the `qflq` binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match (&cli.sweep, &cli.config) {
        (Some(dir), _) => run_sweep(&cli, dir),
        (None, Some(path)) => run_single(&cli, path),
        (None, None) => unreachable!("clap enforces --config without --sweep"),
    }
}
