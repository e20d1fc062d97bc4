//! Config-driven runs: a TOML run description in, a JSON result document
//! and an optional SVG out.
//!
//! ```toml
//! radius = 0.5235987755982988
//! seed = 7
//!
//! [field]
//! even = true
//! terms = [[2, 0, 0.8], [2, 1, -0.3], [4, -3, 0.2]]
//!
//! [solver]
//! grid_density = 16
//! ```
//!
//! Exit codes: 0 when the run produced a mathematical answer (including a
//! degenerate family or a genericity failure, which are reported in the
//! document), 1 for unusable input, 2 when a solver could not deliver what
//! the theory guarantees.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Representative};
use crate::fixtures;
use crate::harmonics::{HarmonicTerm, ScalarField, DEFAULT_MAX_DEGREE};
use crate::peg::{self, ContinuationTrace, FoldEvent, ParityReport, SolveConfig};
use crate::radial::RadialFunction;
use crate::square::{QuadParam, SquareSolution};
use crate::svg;
use crate::table::{self, BranchJump, FiberParityReport, TableSolution};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default number of nominal continuation steps.
pub const DEFAULT_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// All graceful squares of a curve.
    PegFind,
    /// Count and parity of graceful squares.
    PegParity,
    /// Track the ellipse's square to the target curve.
    PegContinue,
    /// Tables by Newton on the value differences.
    TableFind,
    /// Tables from fiber squares with zero center.
    TableCenter,
    /// Fiber-curve parity over a sphere grid.
    FiberParity,
}

impl Command {
    pub fn needs_curve(self) -> bool {
        matches!(self, Self::PegFind | Self::PegParity | Self::PegContinue)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::PegFind => "peg-find",
            Self::PegParity => "peg-parity",
            Self::PegContinue => "peg-continue",
            Self::TableFind => "table-find",
            Self::TableCenter => "table-center",
            Self::FiberParity => "fiber-parity",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvePreset {
    /// Fourier fit of the ellipse `v₁² + 2v₂² = 1`.
    Ellipse,
    Circle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCurve {
    pub degree: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_min_radius")]
    pub min_radius: f64,
}

fn default_rho() -> f64 {
    0.3
}

fn default_min_radius() -> f64 {
    0.2
}

/// Exactly one of `preset`, explicit coefficients or `random`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<CurvePreset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cos: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sin: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomField {
    pub max_degree: u32,
}

/// Either explicit `(ℓ, m, coefficient)` triples or a seeded random field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    #[serde(default)]
    pub even: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<(u32, i32, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomField>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n_lat: usize,
    pub n_lon: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { n_lat: 12, n_lon: 24 }
    }
}

/// Contents of a run config file. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the command given on the command line when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub solver: SolveConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, InputError> {
        toml::from_str(text).map_err(|e| InputError(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| InputError(format!("{}: {}", path.display(), e.0)))
    }
}

/// Input that cannot be run; maps to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input(msg: impl Into<String>) -> InputError {
    InputError(msg.into())
}

/// Resolves the curve block to a radial function.
pub fn build_curve(spec: &CurveSpec, seed: u64) -> Result<RadialFunction, InputError> {
    let explicit = spec.cos.is_some() || spec.sin.is_some();
    let chosen = [spec.preset.is_some(), explicit, spec.random.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if chosen != 1 {
        return Err(input("curve block needs exactly one of `preset`, `cos`/`sin` or `random`"));
    }
    if let Some(preset) = spec.preset {
        return Ok(match preset {
            CurvePreset::Ellipse => fixtures::ellipse_radial(),
            CurvePreset::Circle => RadialFunction::constant(1.0),
        });
    }
    if let Some(r) = &spec.random {
        if r.degree == 0 || !(r.rho > 0.0) || !(r.min_radius > 0.0) || r.min_radius >= 1.0 {
            return Err(input("random curve needs degree ≥ 1, rho > 0 and 0 < min_radius < 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return RadialFunction::random_generic(&mut rng, r.degree, r.rho, r.min_radius)
            .map_err(|e| input(e.to_string()));
    }
    let cos = spec.cos.clone().unwrap_or_default();
    let sin = spec.sin.clone().unwrap_or_default();
    if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
        return Err(input("curve coefficients must be finite"));
    }
    if cos.len().max(sin.len()) > crate::radial::DEFAULT_DEGREE_CAP + 1 {
        return Err(input(format!(
            "curve degree above cap {}",
            crate::radial::DEFAULT_DEGREE_CAP
        )));
    }
    Ok(RadialFunction::new(cos, sin))
}

/// Resolves the field block to a harmonic field.
pub fn build_field(spec: &FieldSpec, seed: u64) -> Result<ScalarField, InputError> {
    match (&spec.terms, &spec.random) {
        (Some(terms), None) => {
            let terms = terms.iter().map(|&(l, m, c)| HarmonicTerm::new(l, m, c)).collect();
            ScalarField::new(terms, spec.even).map_err(|e| input(e.to_string()))
        }
        (None, Some(r)) => {
            if r.max_degree == 0 || r.max_degree > DEFAULT_MAX_DEGREE {
                return Err(input(format!("random field degree must be in 1..={DEFAULT_MAX_DEGREE}")));
            }
            Ok(fixtures::random_field(seed, r.max_degree, spec.even))
        }
        _ => Err(input("field block needs exactly one of `terms` or `random`")),
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Solutions {
    None,
    Squares { squares: Vec<SquareSolution> },
    Parity { report: ParityReport, squares: Vec<SquareSolution> },
    Trace { trace: ContinuationTrace },
    Tables { tables: Vec<TableSolution> },
    Sweep { report: FiberParityReport },
}

/// Notable things that happened during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Event {
    Fold(FoldEvent),
    BranchJump(BranchJump),
    DegenerateFamily {
        roots: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        square: Option<QuadParam>,
        #[serde(skip_serializing_if = "Option::is_none")]
        table: Option<TableSolution>,
    },
    GenericityFailure { sigma_min: f64 },
    Failure { message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    DegenerateFamily,
    GenericityFailure,
    InputError,
    SolverFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Ok | Self::DegenerateFamily | Self::GenericityFailure => 0,
            Self::InputError => 1,
            Self::SolverFailure => 2,
        }
    }
}

/// Everything a run reports. Contains no timing data, so identical inputs
/// give byte-identical documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub config: RunConfig,
    pub status: Status,
    /// Resolved curve for the peg commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<RadialFunction>,
    pub solutions: Solutions,
    pub events: Vec<Event>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// Command-line surface shared by the binary and the tests.
#[derive(Debug, Clone, clap::Parser)]
#[command(name = "squarepeg", version, about = "Graceful squares in star-shaped curves and tables on the sphere")]
pub struct Cli {
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Result document path; overrides `out` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG path; overrides `svg` in the config.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Seed for random curves and fields; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Loads the config, runs the command, writes the outputs and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run(cli: &Cli) -> i32 {
    let config = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let doc = execute(cli.command, &config, cli.seed);
    let out = cli.out.clone().or_else(|| config.out.clone());
    let svg_path = cli.svg.clone().or_else(|| config.svg.clone());
    let json = doc.to_json();
    match &out {
        Some(path) => {
            if let Err(e) = fs::write(path, &json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => print!("{json}"),
    }
    if let Some(path) = svg_path {
        if let Err(e) = svg::emit_svg(&doc, &path) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    for event in &doc.events {
        if let Event::Failure { message } = event {
            eprintln!("error: {message}");
        }
    }
    doc.exit_code()
}

/// Runs one command on a parsed config. `seed` overrides the config seed.
pub fn execute(command: Command, config: &RunConfig, seed: Option<u64>) -> ResultDocument {
    let seed = seed.or(config.seed).unwrap_or(0);
    let mut doc = ResultDocument {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        command,
        seed,
        config: config.clone(),
        status: Status::Ok,
        curve: None,
        solutions: Solutions::None,
        events: Vec::new(),
    };
    if let Err(e) = dispatch(command, config, seed, &mut doc) {
        doc.status = Status::InputError;
        doc.events.push(Event::Failure { message: e.0 });
    }
    doc
}

fn dispatch(command: Command, config: &RunConfig, seed: u64, doc: &mut ResultDocument) -> Result<(), InputError> {
    if let Some(c) = config.command {
        if c != command {
            return Err(input(format!("config is for `{c}` but `{command}` was requested")));
        }
    }
    validate_solver(&config.solver)?;
    if command.needs_curve() {
        if config.field.is_some() {
            return Err(input(format!("`{command}` takes a curve block, not a field block")));
        }
        let spec = config.curve.as_ref().ok_or_else(|| input(format!("`{command}` needs a curve block")))?;
        let h = build_curve(spec, seed)?;
        doc.curve = Some(h.clone());
        run_peg(command, &h, config, doc);
    } else {
        if config.curve.is_some() {
            return Err(input(format!("`{command}` takes a field block, not a curve block")));
        }
        let spec = config.field.as_ref().ok_or_else(|| input(format!("`{command}` needs a field block")))?;
        let f = build_field(spec, seed)?;
        let a = config.radius.ok_or_else(|| input(format!("`{command}` needs `radius`")))?;
        run_table(command, &f, a, config, doc);
    }
    Ok(())
}

fn validate_solver(cfg: &SolveConfig) -> Result<(), InputError> {
    let positive = cfg.grid_density > 0
        && cfg.simplex_density > 0
        && cfg.newton_max_iter > 0
        && cfg.newton_tol > 0.0
        && cfg.dedupe_tol > 0.0
        && cfg.genericity_floor > 0.0;
    if positive {
        Ok(())
    } else {
        Err(input("solver settings must all be positive"))
    }
}

fn run_peg(command: Command, h: &RadialFunction, config: &RunConfig, doc: &mut ResultDocument) {
    let cfg = &config.solver;
    let outcome = match command {
        Command::PegFind => peg::find_graceful_squares(h, cfg).map(|squares| Solutions::Squares { squares }),
        Command::PegParity => {
            peg::parity_with_squares(h, cfg).map(|(report, squares)| Solutions::Parity { report, squares })
        }
        Command::PegContinue => {
            let steps = config.steps.unwrap_or(DEFAULT_STEPS);
            peg::continue_from_ellipse(h, cfg, steps).map(|trace| {
                doc.events.extend(trace.folds.iter().cloned().map(Event::Fold));
                Solutions::Trace { trace }
            })
        }
        _ => unreachable!("table commands are dispatched separately"),
    };
    record(outcome, doc);
}

fn run_table(command: Command, f: &ScalarField, a: f64, config: &RunConfig, doc: &mut ResultDocument) {
    let cfg = &config.solver;
    let outcome = match command {
        Command::TableFind => table::find_tables_direct(f, a, cfg).map(|tables| Solutions::Tables { tables }),
        Command::TableCenter => table::find_tables_via_center(f, a, cfg).map(|search| {
            doc.events.extend(search.branch_jumps.into_iter().map(Event::BranchJump));
            Solutions::Tables { tables: search.tables }
        }),
        Command::FiberParity => {
            let sweep = config.sweep.clone().unwrap_or_default();
            table::fiber_parity_sweep(f, a, sweep.n_lat, sweep.n_lon, cfg).map(|report| Solutions::Sweep { report })
        }
        _ => unreachable!("peg commands are dispatched separately"),
    };
    record(outcome, doc);
}

fn record(outcome: crate::Result<Solutions>, doc: &mut ResultDocument) {
    match outcome {
        Ok(solutions) => doc.solutions = solutions,
        Err(Error::DegenerateFamily { roots, representative }) => {
            doc.status = Status::DegenerateFamily;
            let (square, table) = match *representative {
                Representative::Square(p) => (Some(p), None),
                Representative::Table(t) => (None, Some(t)),
            };
            doc.events.push(Event::DegenerateFamily { roots, square, table });
        }
        Err(Error::GenericityFailure { sigma_min }) => {
            doc.status = Status::GenericityFailure;
            doc.events.push(Event::GenericityFailure { sigma_min });
        }
        Err(e) => {
            doc.status = if is_input_error(&e) { Status::InputError } else { Status::SolverFailure };
            doc.events.push(Event::Failure { message: e.to_string() });
        }
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::NotPositive { .. }
            | Error::InvalidParam(_)
            | Error::InvalidHarmonic(_)
            | Error::RadiusOutOfRange(_)
            | Error::InjectivityRadiusExceeded { .. }
            | Error::EvennessRequired
            | Error::PositivityLost { .. }
            | Error::Degenerate(_)
    )
}
