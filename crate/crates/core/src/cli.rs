//! Command line front end: problem files, command dispatch, output.
//!
//! Problem files are JSON. Coefficients are expression strings in `x`,
//! plain numbers, or `{"samples": [...]}` with one value per mesh node;
//! complex numbers are written as `[re, im]`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::expr::{Expr, ParseError};
use crate::grid::{GridFn, Mesh};
use crate::homogeneous::{particular_solution, ParticularOptions, ParticularSolution};
use crate::oracle::{integrate, DiracOde, GeneralOde, OracleOptions};
use crate::spectral::{sweep_spectrum, Affine, BoundaryConditions, Indexing, SpectrumResult, SweepOptions};
use crate::spps::{apply_gauge, write_solution_csv, SppsSolutionPair};
use crate::sturm::{sl_eigenvalues, sl_particular_solution, sl_to_dirac, RobinBc, SturmLiouvilleProblem};
use crate::system::{DiracSystem, GeneralLinearSystem, Mat2Fn, VectorFn};

pub const DEFAULT_MESH: usize = 2001;

/// Environment variable overriding the `seed` option of a problem file.
pub const SEED_VAR: &str = "SPPS_SEED";

/// A complex number written as `1.5` or `[1.5, -2]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Complex64 {
        match self {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue::Pair([z.re, z.im])
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Coefficient {
    Number(f64),
    Expr(String),
    Samples { samples: Vec<ComplexValue> },
}

impl Coefficient {
    fn zero() -> Self {
        Coefficient::Number(0.0)
    }

    fn one() -> Self {
        Coefficient::Number(1.0)
    }

    fn sampled(f: &GridFn) -> Self {
        Coefficient::Samples { samples: f.values().iter().map(|&z| z.into()).collect() }
    }

    fn sample_count(&self) -> Option<usize> {
        match self {
            Coefficient::Samples { samples } => Some(samples.len()),
            _ => None,
        }
    }

    fn to_grid(&self, mesh: Mesh, name: &str) -> Result<GridFn, CliError> {
        match self {
            Coefficient::Number(v) => Ok(GridFn::constant(mesh, Complex64::new(*v, 0.0))),
            Coefficient::Expr(src) => {
                let expr = Expr::parse(src).map_err(|e| CliError::Expression { field: name.to_string(), error: e })?;
                Ok(GridFn::try_sample(mesh, |x| expr.eval(x).map_err(Error::from))?)
            }
            Coefficient::Samples { samples } => {
                if samples.len() != mesh.len() {
                    return Err(CliError::Schema(format!(
                        "{name}: {} samples for a mesh of {} nodes",
                        samples.len(),
                        mesh.len()
                    )));
                }
                Ok(GridFn::from_values(mesh, samples.iter().map(|s| s.value()).collect())?)
            }
        }
    }
}

type MatrixSpec = [[Coefficient; 2]; 2];

fn identity_spec() -> MatrixSpec {
    [[Coefficient::one(), Coefficient::zero()], [Coefficient::zero(), Coefficient::one()]]
}

fn matrix_to_grid(m: &MatrixSpec, mesh: Mesh, name: &str) -> Result<Mat2Fn, CliError> {
    let entry = |i: usize, j: usize| m[i][j].to_grid(mesh, &format!("{name}[{i}][{j}]"));
    Ok(Mat2Fn::new(entry(0, 0)?, entry(0, 1)?, entry(1, 0)?, entry(1, 1)?)?)
}

/// One boundary coefficient: a constant or `constant + slope · λ`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum BcEntry {
    Constant(ComplexValue),
    Affine {
        #[serde(default = "zero_value")]
        constant: ComplexValue,
        #[serde(default = "zero_value")]
        slope: ComplexValue,
    },
}

fn zero_value() -> ComplexValue {
    ComplexValue::Real(0.0)
}

impl BcEntry {
    fn affine(self) -> Affine {
        match self {
            BcEntry::Constant(c) => Affine::constant(c.value()),
            BcEntry::Affine { constant, slope } => Affine { constant: constant.value(), slope: slope.value() },
        }
    }
}

impl From<Affine> for BcEntry {
    fn from(a: Affine) -> Self {
        if a.slope == Complex64::new(0.0, 0.0) {
            BcEntry::Constant(a.constant.into())
        } else {
            BcEntry::Affine { constant: a.constant.into(), slope: a.slope.into() }
        }
    }
}

/// `left = [a₁, a₂]`: `a₁ u(a) + a₂ v(a) = 0`; likewise on the right.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBoundary {
    pub left: [BcEntry; 2],
    pub right: [BcEntry; 2],
}

impl SystemBoundary {
    fn conditions(&self) -> Result<BoundaryConditions, CliError> {
        Ok(BoundaryConditions::affine(self.left.map(BcEntry::affine), self.right.map(BcEntry::affine))?)
    }
}

/// `α u + β u' = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RobinSpec {
    pub alpha: ComplexValue,
    pub beta: ComplexValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexingSpec {
    Symmetric,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Mesh nodes; rounded up to `m ≡ 1 (mod 5)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<usize>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indexing: Option<IndexingSpec>,
}

fn default_order() -> usize {
    100
}

fn default_candidates() -> usize {
    20
}

impl Default for Options {
    fn default() -> Self {
        Self {
            mesh: None,
            order: default_order(),
            seed: 0,
            candidates: default_candidates(),
            n_min: None,
            n_max: None,
            indexing: None,
        }
    }
}

/// Non-vanishing solution at `λ = 0`, stored by `convert-sl`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ParticularSpec {
    pub f: Coefficient,
    pub g: Coefficient,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DiracProblem {
    pub interval: [f64; 2],
    #[serde(default)]
    pub options: Options,
    #[serde(default = "Coefficient::zero")]
    pub p1: Coefficient,
    #[serde(default = "Coefficient::zero")]
    pub q: Coefficient,
    #[serde(default = "Coefficient::zero")]
    pub p2: Coefficient,
    #[serde(default = "identity_spec")]
    pub r: MatrixSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<SystemBoundary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub particular: Option<ParticularSpec>,
}

/// `𝒫 Y' + 𝒬 Y = λ ℛ Y`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralProblem {
    pub interval: [f64; 2],
    #[serde(default)]
    pub options: Options,
    #[serde(rename = "P")]
    pub p: MatrixSpec,
    #[serde(rename = "Q")]
    pub q: MatrixSpec,
    #[serde(rename = "R")]
    pub r: MatrixSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<SystemBoundary>,
}

/// `(p u')' + q u = ω² r u`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SlProblem {
    pub interval: [f64; 2],
    #[serde(default)]
    pub options: Options,
    pub p: Coefficient,
    pub q: Coefficient,
    pub r: Coefficient,
    pub left: RobinSpec,
    pub right: RobinSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProblemFile {
    Dirac(DiracProblem),
    General(GeneralProblem),
    SturmLiouville(SlProblem),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("{field}: {error}")]
    Expression { field: String, error: ParseError },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{}: {}", .0.name(), .0)]
    Numeric(#[from] Error),
    #[error("oracle check failed: deviation {deviation:e} exceeds {tolerance:e}")]
    OracleMismatch { deviation: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) | CliError::Expression { .. } | CliError::Io(_) => 2,
            CliError::Numeric(Error::Parse(_)) => 2,
            CliError::Numeric(_) | CliError::OracleMismatch { .. } => 3,
        }
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Schema(format!("problem file: {e}")))
}

impl ProblemFile {
    pub fn options(&self) -> &Options {
        match self {
            ProblemFile::Dirac(p) => &p.options,
            ProblemFile::General(p) => &p.options,
            ProblemFile::SturmLiouville(p) => &p.options,
        }
    }

    fn interval(&self) -> [f64; 2] {
        match self {
            ProblemFile::Dirac(p) => p.interval,
            ProblemFile::General(p) => p.interval,
            ProblemFile::SturmLiouville(p) => p.interval,
        }
    }

    fn sample_counts(&self) -> Vec<usize> {
        let mut all: Vec<&Coefficient> = Vec::new();
        match self {
            ProblemFile::Dirac(p) => {
                all.extend([&p.p1, &p.q, &p.p2]);
                all.extend(p.r.iter().flatten());
                if let Some(s) = &p.particular {
                    all.extend([&s.f, &s.g]);
                }
            }
            ProblemFile::General(p) => all.extend(p.p.iter().chain(&p.q).chain(&p.r).flatten()),
            ProblemFile::SturmLiouville(p) => all.extend([&p.p, &p.q, &p.r]),
        }
        all.into_iter().filter_map(Coefficient::sample_count).collect()
    }

    /// Mesh for this problem and, when the requested count was adjusted,
    /// the count originally asked for.
    pub fn mesh(&self) -> Result<(Mesh, Option<usize>), CliError> {
        let [a, b] = self.interval();
        let counts = self.sample_counts();
        if let Some(&m) = counts.first() {
            if counts.iter().any(|&c| c != m) || self.options().mesh.is_some_and(|r| r != m) {
                return Err(CliError::Schema("sampled coefficients disagree on the node count".into()));
            }
            return Ok((Mesh::new(a, b, m)?, None));
        }
        let requested = self.options().mesh.unwrap_or(DEFAULT_MESH);
        let m = Mesh::round_up_count(requested);
        Ok((Mesh::new(a, b, m)?, (m != requested).then_some(requested)))
    }

    /// The seed option, overridden by `SPPS_SEED` when set.
    pub fn seed(&self) -> Result<u64, CliError> {
        match std::env::var(SEED_VAR) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Schema(format!("{SEED_VAR}: not an unsigned integer: {v:?}"))),
            Err(_) => Ok(self.options().seed),
        }
    }
}

/// A problem in Dirac form with everything sampled.
pub struct LoadedSystem {
    pub system: DiracSystem,
    pub bc: Option<BoundaryConditions>,
    pub particular: Option<ParticularSolution>,
    /// Present for general systems, which are solved for `U = Y / w`.
    pub general: Option<(GeneralLinearSystem, crate::system::GaugeWeight)>,
}

pub fn load_system(problem: &ProblemFile, mesh: Mesh) -> Result<LoadedSystem, CliError> {
    match problem {
        ProblemFile::Dirac(p) => {
            let system = DiracSystem::new(
                p.p1.to_grid(mesh, "p1")?,
                p.q.to_grid(mesh, "q")?,
                p.p2.to_grid(mesh, "p2")?,
                matrix_to_grid(&p.r, mesh, "r")?,
            )?;
            let particular = match &p.particular {
                Some(s) => Some(ParticularSolution::new(s.f.to_grid(mesh, "particular.f")?, s.g.to_grid(mesh, "particular.g")?, 0)?),
                None => None,
            };
            let bc = p.boundary.as_ref().map(SystemBoundary::conditions).transpose()?;
            Ok(LoadedSystem { system, bc, particular, general: None })
        }
        ProblemFile::General(p) => {
            let general = GeneralLinearSystem {
                p: matrix_to_grid(&p.p, mesh, "P")?,
                q: matrix_to_grid(&p.q, mesh, "Q")?,
                r: matrix_to_grid(&p.r, mesh, "R")?,
            };
            let (system, gauge) = general.reduce()?;
            // w(a) = 1 and w(b) ≠ 0, so the conditions carry over to U unchanged
            let bc = p.boundary.as_ref().map(SystemBoundary::conditions).transpose()?;
            Ok(LoadedSystem { system, bc, particular: None, general: Some((general, gauge)) })
        }
        ProblemFile::SturmLiouville(_) => {
            Err(CliError::Schema("expected a dirac or general problem; use convert-sl first".into()))
        }
    }
}

pub fn load_sturm_liouville(p: &SlProblem, mesh: Mesh) -> Result<SturmLiouvilleProblem, CliError> {
    let robin = |s: RobinSpec| RobinBc { alpha: s.alpha.value(), beta: s.beta.value() };
    Ok(SturmLiouvilleProblem::new(
        p.p.to_grid(mesh, "p")?,
        p.q.to_grid(mesh, "q")?,
        p.r.to_grid(mesh, "r")?,
        robin(p.left),
        robin(p.right),
    )?)
}

fn particular_options(opts: &Options, seed: u64) -> ParticularOptions {
    ParticularOptions { seed, candidates: opts.candidates, max_order: opts.order, ..Default::default() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpRequest {
    pub lambda: Complex64,
    pub y_a: [Complex64; 2],
    pub oracle_check: bool,
}

#[derive(Debug, Clone)]
pub struct IvpReport {
    pub y: VectorFn,
    pub truncation_bound: f64,
    pub truncation_warning: bool,
    /// Maximum deviation from the RK4 oracle relative to `max(1, ‖Y‖)`.
    pub oracle_deviation: Option<f64>,
}

/// Largest oracle deviation accepted by `--oracle-check`.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

pub fn solve_ivp(problem: &ProblemFile, req: &IvpRequest) -> Result<IvpReport, CliError> {
    let (mesh, _) = problem.mesh()?;
    let loaded = load_system(problem, mesh)?;
    let opts = problem.options();
    let particular = match loaded.particular {
        Some(p) => p,
        None => particular_solution(&loaded.system.p_matrix(), &particular_options(opts, problem.seed()?))?,
    };
    let pair = SppsSolutionPair::new(&loaded.system, &particular, opts.order)?;
    let sol = pair.solve_ivp(req.lambda, req.y_a)?;
    let y = match &loaded.general {
        Some((_, gauge)) => apply_gauge(&sol.y, gauge),
        None => sol.y,
    };
    let oracle_deviation = if req.oracle_check {
        let oracle = match &loaded.general {
            Some((general, _)) => integrate(&GeneralOde { sys: general, lambda: req.lambda }, mesh, 0, req.y_a, &OracleOptions::default())?,
            None => integrate(&DiracOde { sys: &loaded.system, lambda: req.lambda }, mesh, 0, req.y_a, &OracleOptions::default())?,
        };
        Some(y.distance(&oracle.y) / y.abs_max().max(1.0))
    } else {
        None
    };
    Ok(IvpReport { y, truncation_bound: sol.truncation_bound, truncation_warning: sol.truncation_warning, oracle_deviation })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigsRequest {
    pub n_min: Option<i64>,
    pub n_max: Option<i64>,
    pub shift: bool,
}

pub fn eigs(problem: &ProblemFile, req: &EigsRequest) -> Result<SpectrumResult, CliError> {
    let (mesh, _) = problem.mesh()?;
    let opts = problem.options();
    let seed = problem.seed()?;
    let n_max = req.n_max.or(opts.n_max).unwrap_or(10);
    let sweep = |indexing: Indexing, initial: Option<ParticularSolution>| SweepOptions {
        order: opts.order,
        seed,
        candidates: opts.candidates,
        indexing,
        shift: req.shift,
        initial,
    };
    let positive = Indexing::PositiveHalf { threshold: 1e-6 };
    if let ProblemFile::SturmLiouville(p) = problem {
        let slp = load_sturm_liouville(p, mesh)?;
        return Ok(sl_eigenvalues(&slp, n_max, &sweep(positive, None))?);
    }
    let loaded = load_system(problem, mesh)?;
    let bc = loaded.bc.ok_or_else(|| CliError::Schema("eigs needs boundary conditions".into()))?;
    let indexing = match opts.indexing {
        Some(IndexingSpec::Positive) => positive,
        _ => Indexing::Symmetric,
    };
    let default_min = if matches!(indexing, Indexing::Symmetric) { -n_max } else { 0 };
    let n_min = req.n_min.or(opts.n_min).unwrap_or(default_min);
    if n_min > n_max {
        return Err(CliError::Schema(format!("empty index range [{n_min}, {n_max}]")));
    }
    Ok(sweep_spectrum(&loaded.system, &bc, n_min, n_max, &sweep(indexing, loaded.particular))?)
}

/// The equivalent Dirac problem in `ω` (`λ = ω²`) with sampled coefficients
/// and the seed `(u₀, 1/u₀)` used for the conversion.
pub fn convert_sl(problem: &ProblemFile) -> Result<ProblemFile, CliError> {
    let ProblemFile::SturmLiouville(p) = problem else {
        return Err(CliError::Schema("convert-sl expects a sturm-liouville problem".into()));
    };
    let (mesh, _) = problem.mesh()?;
    let slp = load_sturm_liouville(p, mesh)?;
    let seed = sl_particular_solution(&slp.p, &slp.q, &particular_options(&p.options, problem.seed()?))?;
    let form = sl_to_dirac(&slp, &seed)?;
    let r = &form.system.r;
    let options = Options { mesh: None, indexing: Some(IndexingSpec::Positive), n_min: None, ..p.options.clone() };
    Ok(ProblemFile::Dirac(DiracProblem {
        interval: p.interval,
        options,
        p1: Coefficient::zero(),
        q: Coefficient::sampled(&form.system.q),
        p2: Coefficient::zero(),
        r: [
            [Coefficient::sampled(&r.e11), Coefficient::zero()],
            [Coefficient::zero(), Coefficient::sampled(&r.e22)],
        ],
        boundary: Some(SystemBoundary {
            left: form.bc.left.map(BcEntry::from),
            right: form.bc.right.map(BcEntry::from),
        }),
        particular: Some(ParticularSpec { f: Coefficient::sampled(&form.seed.f), g: Coefficient::sampled(&form.seed.g) }),
    }))
}

#[derive(Debug, Parser)]
#[command(name = "dirac-spps", version, about = "Spectral parameter power series for one-dimensional Dirac systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the initial value problem Y(a) = (y1, y2) at one λ.
    SolveIvp {
        problem: PathBuf,
        /// RE[,IM]
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        y1: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        y2: Complex64,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare against a refined RK4 integration.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Eigenvalues with indices in [n-min, n-max].
    Eigs {
        problem: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        n_min: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n_max: Option<i64>,
        /// Report only the roots found around λ = 0.
        #[arg(long)]
        no_shift: bool,
        /// Destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format; inferred from the --out extension by default.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Rewrite a Sturm–Liouville problem as a Dirac problem in ω = √λ.
    ConvertSl {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

fn read_problem(path: &PathBuf) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    parse_problem(&text)
}

fn sink<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(stdout),
    })
}

fn report_mesh(problem: &ProblemFile, stderr: &mut dyn Write) -> Result<(), CliError> {
    if let (mesh, Some(requested)) = problem.mesh()? {
        writeln!(stderr, "note: mesh of {requested} nodes rounded up to {} (m ≡ 1 mod 5)", mesh.len())?;
    }
    Ok(())
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::SolveIvp { problem, lambda, y1, y2, out, oracle_check } => {
            let problem = read_problem(&problem)?;
            report_mesh(&problem, stderr)?;
            let report = solve_ivp(&problem, &IvpRequest { lambda, y_a: [y1, y2], oracle_check })?;
            writeln!(stderr, "truncation bound: {:.3e}", report.truncation_bound)?;
            if report.truncation_warning {
                writeln!(stderr, "warning: truncation bound is large relative to the solution; consider a larger order")?;
            }
            write_solution_csv(&report.y, sink(&out, stdout)?)?;
            if let Some(deviation) = report.oracle_deviation {
                writeln!(stderr, "oracle deviation: {deviation:.3e}")?;
                if deviation > ORACLE_TOLERANCE {
                    return Err(CliError::OracleMismatch { deviation, tolerance: ORACLE_TOLERANCE });
                }
            }
        }
        Command::Eigs { problem, n_min, n_max, no_shift, out, format } => {
            let problem = read_problem(&problem)?;
            report_mesh(&problem, stderr)?;
            let spectrum = eigs(&problem, &EigsRequest { n_min, n_max, shift: !no_shift })?;
            for w in &spectrum.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            let json = match format {
                Some(f) => f == Format::Json,
                None => out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json")),
            };
            let mut w = sink(&out, stdout)?;
            if json {
                writeln!(w, "{}", spectrum.to_json())?;
            } else {
                spectrum.write_csv(&mut w)?;
            }
            w.flush()?;
        }
        Command::ConvertSl { problem, out } => {
            let problem = read_problem(&problem)?;
            report_mesh(&problem, stderr)?;
            let converted = convert_sl(&problem)?;
            let mut w = sink(&out, stdout)?;
            serde_json::to_writer(&mut w, &converted).map_err(|e| CliError::Io(e.into()))?;
            writeln!(w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
