//! The `omega-index` command line.
//!
//! [`run`] parses arguments, dispatches, and returns the exit code together
//! with whatever should reach stdout and stderr. Exit codes: 0 on success,
//! 1 on usage, configuration or I/O errors, 2 on admissibility and stability
//! failures (with a JSON error object on stdout).

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{run_suite, SuiteReport};
use crate::calibration::{calibrate, render_pinned, CalibrationParams, PINNED_CUTS, PINNED_DIM, PINNED_LAMBDA};
use crate::error::{OmegaError, Result};
use crate::index::{
    build_q, default_cuts, omega_from_q, scale_admissible, spectral_report, OmegaResult, Orientation,
    DEFAULT_GAP_FLOOR, DEFAULT_TARGET_COMMUTATOR,
};
use crate::operators::{sphere_map, OperatorPair, PairSpec, Perturbation, PerturbationKind, Target};
use crate::report::{
    spectrum_csv, ErrorDoc, OmegaReportDoc, SphereDoc, SweepDoc, SweepPoint, BOUNDS_SCHEMA, SPHERE_SCHEMA,
};

pub const THREADS_ENV: &str = "OMEGA_INDEX_THREADS";

#[derive(Parser, Debug)]
#[command(name = "omega-index", version, about = "Index of almost-commuting selfadjoint pairs")]
struct Cli {
    /// Worker threads; overrides OMEGA_INDEX_THREADS. 0 means all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the index across a set of cuts.
    Omega {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        index: IndexArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the randomized inequality suites.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 24)]
        max_dim: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Dump the corner spectrum at one cut.
    Spectrum {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        index: IndexArgs,
        /// Cut size; defaults to the first default cut.
        #[arg(long)]
        cut: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Recompute the index along one parameter axis.
    Sweep {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        index: IndexArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        /// `a:b:step` or a comma list.
        #[arg(long)]
        values: String,
        /// Operator the swept perturbation acts on.
        #[arg(long, default_value = "a")]
        sweep_target: String,
        /// Kind of the swept perturbation.
        #[arg(long, default_value = "scalar_shift")]
        sweep_kind: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Defects of the sphere map of the pair.
    Sphere {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Decide the default orientation from the oscillator.
    Calibrate {
        #[arg(long, default_value_t = PINNED_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = PINNED_DIM)]
        dim: usize,
        #[arg(long)]
        cuts: Option<String>,
        /// Write the generated constants module here.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct PairArgs {
    #[arg(long, value_enum, default_value_t = PairKind::Harmonic)]
    pair: PairKind,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 400)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    grid_radius: usize,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(long)]
    a_path: Option<String>,
    #[arg(long)]
    b_path: Option<String>,
    #[arg(long)]
    boundary_window: Option<usize>,
    /// `target:kind:magnitude[:seed]`, repeatable, applied in order.
    #[arg(long)]
    perturb: Vec<String>,
}

#[derive(Args, Debug)]
struct IndexArgs {
    /// `a:b:step` or a comma list; defaults derive from the dimension.
    #[arg(long)]
    cuts: Option<String>,
    #[arg(long, default_value = "default")]
    orientation: String,
    #[arg(long, default_value_t = DEFAULT_GAP_FLOOR)]
    gap_floor: f64,
    /// Rescale the pair first so that its commutator is at most the target.
    #[arg(long)]
    scale_admissible: bool,
    #[arg(long, default_value_t = DEFAULT_TARGET_COMMUTATOR)]
    target_commutator: f64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PairKind {
    Harmonic,
    Commuting,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Axis {
    Lambda,
    Cut,
    Perturbation,
}

impl Axis {
    fn as_str(self) -> &'static str {
        match self {
            Axis::Lambda => "lambda",
            Axis::Cut => "cut",
            Axis::Perturbation => "perturbation",
        }
    }
}

/// What a command produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }

    fn from_error(e: &OmegaError) -> Self {
        if e.is_domain() {
            Self { code: 2, stdout: to_json(&ErrorDoc::from(e)), stderr: format!("error: {e}\n") }
        } else {
            Self { code: 1, stdout: String::new(), stderr: format!("error: {e}\n") }
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 1, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let threads = match resolve_threads(cli.threads, std::env::var(THREADS_ENV).ok().as_deref()) {
        Ok(n) => n,
        Err(e) => return Outcome::from_error(&e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => return Outcome::from_error(&OmegaError::InvalidParameter(e.to_string())),
    };
    pool.install(|| dispatch(cli.command, cli.seed))
}

/// Flag wins over the environment; 0 lets the pool pick the core count.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<usize> {
    match (flag, env) {
        (Some(n), _) => Ok(n),
        (None, Some(v)) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| OmegaError::ConfigParse(format!("{THREADS_ENV} must be a count, got {v:?}"))),
        _ => Ok(0),
    }
}

fn dispatch(command: Command, seed: u64) -> Outcome {
    let result = match command {
        Command::Omega { pair, index, out } => cmd_omega(&pair, &index, &out, seed),
        Command::Verify { trials, max_dim, out } => cmd_verify(trials, max_dim, &out, seed),
        Command::Spectrum { pair, index, cut, out } => cmd_spectrum(&pair, &index, cut, &out, seed),
        Command::Sweep { pair, index, axis, values, sweep_target, sweep_kind, out } => {
            cmd_sweep(&pair, &index, axis, &values, &sweep_target, &sweep_kind, &out, seed)
        }
        Command::Sphere { pair, out } => cmd_sphere(&pair, &out, seed),
        Command::Calibrate { lambda, dim, cuts, write } => cmd_calibrate(lambda, dim, cuts.as_deref(), write),
    };
    result.unwrap_or_else(|e| Outcome::from_error(&e))
}

fn emit(out: &OutputArgs, body: String, code: i32) -> Result<Outcome> {
    match &out.output {
        Some(path) => {
            std::fs::write(path, &body)?;
            Ok(Outcome { code, stdout: String::new(), stderr: String::new() })
        }
        None => Ok(Outcome { code, stdout: body, stderr: String::new() }),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn unsupported(format: Format, command: &str) -> OmegaError {
    OmegaError::ConfigParse(format!("{command} does not support --format {format:?}").to_lowercase())
}

/// `a:b:step` (inclusive) or `x,y,z`.
pub fn parse_cuts(spec: &str) -> Result<Vec<usize>> {
    let bad = || OmegaError::ConfigParse(format!("bad cut spec {spec:?}"));
    let spec = spec.trim();
    let cuts: Vec<usize> = if spec.contains(':') {
        let parts: Vec<usize> = spec
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [a, b, step] = parts[..] else { return Err(bad()) };
        if step == 0 {
            return Err(bad());
        }
        (a..=b).step_by(step).collect()
    } else if spec.is_empty() {
        Vec::new()
    } else {
        spec.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if cuts.is_empty() {
        return Err(OmegaError::ConfigParse(format!("cut spec {spec:?} is empty")));
    }
    Ok(cuts)
}

/// `a:b:step` (inclusive, counted rather than accumulated) or `x,y,z`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = || OmegaError::ConfigParse(format!("bad value spec {spec:?}"));
    let spec = spec.trim();
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [a, b, step] = parts[..] else { return Err(bad()) };
        if !(step > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(bad());
        }
        if b < a {
            Vec::new()
        } else {
            let n = ((b - a) / step + 1e-9).floor() as usize;
            (0..=n).map(|k| a + step * k as f64).collect()
        }
    } else if spec.is_empty() {
        Vec::new()
    } else {
        spec.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(OmegaError::ConfigParse(format!("value spec {spec:?} is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

fn parse_target(s: &str) -> Result<Target> {
    match s.to_ascii_lowercase().as_str() {
        "a" => Ok(Target::A),
        "b" => Ok(Target::B),
        _ => Err(OmegaError::ConfigParse(format!("perturbation target must be a or b, got {s:?}"))),
    }
}

fn parse_kind(s: &str) -> Result<PerturbationKind> {
    match s {
        "scalar_shift" => Ok(PerturbationKind::ScalarShift),
        "diagonal_decay" => Ok(PerturbationKind::DiagonalDecay),
        "random_hermitian" => Ok(PerturbationKind::RandomHermitian),
        _ => Err(OmegaError::ConfigParse(format!("unknown perturbation kind {s:?}"))),
    }
}

/// `target:kind:magnitude[:seed]`; the seed defaults to `--seed`.
pub fn parse_perturbation(spec: &str, default_seed: u64) -> Result<Perturbation> {
    let bad = || OmegaError::ConfigParse(format!("bad perturbation {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let magnitude: f64 = parts[2].trim().parse().map_err(|_| bad())?;
    if !magnitude.is_finite() {
        return Err(bad());
    }
    let seed = match parts.get(3) {
        Some(s) => s.trim().parse().map_err(|_| bad())?,
        None => default_seed,
    };
    Ok(Perturbation { target: parse_target(parts[0])?, kind: parse_kind(parts[1])?, magnitude, seed })
}

impl PairArgs {
    fn spec(&self) -> Result<PairSpec> {
        Ok(match self.pair {
            PairKind::Harmonic => PairSpec::Harmonic { lambda: self.lambda, dim: self.dim },
            PairKind::Commuting => PairSpec::CommutingGrid { radius: self.grid_radius, scale: self.scale },
            PairKind::File => {
                let missing = |flag| OmegaError::ConfigParse(format!("--pair file needs {flag}"));
                PairSpec::File {
                    path_a: self.a_path.clone().ok_or_else(|| missing("--a-path"))?,
                    path_b: self.b_path.clone().ok_or_else(|| missing("--b-path"))?,
                    boundary_window: self.boundary_window,
                }
            }
        })
    }

    fn perturbations(&self, seed: u64) -> Result<Vec<Perturbation>> {
        self.perturb.iter().map(|p| parse_perturbation(p, seed)).collect()
    }

    fn build(&self, seed: u64) -> Result<OperatorPair> {
        self.spec()?.build_perturbed(&self.perturbations(seed)?)
    }
}

impl IndexArgs {
    fn orientation(&self) -> Result<Orientation> {
        self.orientation.parse()
    }

    fn cuts_for(&self, pair: &OperatorPair) -> Result<Vec<usize>> {
        match &self.cuts {
            Some(spec) => parse_cuts(spec),
            None => Ok(default_cuts(pair.dim())),
        }
    }
}

/// Optional rescaling, then the index. Scale factors land in the result.
fn compute(pair: &OperatorPair, index: &IndexArgs, cuts: &[usize]) -> Result<OmegaResult> {
    let orientation = index.orientation()?;
    let (pair, lambda_a, mu_b) = if index.scale_admissible {
        let scaled = scale_admissible(pair, index.target_commutator)?;
        (scaled.pair, scaled.lambda_a, scaled.mu_b)
    } else {
        (pair.clone(), 1.0, 1.0)
    };
    let qb = build_q(&pair, orientation)?;
    let mut result = omega_from_q(&qb, cuts, index.gap_floor)?;
    result.lambda_a = lambda_a;
    result.mu_b = mu_b;
    Ok(result)
}

fn omega_text(doc: &OmegaReportDoc) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "omega = {}", doc.omega);
    let _ = writeln!(s, "orientation = {}", doc.orientation);
    let _ = writeln!(s, "epsilon = {:?}", doc.epsilon);
    let _ = writeln!(s, "defect = {:?}", doc.defect);
    let _ = writeln!(s, "theorem_bound = {:?}", doc.theorem_bound);
    let _ = writeln!(s, "scaling = ({:?}, {:?})", doc.scaling.lambda_a, doc.scaling.mu_b);
    for c in &doc.cuts {
        let _ = writeln!(s, "N = {}: M_N = {}, gap = {:?}", c.n, c.m_n, c.gap);
    }
    for w in &doc.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

fn cmd_omega(pair: &PairArgs, index: &IndexArgs, out: &OutputArgs, seed: u64) -> Result<Outcome> {
    let built = pair.build(seed)?;
    let cuts = index.cuts_for(&built)?;
    let doc = OmegaReportDoc::from_result(&compute(&built, index, &cuts)?);
    let body = match out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&doc),
        Format::Text => omega_text(&doc),
        Format::Csv => {
            let mut s = String::from("n,m_n,gap\n");
            for c in &doc.cuts {
                let _ = writeln!(s, "{},{},{:?}", c.n, c.m_n, c.gap);
            }
            s
        }
    };
    emit(out, body, 0)
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    schema_version: &'static str,
    #[serde(flatten)]
    report: &'a SuiteReport,
}

fn cmd_verify(trials: usize, max_dim: usize, out: &OutputArgs, seed: u64) -> Result<Outcome> {
    if trials == 0 || max_dim == 0 {
        return Err(OmegaError::ConfigParse("--trials and --max-dim must be positive".into()));
    }
    let report = run_suite(seed, trials, max_dim)?;
    let body = match out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&VerifyDoc { schema_version: BOUNDS_SCHEMA, report: &report }),
        Format::Text => {
            let mut s = String::new();
            for r in &report.results {
                let _ = writeln!(
                    s,
                    "{}: {} ({} trials, {} violations, max lhs {:?}, min slack {:?})",
                    r.name,
                    if r.passed() { "pass" } else { "FAIL" },
                    r.trials,
                    r.violations,
                    r.max_lhs,
                    r.min_slack
                );
            }
            s
        }
        f => return Err(unsupported(f, "verify")),
    };
    emit(out, body, if report.passed { 0 } else { 2 })
}

#[derive(Serialize)]
struct SpectrumDoc {
    cut: usize,
    orientation: Orientation,
    m_n: usize,
    gap: f64,
    eigenvalues: Vec<f64>,
}

fn cmd_spectrum(
    pair: &PairArgs,
    index: &IndexArgs,
    cut: Option<usize>,
    out: &OutputArgs,
    seed: u64,
) -> Result<Outcome> {
    let built = pair.build(seed)?;
    let cut = match cut {
        Some(c) => c,
        None => index.cuts_for(&built)?[0],
    };
    let built = if index.scale_admissible {
        scale_admissible(&built, index.target_commutator)?.pair
    } else {
        built
    };
    let qb = build_q(&built, index.orientation()?)?;
    if cut > qb.interior() {
        return Err(OmegaError::CutTooLarge { cut, limit: qb.interior() });
    }
    let report = spectral_report(&qb, cut)?;
    let body = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => spectrum_csv(&report.eigenvalues),
        Format::Json => to_json(&SpectrumDoc {
            cut,
            orientation: qb.orientation,
            m_n: report.m_n,
            gap: report.gap,
            eigenvalues: report.eigenvalues,
        }),
        Format::Text => report.eigenvalues.iter().map(|v| format!("{v:?}\n")).collect(),
    };
    emit(out, body, 0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    pair: &PairArgs,
    index: &IndexArgs,
    axis: Axis,
    values: &str,
    sweep_target: &str,
    sweep_kind: &str,
    out: &OutputArgs,
    seed: u64,
) -> Result<Outcome> {
    let base_perturbations = pair.perturbations(seed)?;
    let point = |value: f64, result: Result<OmegaResult>| match result {
        Ok(r) => SweepPoint { value, report: Some(OmegaReportDoc::from_result(&r)), error: None },
        Err(e) => SweepPoint { value, report: None, error: Some(ErrorDoc::from(&e)) },
    };

    let points: Vec<SweepPoint> = match axis {
        Axis::Lambda => {
            if pair.pair != PairKind::Harmonic {
                return Err(OmegaError::ConfigParse("a lambda sweep needs --pair harmonic".into()));
            }
            let lambdas = parse_values(values)?;
            lambdas
                .par_iter()
                .map(|&lambda| {
                    let spec = PairSpec::Harmonic { lambda, dim: pair.dim };
                    let result = spec.build_perturbed(&base_perturbations).and_then(|p| {
                        let cuts = index.cuts_for(&p)?;
                        compute(&p, index, &cuts)
                    });
                    point(lambda, result)
                })
                .collect()
        }
        Axis::Cut => {
            let cuts = parse_cuts(values)?;
            let built = pair.build(seed)?;
            let built = if index.scale_admissible {
                scale_admissible(&built, index.target_commutator)?
            } else {
                crate::index::ScaledPair { pair: built, lambda_a: 1.0, mu_b: 1.0, kappa: f64::NAN }
            };
            let qb = build_q(&built.pair, index.orientation()?)?;
            cuts.par_iter()
                .map(|&cut| {
                    let result = omega_from_q(&qb, &[cut], index.gap_floor).map(|mut r| {
                        r.lambda_a = built.lambda_a;
                        r.mu_b = built.mu_b;
                        r
                    });
                    point(cut as f64, result)
                })
                .collect()
        }
        Axis::Perturbation => {
            let magnitudes = parse_values(values)?;
            let target = parse_target(sweep_target)?;
            let kind = parse_kind(sweep_kind)?;
            let spec = pair.spec()?;
            magnitudes
                .par_iter()
                .map(|&magnitude| {
                    let mut perturbations = base_perturbations.clone();
                    perturbations.push(Perturbation { target, kind, magnitude, seed });
                    let result = spec.build_perturbed(&perturbations).and_then(|p| {
                        let cuts = index.cuts_for(&p)?;
                        compute(&p, index, &cuts)
                    });
                    point(magnitude, result)
                })
                .collect()
        }
    };

    let doc = SweepDoc::new(axis.as_str(), points);
    let body = match out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&doc),
        Format::Csv => {
            let mut s = String::from("value,omega,error\n");
            for p in &doc.points {
                let omega = p.report.as_ref().map(|r| r.omega.to_string()).unwrap_or_default();
                let error = p.error.as_ref().map(|e| e.error.clone()).unwrap_or_default();
                let _ = writeln!(s, "{:?},{omega},{error}", p.value);
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for p in &doc.points {
                match (&p.report, &p.error) {
                    (Some(r), _) => {
                        let _ = writeln!(s, "{:?}: omega = {}", p.value, r.omega);
                    }
                    (_, Some(e)) => {
                        let _ = writeln!(s, "{:?}: {} ({})", p.value, e.error, e.message);
                    }
                    _ => {}
                }
            }
            let _ = writeln!(s, "omega constant: {}", doc.omega_constant);
            s
        }
    };
    emit(out, body, 0)
}

fn cmd_sphere(pair: &PairArgs, out: &OutputArgs, seed: u64) -> Result<Outcome> {
    let built = pair.build(seed)?;
    let map = sphere_map(&built)?;
    let doc = SphereDoc {
        schema_version: SPHERE_SCHEMA.to_string(),
        dim: built.dim(),
        relation_defect: map.relation_defect,
        nonhermitian_defect: map.nonhermitian_defect,
    };
    let body = match out.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&doc),
        Format::Text => format!(
            "relation_defect = {:?}\nnonhermitian_defect = {:?}\n",
            doc.relation_defect, doc.nonhermitian_defect
        ),
        f => return Err(unsupported(f, "sphere")),
    };
    emit(out, body, 0)
}

fn cmd_calibrate(lambda: f64, dim: usize, cuts: Option<&str>, write: Option<PathBuf>) -> Result<Outcome> {
    let cuts = match cuts {
        Some(spec) => parse_cuts(spec)?,
        None => PINNED_CUTS.to_vec(),
    };
    let record = calibrate(&CalibrationParams { lambda, dim, cuts })?;
    let source = render_pinned(&record);
    let stdout = match write {
        Some(path) => {
            std::fs::write(&path, &source)?;
            format!("wrote {}\n", path.display())
        }
        None => source,
    };
    if record.pinned.is_none() {
        return Ok(Outcome {
            code: 1,
            stdout,
            stderr: format!("error: {}\n", OmegaError::CalibrationMissing),
        });
    }
    Ok(Outcome::ok(stdout))
}
