//! Batch front end. `run` parses argv, loads the scene, dispatches and
//! writes artifacts only after the computation succeeded.
//!
//! Exit codes: 0 success, 2 usage, 3 validation, 4 numerical failure
//! (including a failed `verify`).

use crate::cmv::{cmv_reflectionless_defect, RadialSchedule, VerblunskySeq};
use crate::comb_map::{set_from_comb, MartinMap};
use crate::cx::C64;
use crate::domain::{ChangeOfVariables, CombData, Divisor, FiniteGapSet};
use crate::error::Error;
use crate::jacobi_recon::reconstruct_operator;
use crate::schrodinger_jacobi::TransformContext;
use crate::translation_flow::{dubrovin_flow, FlowState, PotentialSampler};
use crate::verify::{identity_suite, SuiteOptions};
use crate::weyl_m::{band_grid, Side, WeylPair};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize, Serializer};
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "finite-gap", about = "Finite-gap reflectionless operators: comb maps, Weyl functions, Jacobi models, divisor flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// grid size (meaning depends on the subcommand)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// tolerance for convergence flags and round-trip checks
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub out: Option<OutFormat>,
    #[arg(long, global = true, default_value = ".")]
    pub outdir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// frequencies, heights and critical points of the comb map
    Comb { scene: PathBuf },
    /// gap endpoints from comb teeth (scene "comb" key, else the scene's own comb)
    InvertComb { scene: PathBuf },
    /// boundary values of m₊, m₋ on the bands and the reflectionless defect
    Mfun { scene: PathBuf },
    /// two-sided Jacobi coefficients after the change of variables
    S2j { scene: PathBuf },
    /// potential and divisor along the translation flow on [0, length]
    Flow {
        scene: PathBuf,
        #[arg(long, default_value_t = 20.0)]
        length: f64,
    },
    /// identity suite with a JSON pass/fail report
    Verify { scene: PathBuf },
    /// Schur functions of a constant Verblunsky sequence on the unit circle
    CmvSchur {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        upsilon_re: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        upsilon_im: f64,
        #[arg(long, default_value_t = 4000)]
        depth: usize,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDivisorPoint {
    lambda: f64,
    eps: i8,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    gaps: Vec<[f64; 2]>,
    #[serde(default)]
    divisor: Option<Vec<RawDivisorPoint>>,
    #[serde(default)]
    lambda_star: Option<f64>,
    #[serde(default)]
    comb: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    grid: Option<usize>,
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    out: Option<OutFormat>,
}

pub const DEFAULT_LAMBDA_STAR: f64 = -2.0;
pub const DEFAULT_TOL: f64 = 1e-6;

/// Validated scene. Missing divisor means left gap edges; missing λ* means −2.
#[derive(Debug, Clone)]
pub struct SceneConfig {
    pub set: FiniteGapSet,
    pub divisor: Divisor,
    pub cov: ChangeOfVariables,
    pub comb: Option<CombData>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<OutFormat>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: RawScene = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("scene: {e}")))?;
        let gaps: Vec<(f64, f64)> = raw.gaps.iter().map(|g| (g[0], g[1])).collect();
        let set = FiniteGapSet::new(&gaps)?;
        let divisor = match &raw.divisor {
            Some(pts) => {
                let pts: Vec<(f64, i8)> = pts.iter().map(|p| (p.lambda, p.eps)).collect();
                Divisor::new(&set, &pts)?
            }
            None => Divisor::left_edges(&set),
        };
        let cov = ChangeOfVariables::new(raw.lambda_star.unwrap_or(DEFAULT_LAMBDA_STAR))?;
        let comb = match &raw.comb {
            Some(t) => Some(CombData::new(&t.iter().map(|p| (p[0], p[1])).collect::<Vec<_>>())?),
            None => None,
        };
        Ok(SceneConfig { set, divisor, cov, comb, grid: raw.grid, tol: raw.tol, out: raw.out })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read scene {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Float with 17 significant digits in text and JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl fmt::Display for F17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_finite() {
            write!(f, "{:.16e}", self.0)
        } else if self.0.is_nan() {
            write!(f, "NaN")
        } else if self.0 > 0.0 {
            write!(f, "inf")
        } else {
            write!(f, "-inf")
        }
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = serde_json::value::RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(F17),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(t) => write!(f, "{t}"),
        }
    }
}

fn num(x: f64) -> Cell {
    Cell::Num(F17(x))
}

/// Column-oriented table written as CSV or JSON.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Numerical(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|c| c.to_string())).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Numerical(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Numerical(format!("json: {e}")))
    }
}

fn write_artifact(outdir: &Path, file: &str, body: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(outdir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", outdir.display())))?;
    let path = outdir.join(file);
    std::fs::write(&path, body).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn emit(table: &Table, fmt: OutFormat, outdir: &Path) -> Result<PathBuf, CliError> {
    match fmt {
        OutFormat::Csv => write_artifact(outdir, &format!("{}.csv", table.name), &table.to_csv()?),
        OutFormat::Json => write_artifact(outdir, &format!("{}.json", table.name), &(table.to_json()? + "\n")),
    }
}

fn comb_table(sc: &SceneConfig) -> Result<Table, CliError> {
    let map = MartinMap::new(&sc.set)?;
    let comb = map.comb_data()?;
    let mut t = Table::new("comb", &["k", "omega", "height", "critical_point", "gap_lower", "gap_upper"]);
    for (k, tooth) in comb.teeth().iter().enumerate() {
        let (a, b) = sc.set.gap(k);
        t.rows.push(vec![
            Cell::Int(k as i64),
            num(tooth.omega),
            num(tooth.height),
            num(map.critical_points()[k]),
            num(a),
            num(b),
        ]);
    }
    Ok(t)
}

fn invert_table(sc: &SceneConfig, tol: f64) -> Result<Table, CliError> {
    let (comb, reference) = match &sc.comb {
        Some(c) => (c.clone(), None),
        None => (crate::comb_map::comb_data(&sc.set)?, Some(&sc.set)),
    };
    let set = set_from_comb(&comb)?;
    let mut t = Table::new("invert_comb", &["k", "omega", "height", "gap_lower", "gap_upper", "round_trip_error"]);
    for (k, tooth) in comb.teeth().iter().enumerate() {
        let (a, b) = set.gap(k);
        let err = reference.map_or(f64::NAN, |r| {
            let (p, q) = r.gap(k);
            (a - p).abs().max((b - q).abs())
        });
        if err > tol {
            return Err(CliError::Numerical(format!("gap {k} round trip error {err:e} exceeds {tol:e}")));
        }
        t.rows.push(vec![Cell::Int(k as i64), num(tooth.omega), num(tooth.height), num(a), num(b), num(err)]);
    }
    Ok(t)
}

fn mfun_table(sc: &SceneConfig, n: usize) -> Result<Table, CliError> {
    let pair = WeylPair::new(&sc.set, &sc.divisor)?;
    let right = sc.set.gaps().last().map_or(0.0, |g| g.1) + 3.0;
    let mut t = Table::new(
        "mfun",
        &["lambda", "re_m_plus", "im_m_plus", "re_m_minus", "im_m_minus", "defect_m_plus_plus_conj_m_minus"],
    );
    for x in band_grid(&sc.set, n, right) {
        let p = pair.m_boundary(Side::Plus, x);
        let m = pair.m_boundary(Side::Minus, x);
        t.rows.push(vec![num(x), num(p.re), num(p.im), num(m.re), num(m.im), num((p + m.conj()).norm())]);
    }
    Ok(t)
}

fn s2j_table(sc: &SceneConfig, n: usize) -> Result<Table, CliError> {
    let pair = WeylPair::new(&sc.set, &sc.divisor)?;
    let ctx = TransformContext::new(sc.cov, pair)?;
    let j = reconstruct_operator(&ctx, n)?;
    let mut t = Table::new("s2j", &["n", "a_n_coupling_n_minus_1_to_n", "b_n"]);
    for k in j.lo()..=j.hi() {
        let a = if k > j.lo() { j.a(k) } else { f64::NAN };
        t.rows.push(vec![Cell::Int(k), num(a), num(j.b(k))]);
    }
    Ok(t)
}

fn flow_table(sc: &SceneConfig, n: usize, length: f64) -> Result<Table, CliError> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(CliError::Validation(format!("flow length {length} must be positive")));
    }
    let g = sc.set.genus();
    let st = FlowState::new(&sc.set, &sc.divisor);
    let sampler = PotentialSampler::new(&sc.set, &st, -0.5, length + 0.5)?;
    let mut cols = vec!["x".to_string(), "q".to_string()];
    for k in 0..g {
        cols.push(format!("lambda_{k}"));
        cols.push(format!("eps_{k}"));
    }
    let mut t = Table { name: "flow".into(), columns: cols, rows: Vec::new() };
    let steps = n.max(2);
    let mut cur = st.clone();
    for i in 0..steps {
        let x = length * i as f64 / (steps - 1) as f64;
        // the divisor at position ℓ = −x carries q(x)
        cur = dubrovin_flow(&sc.set, &cur, -x - cur.position)?;
        cur.events.clear();
        let mut row = vec![num(x), num(sampler.eval(x))];
        for p in cur.divisor.points() {
            row.push(num(p.lambda));
            row.push(Cell::Int(p.eps as i64));
        }
        t.rows.push(row);
    }
    Ok(t)
}

fn cmv_table(re: f64, im: f64, depth: usize, n: usize, tol: f64) -> Result<Table, CliError> {
    let seq = VerblunskySeq::constant(depth, C64::new(re, im))?;
    let angles: Vec<f64> = (0..n)
        .map(|k| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64)
        .collect();
    let rep = cmv_reflectionless_defect(&seq, &angles, RadialSchedule { depth, tol, ..Default::default() })?;
    let mut t = Table::new(
        "cmv_schur",
        &["angle", "re_phi", "im_phi", "re_s_plus", "im_s_plus", "re_s_minus", "im_s_minus", "defect", "converged"],
    );
    for p in rep.points {
        t.rows.push(vec![
            num(p.angle),
            num(p.angle.cos()),
            num(p.angle.sin()),
            num(p.s_plus.re),
            num(p.s_plus.im),
            num(p.s_minus.re),
            num(p.s_minus.im),
            num(p.defect),
            Cell::Int(p.converged as i64),
        ]);
    }
    Ok(t)
}

fn dispatch(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let scene = |p: &Path| SceneConfig::load(p);
    let pick = |sc: Option<&SceneConfig>| -> (Option<usize>, f64, OutFormat) {
        let grid = cli.grid.or(sc.and_then(|s| s.grid));
        let tol = cli.tol.or(sc.and_then(|s| s.tol)).unwrap_or(DEFAULT_TOL);
        let out = cli.out.or(sc.and_then(|s| s.out)).unwrap_or(OutFormat::Csv);
        (grid, tol, out)
    };
    if let Some(g) = cli.grid {
        if g == 0 {
            return Err(CliError::Usage("--grid must be positive".into()));
        }
    }
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
    }
    match &cli.command {
        Command::Comb { scene: p } => {
            let sc = scene(p)?;
            let (_, _, out) = pick(Some(&sc));
            Ok(vec![emit(&comb_table(&sc)?, out, &cli.outdir)?])
        }
        Command::InvertComb { scene: p } => {
            let sc = scene(p)?;
            let (_, tol, out) = pick(Some(&sc));
            Ok(vec![emit(&invert_table(&sc, tol)?, out, &cli.outdir)?])
        }
        Command::Mfun { scene: p } => {
            let sc = scene(p)?;
            let (grid, _, out) = pick(Some(&sc));
            Ok(vec![emit(&mfun_table(&sc, grid.unwrap_or(50))?, out, &cli.outdir)?])
        }
        Command::S2j { scene: p } => {
            let sc = scene(p)?;
            let (grid, _, out) = pick(Some(&sc));
            Ok(vec![emit(&s2j_table(&sc, grid.unwrap_or(20))?, out, &cli.outdir)?])
        }
        Command::Flow { scene: p, length } => {
            let sc = scene(p)?;
            let (grid, _, out) = pick(Some(&sc));
            Ok(vec![emit(&flow_table(&sc, grid.unwrap_or(101), *length)?, out, &cli.outdir)?])
        }
        Command::Verify { scene: p } => {
            let sc = scene(p)?;
            let (grid, _, _) = pick(Some(&sc));
            let opts = SuiteOptions { grid: grid.unwrap_or(50), ..Default::default() };
            let rep = identity_suite(&sc.set, &sc.divisor, sc.cov, opts)?;
            let body = serde_json::to_string_pretty(&ReportOut::from(&rep))
                .map_err(|e| CliError::Numerical(format!("json: {e}")))?;
            let path = write_artifact(&cli.outdir, "verify_report.json", &(body + "\n"))?;
            if rep.all_passed {
                Ok(vec![path])
            } else {
                let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                Err(CliError::Numerical(format!("checks failed: {}", failed.join(", "))))
            }
        }
        Command::CmvSchur { upsilon_re, upsilon_im, depth } => {
            let (grid, tol, out) = pick(None);
            Ok(vec![emit(&cmv_table(*upsilon_re, *upsilon_im, *depth, grid.unwrap_or(64), tol)?, out, &cli.outdir)?])
        }
    }
}

#[derive(Serialize)]
struct CheckOut<'a> {
    name: &'a str,
    measured: F17,
    tolerance: F17,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    genus: usize,
    lambda_star: F17,
    all_passed: bool,
    checks: Vec<CheckOut<'a>>,
}

impl<'a> From<&'a crate::verify::SuiteReport> for ReportOut<'a> {
    fn from(r: &'a crate::verify::SuiteReport) -> Self {
        ReportOut {
            genus: r.genus,
            lambda_star: F17(r.lambda_star),
            all_passed: r.all_passed,
            checks: r
                .checks
                .iter()
                .map(|c| CheckOut {
                    name: &c.name,
                    measured: F17(c.measured),
                    tolerance: F17(c.tolerance),
                    passed: c.passed,
                    error: c.error.as_deref(),
                })
                .collect(),
        }
    }
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
