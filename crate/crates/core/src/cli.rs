//! Batch driver behind the `interspace` binary.
//!
//! Every JSON output is wrapped in an envelope that records the subcommand, its
//! arguments with defaults filled in, and the effective run configuration.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Grid, RunConfig};
use crate::error::{Error, Result};
use crate::expr::{parse_complex, Expr};
use crate::extension::{krein_difference_check, momentum_union_resolvent, DeltaInteraction};
use crate::geneig::{delta_eigenvector_hermite, delta_membership, expansion_check, EXPANSION_NODES};
use crate::models::{self, GalleryEntry};
use crate::operator::CoefficientOperator;
use crate::report::{fmt_f64, to_json_string, write_json};
use crate::resolvent::{branch_report, neumann_compare, union_spectrum_scan};
use crate::scale::{BasisTag, CoefficientVector, ScaleFamily, ScaleSpace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "interspace", version, about = "Interspace-relative spectral computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Union spectrum scan over a family of interspaces.
    Scan(ScanArgs),
    /// Resolvent branches through one point and their pairwise equivalence.
    Branches(BranchesArgs),
    /// Neumann continuation against the direct solve.
    Neumann(NeumannArgs),
    /// Difference of two momentum extension resolvents against the closed form.
    Krein(KreinArgs),
    /// Which momentum extensions have each grid point in their resolvent set.
    MomentumCover(CoverArgs),
    /// Bound state of the attractive point interaction by finite differences.
    DeltaBound(DeltaArgs),
    /// Dirac deltas as generalized eigenvectors of the Hermite position operator.
    Geneig(GeneigArgs),
    /// Hermite expansion round trip.
    Expansion(ExpansionArgs),
    /// Built-in model catalog.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
}

#[derive(Subcommand, Debug)]
enum GalleryAction {
    List,
    Show { name: String },
}

#[derive(Args, Debug, Serialize)]
struct Common {
    /// RunConfig JSON; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ScanArgs {
    /// Operator spec JSON or `gallery:NAME`.
    #[arg(long)]
    operator: String,
    /// Family spec JSON or `gallery:NAME`; defaults to the gallery entry's family.
    #[arg(long)]
    family: Option<String>,
    /// `re0:re1:nRe,im0:im1:nIm`.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
    /// Also write `plot.csv` with x/y/status columns.
    #[arg(long)]
    plot_data: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct BranchesArgs {
    #[arg(long)]
    operator: String,
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct NeumannArgs {
    #[arg(long)]
    operator: String,
    #[arg(long)]
    family: Option<String>,
    /// `E,F` as space labels of the family, e.g. `H_1,H_0`.
    #[arg(long)]
    pair: String,
    #[arg(long, allow_hyphen_values = true)]
    lambda0: String,
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct KreinArgs {
    /// Angle in radians, or a complex literal of modulus one.
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    beta: String,
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    /// Right-hand side as an expression in `x`.
    #[arg(long, allow_hyphen_values = true)]
    g: String,
    /// Gauss nodes on [0,1]; defaults to the config value.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct CoverArgs {
    /// Comma-separated angles or unimodular complex literals.
    #[arg(long, allow_hyphen_values = true)]
    alphas: String,
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct DeltaArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y: f64,
    /// Half-width of the box; defaults to the config value.
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Coarsest mesh width; defaults to the config value.
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct GeneigArgs {
    /// Real points `lo:hi:count`.
    #[arg(long, allow_hyphen_values = true)]
    lambda_grid: String,
    #[arg(long, default_value_t = 1.0)]
    s: f64,
    /// Truncation of the delta vector.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Serialize)]
struct ExpansionArgs {
    /// Comma-separated coefficients, or an expression in the mode index `m`.
    #[arg(long, allow_hyphen_values = true)]
    phi: String,
    /// Number of modes when `phi` is an expression.
    #[arg(long, default_value_t = 32)]
    modes: usize,
    #[arg(long, default_value_t = EXPANSION_NODES)]
    nodes: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct Envelope<'a, A: Serialize, T: Serialize> {
    command: &'a str,
    arguments: &'a A,
    config: &'a RunConfig,
    passed: Option<bool>,
    result: &'a T,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::InvalidConfig(_) | Error::Json(_) | Error::Io(_) | Error::Csv(_) => EXIT_PARSE,
        Error::Linalg(_) => EXIT_CHECK_FAILED,
        _ => EXIT_PRECONDITION,
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    match &common.config {
        Some(p) => RunConfig::from_json(&std::fs::read_to_string(p)?),
        None => Ok(RunConfig::default()),
    }
}

/// `gallery:NAME` or a path to an operator spec.
fn load_operator(src: &str) -> Result<(CoefficientOperator, Option<GalleryEntry>)> {
    if let Some(name) = src.strip_prefix("gallery:") {
        let entry = models::gallery_entry(name)?;
        return Ok((entry.operator.clone(), Some(entry)));
    }
    Ok((CoefficientOperator::from_json(&std::fs::read_to_string(src)?)?, None))
}

fn load_family(src: Option<&str>, entry: Option<&GalleryEntry>) -> Result<ScaleFamily> {
    match src {
        Some(s) => match s.strip_prefix("gallery:") {
            Some(name) => Ok(models::gallery_entry(name)?.family),
            None => ScaleFamily::from_json(&std::fs::read_to_string(s)?),
        },
        None => entry
            .map(|e| e.family.clone())
            .ok_or_else(|| Error::parse("--family", "required unless the operator comes from the gallery")),
    }
}

fn find_space<'a>(family: &'a ScaleFamily, label: &str) -> Result<&'a ScaleSpace> {
    family.spaces().iter().find(|s| s.label() == label.trim()).ok_or_else(|| {
        let known: Vec<&str> = family.spaces().iter().map(|s| s.label()).collect();
        Error::parse(label, format!("no such space in the family (have {})", known.join(", ")))
    })
}

/// Real input is an angle, anything with an imaginary part is `α` itself.
fn parse_unimodular(src: &str) -> Result<Complex64> {
    let z = parse_complex(src)?;
    if z.im == 0.0 {
        Ok(Complex64::from_polar(1.0, z.re))
    } else {
        Ok(z)
    }
}

fn parse_real_axis(src: &str) -> Result<Vec<f64>> {
    let g = Grid::parse(src)?;
    if g.n_im != 1 {
        return Err(Error::parse(src, "expected a real axis lo:hi:count"));
    }
    Ok(g.points().iter().map(|z| z.re).collect())
}

fn emit_json<A: Serialize, T: Serialize>(command: &str, args: &A, cfg: &RunConfig, passed: Option<bool>, result: &T, out: Option<&Path>) -> Result<()> {
    let env = Envelope { command, arguments: args, config: cfg, passed, result };
    match out {
        Some(p) => write_json(p, &env),
        None => {
            std::io::stdout().write_all(to_json_string(&env)?.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_bytes(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Scan(a) => scan(a),
        Command::Branches(a) => branches(a),
        Command::Neumann(a) => neumann(a),
        Command::Krein(a) => krein(a),
        Command::MomentumCover(a) => cover(a),
        Command::DeltaBound(a) => delta(a),
        Command::Geneig(a) => geneig(a),
        Command::Expansion(a) => expansion(a),
        Command::Gallery { action } => gallery(action),
    }
}

fn scan(a: ScanArgs) -> Result<bool> {
    let mut cfg = load_config(&a.common)?;
    let grid = Grid::parse(&a.grid)?;
    grid.validate(2)?;
    cfg.grid = grid;
    let (x, entry) = load_operator(&a.operator)?;
    let family = load_family(a.family.as_deref(), entry.as_ref())?;
    let map = union_spectrum_scan(&x, &family, &grid, &cfg)?;
    std::fs::create_dir_all(&a.out)?;
    let mut csv = Vec::new();
    map.write_csv(&mut csv)?;
    std::fs::write(a.out.join("spectrum.csv"), csv)?;
    if a.plot_data {
        let mut plot = Vec::new();
        map.write_plot_data(&mut plot)?;
        std::fs::write(a.out.join("plot.csv"), plot)?;
    }
    emit_json("scan", &a, &cfg, map.duality_agrees(), &map, Some(&a.out.join("spectrum.json")))?;
    Ok(map.duality_agrees().unwrap_or(true))
}

fn branches(a: BranchesArgs) -> Result<bool> {
    let cfg = load_config(&a.common)?;
    let (x, entry) = load_operator(&a.operator)?;
    let family = load_family(a.family.as_deref(), entry.as_ref())?;
    let report = branch_report(&x, &family, parse_complex(&a.lambda)?, &cfg)?;
    emit_json("branches", &a, &cfg, None, &report, a.out.as_deref())?;
    Ok(true)
}

fn neumann(a: NeumannArgs) -> Result<bool> {
    let cfg = load_config(&a.common)?;
    let (x, entry) = load_operator(&a.operator)?;
    let family = load_family(a.family.as_deref(), entry.as_ref())?;
    let (el, fl) = a.pair.split_once(',').ok_or_else(|| Error::parse(&a.pair, "expected E,F"))?;
    let (e, f) = (find_space(&family, el)?, find_space(&family, fl)?);
    let n = cfg.working_n();
    // a smooth right-hand side with every mode present
    let eta = CoefficientVector::new(x.basis, (0..n).map(|k| Complex64::new(1.0 / (k + 1) as f64, 0.0)).collect());
    let report = neumann_compare(&x, parse_complex(&a.lambda0)?, parse_complex(&a.lambda)?, e, f, &eta, &cfg)?;
    emit_json("neumann", &a, &cfg, Some(report.passed), &report, a.out.as_deref())?;
    Ok(report.passed)
}

/// Krein residual contract relative to `‖g‖_∞`.
pub const KREIN_TOL: f64 = 1e-10;

fn krein(a: KreinArgs) -> Result<bool> {
    let cfg = load_config(&a.common)?;
    let g = Expr::parse(&a.g, &["x"])?;
    let nodes = a.nodes.unwrap_or(cfg.interval.nodes);
    let report = krein_difference_check(parse_unimodular(&a.alpha)?, parse_unimodular(&a.beta)?, parse_complex(&a.lambda)?, |x| g.eval_real(x), nodes)?;
    let passed = report.relative <= KREIN_TOL;
    emit_json("krein", &a, &cfg, Some(passed), &report, a.out.as_deref())?;
    Ok(passed)
}

fn cover(a: CoverArgs) -> Result<bool> {
    let _cfg = load_config(&a.common)?;
    let alphas = a.alphas.split(',').map(parse_unimodular).collect::<Result<Vec<_>>>()?;
    let report = momentum_union_resolvent(&alphas, &Grid::parse(&a.grid)?.points())?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    emit_bytes(&csv, a.out.as_deref())?;
    Ok(true)
}

/// Relative accuracy required of the extrapolated bound state.
pub const BOUND_STATE_TOL: f64 = 0.01;

fn delta(a: DeltaArgs) -> Result<bool> {
    let mut cfg = load_config(&a.common)?;
    if let Some(l) = a.half_width {
        cfg.interval.delta_half_width = l;
    }
    if let Some(h) = a.h0 {
        cfg.interval.delta_h0 = h;
    }
    cfg.validate()?;
    let d = DeltaInteraction::new(a.alpha, a.y);
    let report = d.bound_state_check(&cfg)?;
    #[derive(Serialize)]
    struct Out {
        spectrum: crate::extension::SpectrumDescriptor,
        bound_state: crate::extension::BoundStateReport,
    }
    let passed = report.relative_error <= BOUND_STATE_TOL;
    emit_json("delta-bound", &a, &cfg, Some(passed), &Out { spectrum: d.spectrum(), bound_state: report }, a.out.as_deref())?;
    Ok(passed)
}

fn geneig(a: GeneigArgs) -> Result<bool> {
    let cfg = load_config(&a.common)?;
    let lambdas = parse_real_axis(&a.lambda_grid)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "s", "n", "home", "target", "residual", "membership_norm", "member"])?;
    let mut passed = true;
    for &l in &lambdas {
        let pair = delta_eigenvector_hermite(l, a.s, a.n)?;
        let m = delta_membership(l, a.s)?;
        passed &= pair.residual <= cfg.tolerances.ge_tol && m.member;
        w.write_record([
            fmt_f64(l),
            fmt_f64(a.s),
            a.n.to_string(),
            pair.home_space,
            pair.target_space,
            fmt_f64(pair.residual),
            fmt_f64(m.norm),
            m.member.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    emit_bytes(&bytes, a.out.as_deref())?;
    Ok(passed)
}

fn expansion(a: ExpansionArgs) -> Result<bool> {
    let cfg = load_config(&a.common)?;
    let literal: Option<Vec<f64>> = a.phi.split(',').map(|s| s.trim().parse::<f64>().ok()).collect();
    let coeffs = match literal {
        Some(v) => v,
        None => {
            let e = Expr::parse(&a.phi, &["m"])?;
            (0..a.modes).map(|m| e.eval_real(m as f64).re).collect()
        }
    };
    let report = expansion_check(&CoefficientVector::from_real(BasisTag::Hermite, &coeffs), a.nodes)?;
    let tol = cfg.tolerances.ge_tol;
    let passed = report.reconstruction_error <= tol && report.parseval_error <= tol;
    emit_json("expansion", &a, &cfg, Some(passed), &report, a.out.as_deref())?;
    Ok(passed)
}

fn gallery(action: GalleryAction) -> Result<bool> {
    let mut out = std::io::stdout();
    match action {
        GalleryAction::List => {
            for name in models::gallery_names() {
                writeln!(out, "{name}")?;
            }
        }
        GalleryAction::Show { name } => {
            let entry = models::gallery_entry(&name)?;
            out.write_all(to_json_string(&entry.descriptor())?.as_bytes())?;
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("interspace").chain(args.iter().copied()))
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("k.json");
        let o = out.to_str().unwrap();
        assert_eq!(run_args(&["krein", "--alpha", "0", "--beta", "3.14159265358979", "--lambda", "0+1i", "--g", "1", "--out", o]), EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!(v["result"]["relative"].as_f64().unwrap() <= 1e-10);
        assert_eq!(v["arguments"]["nodes"], serde_json::Value::Null);
        assert_eq!(v["config"]["interval"]["nodes"], 128);

        assert_eq!(run_args(&["krein", "--alpha", "0", "--beta", "1", "--lambda", "2*pi", "--g", "1", "--out", o]), EXIT_PRECONDITION);
        assert_eq!(run_args(&["krein", "--alpha", "0", "--beta", "1", "--lambda", "1", "--g", "x+", "--out", o]), EXIT_PARSE);
        assert_eq!(run_args(&["no-such-command"]), EXIT_PARSE);
        assert_eq!(run_args(&["delta-bound", "--alpha", "3", "--out", o]), EXIT_PRECONDITION);
        assert_eq!(run_args(&["gallery", "show", "nonexistent"]), EXIT_PARSE);
        assert_eq!(run_args(&["gallery", "list"]), EXIT_OK);
    }

    #[test]
    fn unimodular_inputs() {
        assert!((parse_unimodular("pi").unwrap() + 1.0).norm() < 1e-15);
        assert_eq!(parse_unimodular("0+1i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_unimodular("0").unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn scan_writes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let code = run_args(&["scan", "--operator", "gallery:hermite-diagonal[1/(n+1)]", "--grid", "-0.5:1.5:5,-0.5:0.5:3", "--out", d, "--plot-data"]);
        assert_eq!(code, EXIT_OK);
        for f in ["spectrum.csv", "spectrum.json", "plot.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let plot = std::fs::read_to_string(dir.path().join("plot.csv")).unwrap();
        assert!(plot.starts_with("x,y,status\n"));
    }
}
