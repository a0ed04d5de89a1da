//! Acceptance suite: one line per criterion, `cargo test --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use interspace::extension::{krein_difference_check, momentum_union_resolvent, DeltaInteraction, MomentumExtension};
use interspace::geneig::{delta_eigenvector_hermite, expansion_check, EXPANSION_NODES};
use interspace::linalg::Section;
use interspace::models::{self, MEMBERSHIP_TOL};
use interspace::operator::Kernel;
use interspace::resolvent::{
    check_resolvent_identities, classify, neumann_compare, neumann_continue, section_solve, union_spectrum_scan,
    union_spectrum_scan_with, NeumannContinuation,
};
use interspace::{certify, BasisTag, CoefficientOperator, CoefficientVector, Grid, Result, RunConfig, ScaleSpace, Status};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(cfg: &RunConfig, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ (stream << 32))
}

fn diagonal_spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let entry = models::hermite_diagonal("1/(n+1)")?;
    let grid = Grid::parse("-0.5:1.5:41,-0.5:0.5:21")?;
    let map = union_spectrum_scan(&entry.operator, &entry.family, &grid, cfg)?;
    let mut mismatches = 0;
    let mut inconclusive = 0;
    for cell in &map.cells {
        if !cell.conclusive() {
            inconclusive += 1;
            continue;
        }
        if cell.union_resolvent == entry.expected.contains(cell.lambda, MEMBERSHIP_TOL) {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{} cells, {mismatches} mismatches, {inconclusive} inconclusive", map.cells.len()))
}

fn rung(label: &str) -> i32 {
    label[2..].parse().expect("H_k label")
}

fn hilbert_scale(cfg: &RunConfig) -> Result<Outcome> {
    let entry = models::hilbert_scale_generator();
    let grid = Grid::parse("0:7:71,-1:1:21")?;
    let map = union_spectrum_scan(&entry.operator, &entry.family, &grid, cfg)?;
    let bad_pairs: Vec<String> = map
        .contributing_pairs()
        .into_iter()
        .filter(|&p| rung(&map.pairs[p].from) - 1 != rung(&map.pairs[p].to))
        .map(|p| map.pairs[p].label())
        .collect();
    let mut mismatches = 0;
    let mut compared = 0;
    for cell in &map.cells {
        let z = cell.lambda;
        let near_eigen = (1..=7).any(|k| (z - k as f64).norm() <= 0.05);
        if near_eigen {
            continue;
        }
        compared += 1;
        if !cell.union_resolvent {
            mismatches += 1;
        }
    }
    let adjacent = map.contributing_pairs().len();
    outcome(
        bad_pairs.is_empty() && mismatches == 0,
        format!("{adjacent} contributing pairs (non-adjacent: {bad_pairs:?}); {compared} cells compared, {mismatches} mismatches"),
    )
}

fn random_instance(r: &mut ChaCha8Rng, k: usize) -> CoefficientOperator {
    let p = r.random_range(0.5..2.0);
    let q = c(r.random_range(-1.0..1.0), r.random_range(-0.2..0.2));
    if k.is_multiple_of(2) {
        let sym = move |n: u64| q + p * (n as f64 + 1.0);
        CoefficientOperator::diagonal(format!("diag({p:.3}(n+1)+q)"), BasisTag::Hermite, interspace::Sequence::new("affine", sym))
    } else {
        let b = c(r.random_range(-0.5..0.5), r.random_range(-0.5..0.5));
        let kernel = Kernel::new("tridiagonal", move |n, m| {
            if n == m {
                q + p * (n as f64 + 1.0)
            } else if n == m + 1 {
                b
            } else if m == n + 1 {
                b.conj()
            } else {
                Complex64::default()
            }
        });
        CoefficientOperator::banded(format!("tri({p:.3})"), BasisTag::Hermite, 1, kernel, false)
    }
}

fn identities(cfg: &RunConfig) -> Result<Outcome> {
    let mut r = rng(cfg, 3);
    let (e, f) = (ScaleSpace::hermite(1.0), ScaleSpace::hermite(0.0));
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for k in 0..20 {
        let x = random_instance(&mut r, k);
        let y = random_instance(&mut r, k + 1);
        let off = |r: &mut ChaCha8Rng| c(r.random_range(-2.0..6.0), r.random_range(1.0..2.5) * if r.random_bool(0.5) { 1.0 } else { -1.0 });
        let (lambda, mu) = (off(&mut r), off(&mut r));
        let rep = check_resolvent_identities(&x, &y, lambda, mu, &e, &f, cfg)?;
        assert_eq!(rep.n, 256);
        worst = worst.max(rep.first / rep.first_scale).max(rep.second / rep.second_scale);
        if !rep.passed {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("20 instances at N=256, worst relative residual {worst:.2e}, {failures} failures"))
}

fn neumann(cfg: &RunConfig) -> Result<Outcome> {
    let x = models::hermite_diagonal("n+1")?.operator;
    let (e, f) = (ScaleSpace::hermite(1.0), ScaleSpace::hermite(0.0));
    let mut r = rng(cfg, 4);
    let n = cfg.truncation.n0 * 8;
    let eta = CoefficientVector::new(BasisTag::Hermite, (0..n).map(|k| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)) / (k + 1) as f64).collect());
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let l0 = c(r.random_range(-4.0..8.0), r.random_range(0.2..1.0));
        let radius = neumann_continue(&x, l0, l0, &e, &f, cfg)?.radius;
        let t = r.random_range(0.0..2.0 * PI);
        let l = l0 + Complex64::from_polar(r.random_range(0.0..0.9) * radius, t);
        let cmp = neumann_compare(&x, l0, l, &e, &f, &eta, cfg)?;
        worst = worst.max(cmp.max_error);
    }
    let l0 = c(-1.0, 0.0);
    let radius = neumann_continue(&x, l0, l0, &e, &f, cfg)?.radius;
    let far = l0 - 1.5 * radius;
    let div = NeumannContinuation::unchecked(&x, l0, far, &e, 60, cfg)?.apply(&eta)?;
    let direct = section_solve(&x, far, &e, &f, &eta.resized(div.len()))?;
    let div_err = div.sub(&direct.xi)?.max_abs();
    outcome(
        worst <= 1e-8 && div_err > 1e-2,
        format!("worst agreement {worst:.2e} over 20 pairs; at 1.5 delta the 60-term sum is off by {div_err:.2e}"),
    )
}

fn krein(_cfg: &RunConfig) -> Result<Outcome> {
    let a = Complex64::from_polar(1.0, PI / 3.0);
    let cases = [
        (c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), 0usize),
        (a, a.conj(), c(0.5, 0.5), 1),
    ];
    let g = |k: usize| move |x: f64| if k == 0 { c(1.0, 0.0) } else { c(x, 0.0) };
    let mut worst: f64 = 0.0;
    for (al, be, l, k) in cases {
        worst = worst.max(krein_difference_check(al, be, l, g(k), 256)?.relative);
    }
    let same = krein_difference_check(a, a, c(0.5, 0.5), g(1), 256)?;
    outcome(
        worst <= 1e-10 && same.relative <= 1e-14,
        format!("distinct cases worst {worst:.2e}; alpha=beta {:.2e}", same.relative),
    )
}

fn momentum_eigenvalues(cfg: &RunConfig) -> Result<Outcome> {
    let mut missed = 0;
    let mut worst: f64 = 0.0;
    for alpha in [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)] {
        let s = MomentumExtension::new(alpha, cfg.interval.nodes)?;
        let g = s.quadrature.sample(|x| c((3.0 * x).cos(), x));
        for k in -3..=3 {
            let ev = alpha.arg() + 2.0 * PI * k as f64;
            if s.resolvent_apply(c(ev, 0.0), &g).is_ok() {
                missed += 1;
            }
            worst = worst.max(s.solve(c(ev + PI, 0.0), &g)?.residual);
        }
    }
    outcome(missed == 0 && worst <= 1e-8, format!("{missed} eigenvalues accepted; worst midpoint residual {worst:.2e}"))
}

fn momentum_union(cfg: &RunConfig) -> Result<Outcome> {
    let line = Grid::parse("-10:10:201")?.points();
    let mut r = rng(cfg, 7);
    let mut pairs = vec![(0.0, PI), (0.0, PI / 2.0), (PI / 2.0, -PI / 2.0)];
    for _ in 0..20 {
        pairs.push((r.random_range(-PI..PI), r.random_range(-PI..PI)));
    }
    let mut uncovered = 0;
    for &(a, b) in &pairs {
        let rep = momentum_union_resolvent(&[Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, b)], &line)?;
        uncovered += rep.rows.iter().filter(|row| !row.covered).count();
    }
    outcome(uncovered == 0, format!("{} pairs x 201 points, {uncovered} uncovered", pairs.len()))
}

fn delta_bound(cfg: &RunConfig) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    cfg.interval.delta_half_width = 20.0;
    cfg.interval.delta_h0 = 0.1;
    cfg.interval.delta_levels = 3;
    let rep = DeltaInteraction::new(-2.0, 0.0).bound_state_check(&cfg)?;
    outcome(
        rep.relative_error <= 0.01,
        format!("extrapolated {:.10} +/- {:.1e} (relative error {:.1e})", rep.extrapolated, rep.error_bar, rep.relative_error),
    )
}

fn delta_operator(cfg: &RunConfig) -> Result<Outcome> {
    let x = models::torus_delta().operator;
    let w = ScaleSpace::sobolev;
    let into_minus = certify(&x, &w(1.0), &w(-1.0), cfg)?;
    let into_zero = certify(&x, &w(1.0), &w(0.0), cfg)?;
    let cert_ok = into_minus.is_certified() && into_minus.norm_bound.is_finite() && !into_zero.is_certified();

    let mut ranks = Vec::new();
    for n in [128, 256, 512] {
        let s = x.weighted_section(Complex64::default(), &w(1.0), &w(-1.0), n, n).singular_values()?;
        let thr = cfg.tolerances.defect_eps * s[0];
        ranks.push(s.iter().filter(|&&v| v >= thr).count());
    }
    let kernel_ok = ranks.iter().all(|&r| r == 1);

    let mut growth_ok = true;
    let mut growth = Vec::new();
    for l in [c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)] {
        let proxy: Vec<f64> = [64, 128, 256, 512]
            .iter()
            .map(|&n| match x.weighted_section(l, &w(1.0), &w(-1.0), n, n) {
                Section::Dense(m) => interspace::linalg::singular_values_canonical(&m).map(|s| 1.0 / s[s.len() - 1]),
                other => other.singular_values().map(|s| 1.0 / s[s.len() - 1]),
            })
            .collect::<Result<_>>()?;
        let ratios: Vec<f64> = proxy.windows(2).map(|p| p[1] / p[0]).collect();
        growth_ok &= ratios.iter().all(|&q| q >= 1.5);
        growth.push(ratios.iter().copied().fold(f64::INFINITY, f64::min));
    }
    outcome(
        cert_ok && kernel_ok && growth_ok,
        format!(
            "W1->W-1 bound {:.3}, W1->W0 {:?}; section ranks {ranks:?}; min growth per doubling {:?}",
            into_minus.norm_bound,
            into_zero.method,
            growth.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn toeplitz(cfg: &RunConfig) -> Result<Outcome> {
    let x = models::torus_multiplication("cos(theta)")?.operator;
    let w0 = ScaleSpace::sobolev(0.0);
    let s = x.weighted_section(c(2.0, 0.0), &w0, &w0, 1024, 1024).singular_values()?;
    let norm = 1.0 / s[s.len() - 1];
    let at_two = classify(&x, c(2.0, 0.0), &w0, &w0, cfg)?.status;
    let inside = classify(&x, c(0.5, 0.0), &w0, &w0, cfg)?.status;
    outcome(
        (norm - 1.0).abs() <= 0.1 && at_two == Status::Resolvent && inside == Status::NotRegular,
        format!("inverse norm at 2: {norm:.6} (status {at_two}); status at 0.5: {inside}"),
    )
}

fn generalized_eigenvectors(cfg: &RunConfig) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for l in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        worst = worst.max(delta_eigenvector_hermite(l, 1.0, 1024)?.residual);
    }
    let mut r = rng(cfg, 11);
    let (mut recon, mut parseval): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let coeffs: Vec<f64> = (0..32).map(|_| r.random_range(-1.0..1.0)).collect();
        let rep = expansion_check(&CoefficientVector::from_real(BasisTag::Hermite, &coeffs), EXPANSION_NODES)?;
        recon = recon.max(rep.reconstruction_error);
        parseval = parseval.max(rep.parseval_error);
    }
    let tol = cfg.tolerances.ge_tol;
    outcome(
        worst <= tol && recon <= tol && parseval <= tol,
        format!("worst delta residual {worst:.2e} at N=1024; reconstruction {recon:.2e}; Parseval {parseval:.2e}"),
    )
}

fn duality(cfg: &RunConfig) -> Result<Outcome> {
    let mut r = rng(cfg, 12);
    let mut rows = 0;
    let mut disagreements = Vec::new();
    for entry in models::gallery() {
        let points: Vec<Complex64> = (0..10).map(|_| c(r.random_range(-3.0..8.0), r.random_range(-2.0..2.0))).collect();
        if entry.family.closed_under_duality() {
            let map = union_spectrum_scan_with(&entry.operator, &entry.family, &points, cfg)?;
            for row in map.duality.unwrap_or_default() {
                rows += 1;
                if !row.agree {
                    disagreements.push(format!("{} {} {}", entry.name, map.pairs[row.pair].label(), row.cell));
                }
            }
        } else {
            let sp = entry.family.spaces();
            let xa = entry.operator.adjoint();
            for (i, j) in entry.family.admissible_pairs() {
                for &l in &points {
                    rows += 1;
                    let s = classify(&entry.operator, l, &sp[i], &sp[j], cfg)?.status;
                    let d = classify(&xa, l.conj(), &sp[j].dual(), &sp[i].dual(), cfg)?.status;
                    if s != d {
                        disagreements.push(format!("{} ({},{}) {l}", entry.name, sp[i].label(), sp[j].label()));
                    }
                }
            }
        }
    }
    outcome(disagreements.is_empty(), format!("{rows} (pair, lambda) rows, {} disagreements {disagreements:?}", disagreements.len()))
}

fn cli_suite(dir: &Path) -> Vec<(String, Vec<String>)> {
    let d = |name: &str| dir.join(name).to_str().unwrap().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["scan", "--operator", "gallery:hermite-diagonal[1/(n+1)]", "--grid", "-0.5:1.5:41,-0.5:0.5:21", "--plot-data", "--out"],
        vec!["scan", "--operator", "gallery:torus-multiplication[cos(theta)]", "--grid", "-2:2:5,-1:1:3", "--out"],
        vec!["branches", "--operator", "gallery:hilbert-scale-generator", "--lambda", "0.5+0.5i", "--out"],
        vec!["neumann", "--operator", "gallery:hermite-diagonal[n+1]", "--pair", "s_1,s_0", "--lambda0", "-1", "--lambda", "-1.5+0.5i", "--out"],
        vec!["krein", "--alpha", "0", "--beta", "3.14159265358979", "--lambda", "0+1i", "--g", "1", "--out"],
        vec!["momentum-cover", "--alphas", "0,pi/2,pi", "--grid", "-10:10:201,-1:1:3", "--out"],
        vec!["delta-bound", "--alpha", "-2", "--out"],
        vec!["geneig", "--lambda-grid", "-2:2:5", "--out"],
        vec!["expansion", "--phi", "exp(-m/3)*cos(m)", "--out"],
    ];
    runs.into_iter()
        .enumerate()
        .map(|(k, mut args)| {
            let target = d(&format!("run{k}"));
            args.push(&target);
            (target.clone(), args.iter().map(|s| s.to_string()).collect())
        })
        .collect()
}

fn collect_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        let name = p.file_name().unwrap().to_string_lossy().to_string();
        if p.is_dir() {
            for (sub, bytes) in collect_bytes(&p) {
                out.push((format!("{name}/{sub}"), bytes));
            }
        } else {
            out.push((name, std::fs::read(&p).unwrap()));
        }
    }
    out
}

fn determinism(_cfg: &RunConfig) -> Result<Outcome> {
    let bin = env!("CARGO_BIN_EXE_interspace");
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir()?;
        for (_, args) in cli_suite(dir.path()) {
            let status = Command::new(bin).args(&args).output()?;
            if !status.status.success() {
                return outcome(false, format!("`{}` exited with {:?}", args.join(" "), status.status.code()));
            }
        }
        snapshots.push(collect_bytes(dir.path()));
    }
    let files = snapshots[0].len();
    let bytes: usize = snapshots[0].iter().map(|(_, b)| b.len()).sum();
    outcome(snapshots[0] == snapshots[1], format!("{files} output files, {bytes} bytes compared"))
}

type Criterion = fn(&RunConfig) -> Result<Outcome>;

fn main() {
    let cfg = RunConfig::default();
    let criteria: [(&str, Criterion); 13] = [
        ("diagonal spectrum 1/(n+1)", diagonal_spectrum),
        ("Hilbert scale generator: adjacent pairs only", hilbert_scale),
        ("resolvent identities", identities),
        ("Neumann continuation", neumann),
        ("Krein difference", krein),
        ("momentum eigenvalue lattice", momentum_eigenvalues),
        ("momentum union coverage", momentum_union),
        ("point interaction bound state", delta_bound),
        ("delta multiplication on the torus", delta_operator),
        ("multiplication by cos", toeplitz),
        ("generalized eigenvectors and expansions", generalized_eigenvectors),
        ("duality of statuses", duality),
        ("determinism of CLI outputs", determinism),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str()) && *f != id.to_string()) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = match run(&cfg) {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} {id:>2}. {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64());
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
