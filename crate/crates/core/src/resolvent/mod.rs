//! Per-pair spectral data: regular points, defect numbers, resolvent statuses,
//! solves, Neumann continuation, identities, branches and union scans.

mod branch;
mod scan;
mod solve;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::linalg::{banded_smin_upper, singular_values_canonical, Section};
use crate::operator::{certify, CertMethod, CoefficientOperator, ContinuityCertificate, Rep};
use crate::scale::{embedding_norm, ScaleSpace};

pub use branch::{
    branch_handle, branch_report, equivalent, BranchPair, BranchReport, BranchSolver, FnHandle, ResolventBranch,
    ResolventHandle,
};
pub use scan::{union_spectrum_scan, union_spectrum_scan_with, DualityRow, PairInfo, PairStatus, ScanCell, SpectrumMap};
pub use solve::{
    check_resolvent_identities, neumann_compare, neumann_continue, resolvent_solve, section_solve, IdentityReport,
    NeumannComparison, NeumannContinuation, SolveReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Defect {
    Count(usize),
    Unstable,
}

impl Defect {
    pub fn count(&self) -> Option<usize> {
        match self {
            Defect::Count(d) => Some(*d),
            Defect::Unstable => None,
        }
    }
}

impl fmt::Display for Defect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defect::Count(d) => write!(f, "{d}"),
            Defect::Unstable => f.write_str("unstable"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Resolvent,
    RegularDefect(Defect),
    NotRegular,
    NoExtension,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Resolvent => f.write_str("resolvent"),
            Status::RegularDefect(d) => write!(f, "regular-defect({d})"),
            Status::NotRegular => f.write_str("not-regular"),
            Status::NoExtension => f.write_str("no-extension"),
            Status::Inconclusive => f.write_str("inconclusive"),
        }
    }
}

/// What the finite sections of one operator say about injectivity with closed range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SectionOutcome {
    /// Smallest singular value settled at a positive value.
    Stabilized { c: f64 },
    /// Singular values below `defect_eps·σ_max`; `stable` when the count repeats.
    Kernel { count: usize, stable: bool },
    /// Smallest singular value keeps shrinking by the growth factor over three doublings.
    Decaying,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionAnalysis {
    pub outcome: SectionOutcome,
    pub smin: f64,
    pub smax: f64,
    /// Ratio of the smallest singular value above the kernel threshold to the largest below it.
    pub gap: f64,
    pub witness_n: usize,
}

impl SectionAnalysis {
    fn inconclusive() -> Self {
        SectionAnalysis { outcome: SectionOutcome::Inconclusive, smin: 0.0, smax: 0.0, gap: 0.0, witness_n: 0 }
    }
}

/// Dense scan plus geometric probes far out, used by the diagonal fast path.
fn diagonal_sample_points(n_max: usize) -> Vec<u64> {
    let mut pts: Vec<u64> = (0..n_max as u64).collect();
    let mut x = n_max as f64;
    while x <= (1u64 << 50) as f64 {
        pts.push(x as u64);
        x *= 2f64.sqrt();
    }
    pts
}

/// Symbol values and weight ratios of a diagonal operator for one pair, reusable across λ.
#[derive(Debug, Clone)]
pub struct DiagonalProfile {
    a: Vec<Complex64>,
    scale: Vec<f64>,
    dense_len: usize,
}

impl DiagonalProfile {
    pub fn new(x: &CoefficientOperator, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Option<Self> {
        let Rep::Diagonal { symbol } = &x.rep else { return None };
        let pts = diagonal_sample_points(cfg.truncation.n_max);
        let a = pts.iter().map(|&n| symbol.at(n)).collect();
        let scale = pts.iter().map(|&n| (f.ln_weight(n) - e.ln_weight(n)).exp()).collect();
        Some(DiagonalProfile { a, scale, dense_len: cfg.truncation.n_max })
    }

    /// Singular values of the infinite weighted diagonal `|a_n − λ| w_F/w_E`, sampled.
    pub fn analyze(&self, lambda: Complex64, cfg: &RunConfig) -> SectionAnalysis {
        let vals: Vec<f64> = self
            .a
            .iter()
            .zip(&self.scale)
            .map(|(a, s)| {
                let v = (a - lambda).norm() * s;
                if v.is_nan() { 0.0 } else { v }
            })
            .collect();
        let smax = vals.iter().copied().fold(0.0, f64::max);
        let smin = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let thr = cfg.tolerances.defect_eps * smax;
        let below: Vec<f64> = vals.iter().copied().filter(|&v| v < thr).collect();
        let above_min = vals.iter().copied().filter(|&v| v >= thr).fold(f64::INFINITY, f64::min);
        let below_max = below.iter().copied().fold(0.0, f64::max);
        let gap = if below.is_empty() { f64::INFINITY } else { above_min / below_max.max(f64::MIN_POSITIVE) };
        let tail = vals[self.dense_len..].iter().rev().take(4).copied().fold(f64::INFINITY, f64::min);
        let outcome = if smax == 0.0 || tail < thr {
            SectionOutcome::Decaying
        } else if !below.is_empty() {
            let count = vals[..self.dense_len].iter().filter(|&&v| v < thr).count();
            SectionOutcome::Kernel { count, stable: true }
        } else {
            SectionOutcome::Stabilized { c: smin }
        };
        SectionAnalysis { outcome, smin, smax, gap, witness_n: self.dense_len }
    }
}

fn kernel_stats(s: &[f64], eps: f64) -> (usize, f64) {
    let smax = s.first().copied().unwrap_or(0.0);
    let thr = eps * smax;
    let count = s.iter().filter(|&&v| v < thr).count();
    let above = s.iter().copied().filter(|&v| v >= thr).fold(f64::INFINITY, f64::min);
    let below = s.iter().copied().filter(|&v| v < thr).fold(0.0, f64::max);
    let gap = if count == 0 { f64::INFINITY } else { above / below.max(f64::MIN_POSITIVE) };
    (count, gap)
}

/// Upper bound for the smallest singular value of the tall `(n + b) x n` section
/// of a banded operator, `None` for unbounded bands or overflowing weights.
fn far_smin_bound(x: &CoefficientOperator, lambda: Complex64, e: &ScaleSpace, f: &ScaleSpace, n: usize) -> Option<f64> {
    let b = x.lower_bandwidth()?;
    let lf = f.ln_weights(n + b);
    let le = e.ln_weights(n);
    let entry = |i: usize, j: usize| {
        let v = x.entry(i as u64, j as u64) - if i == j { lambda } else { Complex64::default() };
        v * (lf[i] - le[j]).exp()
    };
    banded_smin_upper(n, b, entry, 20)
}

/// Analysis of the tall sections of `(X − λ)` from E to F by doubling.
///
/// Sections have `N + b` rows for lower bandwidth `b` (square for unbounded bands),
/// so for banded operators the smallest singular value is nonincreasing in `N`.
/// That makes a plateau checkable: a banded `Stabilized` verdict stands only if
/// the section at `n_max` has not dropped below it by the growth factor.
pub fn analyze_sections(
    x: &CoefficientOperator,
    lambda: Complex64,
    e: &ScaleSpace,
    f: &ScaleSpace,
    cfg: &RunConfig,
) -> Result<SectionAnalysis> {
    sections(x, lambda, e, f, cfg, false)
}

/// With `early_decay` a drop by the growth factor out to `n_max` settles `Decaying`
/// after two kernel-free levels. Only for forward sections, where a kernel showing
/// up later would give the same status.
fn sections(
    x: &CoefficientOperator,
    lambda: Complex64,
    e: &ScaleSpace,
    f: &ScaleSpace,
    cfg: &RunConfig,
    early_decay: bool,
) -> Result<SectionAnalysis> {
    if let Some(profile) = DiagonalProfile::new(x, e, f, cfg) {
        return Ok(profile.analyze(lambda, cfg));
    }
    let tr = &cfg.truncation;
    let eps = cfg.tolerances.defect_eps;
    let extra = x.lower_bandwidth().unwrap_or(0);
    let mut hist: Vec<(usize, f64, f64, usize, f64)> = Vec::new();
    let mut far: Option<Option<f64>> = None;
    let mut n = tr.n0;
    while n <= cfg.dense_cap() {
        let section = x.weighted_section(lambda, e, f, n + extra, n);
        let s = match &section {
            Section::Dense(m) if m.nrows() == m.ncols() => singular_values_canonical(m)?,
            other => other.singular_values()?,
        };
        let smax = s.first().copied().unwrap_or(0.0);
        let smin = s.last().copied().unwrap_or(0.0);
        let (count, gap) = kernel_stats(&s, eps);
        hist.push((n, smin, smax, count, gap));
        let k = hist.len();
        let done = |outcome| SectionAnalysis { outcome, smin, smax, gap, witness_n: hist[k.saturating_sub(2)].0 };
        if k >= 2 {
            let prev = hist[k - 2];
            if count > 0 && prev.3 > 0 {
                return Ok(done(SectionOutcome::Kernel { count, stable: count == prev.3 }));
            }
            let plateau = (smin - prev.1).abs() <= tr.rel_tol * smin;
            if count == 0 && prev.3 == 0 && (plateau || early_decay) {
                // a plateau over a few doublings can still give way further out
                let far = *far.get_or_insert_with(|| far_smin_bound(x, lambda, e, f, tr.n_max));
                if let Some(ub) = far.filter(|ub| n < tr.n_max && ub * tr.growth_threshold <= smin) {
                    return Ok(SectionAnalysis { outcome: SectionOutcome::Decaying, smin: ub, smax, gap, witness_n: tr.n_max });
                }
                if plateau {
                    return Ok(done(SectionOutcome::Stabilized { c: smin }));
                }
            }
        }
        if k >= 4 && smin * tr.growth_threshold <= hist[k - 4].1 {
            return Ok(done(SectionOutcome::Decaying));
        }
        n *= 2;
    }
    let Some(&(n, smin, smax, _, gap)) = hist.last() else { return Ok(SectionAnalysis::inconclusive()) };
    Ok(SectionAnalysis { outcome: SectionOutcome::Inconclusive, smin, smax, gap, witness_n: n })
}

/// Full status of `λ` for the pair `(E, F)` together with the evidence behind it.
#[derive(Debug, Clone)]
pub struct Classification {
    pub status: Status,
    /// Sections of `X − λ` from E to F.
    pub forward: Option<SectionAnalysis>,
    /// Sections of `X† − λ̄` from F^× to E^×.
    pub adjoint: Option<SectionAnalysis>,
}

impl Classification {
    pub fn c_low(&self) -> f64 {
        match self.forward.map(|a| a.outcome) {
            Some(SectionOutcome::Stabilized { c }) => c,
            _ => 0.0,
        }
    }

    pub fn d_high(&self) -> f64 {
        self.forward.map(|a| a.smax).unwrap_or(0.0)
    }

    pub fn witness_n(&self) -> usize {
        self.forward.map(|a| a.witness_n).unwrap_or(0)
    }

    pub fn defect(&self) -> Option<Defect> {
        match self.status {
            Status::Resolvent => Some(Defect::Count(0)),
            Status::RegularDefect(d) => Some(d),
            _ => None,
        }
    }
}

pub(crate) fn combine(forward: &SectionAnalysis, adjoint: Option<&SectionAnalysis>) -> Status {
    match forward.outcome {
        SectionOutcome::Kernel { .. } | SectionOutcome::Decaying => Status::NotRegular,
        SectionOutcome::Inconclusive => Status::Inconclusive,
        SectionOutcome::Stabilized { .. } => match adjoint.map(|a| a.outcome) {
            None | Some(SectionOutcome::Stabilized { .. }) => Status::Resolvent,
            Some(SectionOutcome::Kernel { count, stable: true }) => Status::RegularDefect(Defect::Count(count)),
            Some(SectionOutcome::Kernel { stable: false, .. }) | Some(SectionOutcome::Decaying) => {
                Status::RegularDefect(Defect::Unstable)
            }
            Some(SectionOutcome::Inconclusive) => Status::Inconclusive,
        },
    }
}

/// Everything about `(X, E, F)` that does not depend on `λ`.
#[derive(Debug, Clone)]
pub struct PairContext {
    pub x: CoefficientOperator,
    pub e: ScaleSpace,
    pub f: ScaleSpace,
    pub certificate: ContinuityCertificate,
    adjoint: CoefficientOperator,
    profile: Option<DiagonalProfile>,
}

impl PairContext {
    pub fn new(x: &CoefficientOperator, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Result<Self> {
        let certificate = certify(x, e, f, cfg)?;
        let profile = if certificate.is_certified() { DiagonalProfile::new(x, e, f, cfg) } else { None };
        Ok(PairContext { x: x.clone(), e: e.clone(), f: f.clone(), certificate, adjoint: x.adjoint(), profile })
    }

    pub fn label(&self) -> String {
        format!("({},{})", self.e.label(), self.f.label())
    }

    fn forward(&self, lambda: Complex64, cfg: &RunConfig) -> Result<SectionAnalysis> {
        match &self.profile {
            Some(p) => Ok(p.analyze(lambda, cfg)),
            None => sections(&self.x, lambda, &self.e, &self.f, cfg, true),
        }
    }

    pub fn classify(&self, lambda: Complex64, cfg: &RunConfig) -> Result<Classification> {
        match self.certificate.method {
            CertMethod::Failed => return Ok(Classification { status: Status::NoExtension, forward: None, adjoint: None }),
            CertMethod::Inconclusive => {
                return Ok(Classification { status: Status::Inconclusive, forward: None, adjoint: None })
            }
            _ => {}
        }
        let forward = self.forward(lambda, cfg)?;
        let adjoint = match forward.outcome {
            // |ā_n − λ̄| carries the same weight ratio on the dual pair
            SectionOutcome::Stabilized { .. } if self.profile.is_some() => Some(forward),
            SectionOutcome::Stabilized { .. } => {
                Some(analyze_sections(&self.adjoint, lambda.conj(), &self.f.dual(), &self.e.dual(), cfg)?)
            }
            _ => None,
        };
        let status = combine(&forward, adjoint.as_ref());
        Ok(Classification { status, forward: Some(forward), adjoint })
    }
}

pub fn classify(x: &CoefficientOperator, lambda: Complex64, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Result<Classification> {
    PairContext::new(x, e, f, cfg)?.classify(lambda, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularPointReport {
    pub lambda: Complex64,
    pub from: String,
    pub to: String,
    pub c_low: f64,
    pub d_high: f64,
    pub stabilized: bool,
    pub witness_n: usize,
    /// `‖X‖_{E→F} + |λ|·‖I‖_{E→F}`, an a priori upper bound for `d_high`.
    pub sanity_bound: f64,
}

impl RegularPointReport {
    pub fn is_regular(&self) -> bool {
        self.c_low > 0.0
    }
}

/// Best constants `c_λ ‖ξ‖_E ≤ ‖(X−λ)ξ‖_F ≤ d_λ ‖ξ‖_E` from the stabilized sections.
pub fn regular_point(x: &CoefficientOperator, lambda: Complex64, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Result<RegularPointReport> {
    let ctx = PairContext::new(x, e, f, cfg)?;
    regular_point_in(&ctx, lambda, cfg)
}

pub fn regular_point_in(ctx: &PairContext, lambda: Complex64, cfg: &RunConfig) -> Result<RegularPointReport> {
    let (x, e, f) = (&ctx.x, &ctx.e, &ctx.f);
    if !ctx.certificate.is_certified() {
        return Err(Error::NotCertified { operator: x.name.clone(), from: e.label().into(), to: f.label().into() });
    }
    let a = ctx.forward(lambda, cfg)?;
    let (c_low, stabilized) = match a.outcome {
        SectionOutcome::Stabilized { c } => (c, true),
        SectionOutcome::Kernel { stable, .. } => (0.0, stable),
        SectionOutcome::Decaying => (0.0, true),
        SectionOutcome::Inconclusive => (a.smin, false),
    };
    Ok(RegularPointReport {
        lambda,
        from: e.label().into(),
        to: f.label().into(),
        c_low,
        d_high: a.smax,
        stabilized,
        witness_n: a.witness_n,
        sanity_bound: ctx.certificate.norm_bound + lambda.norm() * embedding_norm(e, f)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub lambda: Complex64,
    pub from: String,
    pub to: String,
    pub defect: Defect,
    #[serde(with = "crate::report::inf_as_null")]
    pub singular_value_gap: f64,
}

/// Codimension of the range of `X_E − λ` in F, read off the adjoint sections.
pub fn defect_number(x: &CoefficientOperator, lambda: Complex64, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Result<DefectReport> {
    let ctx = PairContext::new(x, e, f, cfg)?;
    let rp = regular_point_in(&ctx, lambda, cfg)?;
    if !rp.is_regular() {
        return Err(Error::NotRegular { lambda, c_low: rp.c_low });
    }
    let c = ctx.classify(lambda, cfg)?;
    let adj = c.adjoint.unwrap_or_else(SectionAnalysis::inconclusive);
    let defect = match adj.outcome {
        SectionOutcome::Stabilized { .. } => Defect::Count(0),
        SectionOutcome::Kernel { count, stable: true } => Defect::Count(count),
        _ => Defect::Unstable,
    };
    Ok(DefectReport { lambda, from: e.label().into(), to: f.label().into(), defect, singular_value_gap: adj.gap })
}
