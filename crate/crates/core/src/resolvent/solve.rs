use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{PairContext, Status};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::linalg::{sigma_max, LinearSolver, Section};
use crate::operator::{CoefficientOperator, Rep};
use crate::scale::{check_basis, embedding_norm, log_sup, CoefficientVector, ScaleSpace};

pub(crate) fn require_resolvent(ctx: &PairContext, lambda: Complex64, cfg: &RunConfig) -> Result<()> {
    let c = ctx.classify(lambda, cfg)?;
    if c.status != Status::Resolvent {
        return Err(Error::NotInResolvent {
            lambda,
            from: ctx.e.label().into(),
            to: ctx.f.label().into(),
            status: c.status.to_string(),
        });
    }
    Ok(())
}

/// LU (or exact division) of the unweighted `N x N` truncation of `X − λ`.
pub(crate) fn truncated_solver(x: &CoefficientOperator, lambda: Complex64, n: usize) -> Result<LinearSolver> {
    let section = match &x.rep {
        Rep::Diagonal { symbol } => {
            Section::Diagonal { diag: (0..n).map(|i| symbol.at(i as u64) - lambda).collect(), rows: n, cols: n }
        }
        _ => {
            let mut m = x.truncate(n);
            for i in 0..n {
                m[(i, i)] -= lambda;
            }
            Section::Dense(m)
        }
    };
    LinearSolver::new(&section)
}

/// `‖(X − λ)ξ − η‖_F` at the truncation of `ξ`.
fn residual_norm(x: &CoefficientOperator, lambda: Complex64, xi: &[Complex64], eta: &[Complex64], f: &ScaleSpace) -> f64 {
    let mut r = x.apply_slice(xi, xi.len());
    for (i, ri) in r.iter_mut().enumerate() {
        *ri -= lambda * xi[i] + eta.get(i).copied().unwrap_or_default();
    }
    f.norm_of(&r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub lambda: Complex64,
    pub from: String,
    pub to: String,
    pub n: usize,
    pub xi: CoefficientVector,
    pub xi_norm: f64,
    /// `‖(X−λ)ξ − η‖_F / ‖η‖_F`.
    pub residual: f64,
}

/// `ξ = R_λ^{E,F}(X) η` at the truncation of `η`.
pub fn resolvent_solve(
    x: &CoefficientOperator,
    lambda: Complex64,
    e: &ScaleSpace,
    f: &ScaleSpace,
    eta: &CoefficientVector,
    cfg: &RunConfig,
) -> Result<SolveReport> {
    check_basis(x.basis, eta.basis)?;
    let ctx = PairContext::new(x, e, f, cfg)?;
    require_resolvent(&ctx, lambda, cfg)?;
    section_solve(x, lambda, e, f, eta)
}

/// Solves the `N x N` truncation of `(X − λ)ξ = η`, `N = len(η)`, with no status check.
///
/// Useful for operators that are unbounded on the pair of interest, where only the
/// finite section is meaningful.
pub fn section_solve(x: &CoefficientOperator, lambda: Complex64, e: &ScaleSpace, f: &ScaleSpace, eta: &CoefficientVector) -> Result<SolveReport> {
    check_basis(x.basis, eta.basis)?;
    let n = eta.len();
    let coeffs = match &x.rep {
        Rep::Diagonal { symbol } => (0..n).map(|i| eta.coeffs[i] / (symbol.at(i as u64) - lambda)).collect(),
        _ => truncated_solver(x, lambda, n)?.solve(&eta.coeffs),
    };
    let eta_norm = f.norm_of(&eta.coeffs);
    let res = residual_norm(x, lambda, &coeffs, &eta.coeffs, f);
    let residual = if eta_norm > 0.0 { res / eta_norm } else { res };
    let xi = CoefficientVector::new(x.basis, coeffs);
    Ok(SolveReport {
        lambda,
        from: e.label().into(),
        to: f.label().into(),
        n,
        xi_norm: e.norm_of(&xi.coeffs),
        xi,
        residual,
    })
}

/// Partial sums of `Σ_k (λ−λ0)^k R_{λ0}^{(k+1)}` with powers taken through E.
pub struct NeumannContinuation {
    pub lambda0: Complex64,
    pub lambda: Complex64,
    /// `δ = 1/‖(R_{λ0})_0‖_{E,E}`.
    pub radius: f64,
    /// Highest power kept.
    pub terms: usize,
    /// Bound on the discarded tail in `B(F, E)`.
    pub tail_bound: f64,
    pub n: usize,
    basis: crate::scale::BasisTag,
    solver: LinearSolver,
}

impl std::fmt::Debug for NeumannContinuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NeumannContinuation")
            .field("lambda0", &self.lambda0)
            .field("lambda", &self.lambda)
            .field("radius", &self.radius)
            .field("terms", &self.terms)
            .field("tail_bound", &self.tail_bound)
            .finish()
    }
}

/// `‖(R_{λ0})_0‖_{E,E}` together with `‖R_{λ0}‖_{F,E}`.
fn resolvent_norms(ctx: &PairContext, lambda0: Complex64, n: usize, cfg: &RunConfig) -> Result<(f64, f64)> {
    let x = &ctx.x;
    let r_fe = 1.0 / ctx.classify(lambda0, cfg)?.c_low();
    let r_ee = match &x.rep {
        Rep::Diagonal { symbol } => log_sup(|k| -(symbol.at(k) - lambda0).norm().ln()).exp(),
        _ => {
            let s = x.weighted_section(lambda0, &ctx.e, &ctx.e, n, n).singular_values()?;
            1.0 / s.last().copied().unwrap_or(0.0)
        }
    };
    Ok((r_ee, r_fe))
}

impl NeumannContinuation {
    pub fn new(x: &CoefficientOperator, lambda0: Complex64, lambda: Complex64, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Result<Self> {
        let ctx = PairContext::new(x, e, f, cfg)?;
        require_resolvent(&ctx, lambda0, cfg)?;
        if !embedding_norm(e, f)?.is_finite() {
            return Err(Error::Precondition(format!("Neumann continuation needs {} inside {}", e.label(), f.label())));
        }
        let n = cfg.working_n();
        let (r_ee, r_fe) = resolvent_norms(&ctx, lambda0, n, cfg)?;
        let radius = 1.0 / r_ee;
        let distance = (lambda - lambda0).norm();
        if distance >= radius {
            return Err(Error::OutsideNeumannRadius { distance, radius });
        }
        let q = distance * r_ee;
        let tail = |k: usize| r_fe * q.powi(k as i32 + 1) / (1.0 - q);
        let mut terms = 0;
        while tail(terms) >= cfg.tolerances.series_tol && terms < 100_000 {
            terms += 1;
        }
        let tail_bound = if q == 0.0 { 0.0 } else { tail(terms) };
        Ok(NeumannContinuation {
            lambda0,
            lambda,
            radius,
            terms,
            tail_bound,
            n,
            basis: x.basis,
            solver: truncated_solver(x, lambda0, n)?,
        })
    }

    /// The partial sum with `terms` powers, without any radius check.
    pub fn unchecked(x: &CoefficientOperator, lambda0: Complex64, lambda: Complex64, e: &ScaleSpace, terms: usize, cfg: &RunConfig) -> Result<Self> {
        let n = cfg.working_n();
        let radius = match &x.rep {
            Rep::Diagonal { symbol } => 1.0 / log_sup(|k| -(symbol.at(k) - lambda0).norm().ln()).exp(),
            _ => x.weighted_section(lambda0, e, e, n, n).singular_values()?.last().copied().unwrap_or(0.0),
        };
        Ok(NeumannContinuation {
            lambda0,
            lambda,
            radius,
            terms,
            tail_bound: f64::NAN,
            n,
            basis: x.basis,
            solver: truncated_solver(x, lambda0, n)?,
        })
    }

    pub fn apply(&self, eta: &CoefficientVector) -> Result<CoefficientVector> {
        check_basis(self.basis, eta.basis)?;
        let h = self.lambda - self.lambda0;
        let mut y = self.solver.solve(&eta.resized(self.n).coeffs);
        let mut acc = y.clone();
        for _ in 0..self.terms {
            y = self.solver.solve(&y).into_iter().map(|v| v * h).collect();
            for (a, v) in acc.iter_mut().zip(&y) {
                *a += v;
            }
        }
        Ok(CoefficientVector::new(self.basis, acc))
    }
}

pub fn neumann_continue(
    x: &CoefficientOperator,
    lambda0: Complex64,
    lambda: Complex64,
    e: &ScaleSpace,
    f: &ScaleSpace,
    cfg: &RunConfig,
) -> Result<NeumannContinuation> {
    NeumannContinuation::new(x, lambda0, lambda, e, f, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub n: usize,
    /// `‖R_λ(X) − R_λ(Y) − R_λ(X)(Y−X)R_λ(Y)‖_{F→E}`.
    pub first: f64,
    /// `‖R_λ(X)‖·‖Y−X‖·‖R_λ(Y)‖` in the matching norms.
    pub first_scale: f64,
    /// `‖R_λ(X) − R_μ(X) − (λ−μ)R_λ(X)R_μ(X)‖_{F→E}`.
    pub second: f64,
    pub second_scale: f64,
    pub passed: bool,
}

fn weighted_norm(m: &Mat<c64>, from: &ScaleSpace, to: &ScaleSpace) -> Result<f64> {
    let lf = from.ln_weights(m.ncols());
    let lt = to.ln_weights(m.nrows());
    sigma_max(&Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (lt[i] - lf[j]).exp()))
}

/// Both resolvent identities on the truncation of size `working_n`.
///
/// The first one is checked in the form `R(X) − R(Y) = R(X)(Y − X)R(Y)`.
pub fn check_resolvent_identities(
    x: &CoefficientOperator,
    y: &CoefficientOperator,
    lambda: Complex64,
    mu: Complex64,
    e: &ScaleSpace,
    f: &ScaleSpace,
    cfg: &RunConfig,
) -> Result<IdentityReport> {
    check_basis(x.basis, y.basis)?;
    let cx = PairContext::new(x, e, f, cfg)?;
    let cy = PairContext::new(y, e, f, cfg)?;
    require_resolvent(&cx, lambda, cfg)?;
    require_resolvent(&cy, lambda, cfg)?;
    require_resolvent(&cx, mu, cfg)?;
    let n = cfg.working_n();
    let rx = truncated_solver(x, lambda, n)?.inverse();
    let ry = truncated_solver(y, lambda, n)?.inverse();
    let rmu = truncated_solver(x, mu, n)?.inverse();
    let diff = y.truncate(n) - x.truncate(n);
    let first_res = &rx - &ry - &rx * &diff * &ry;
    let second_res = &rx - &rmu - faer::Scale(lambda - mu) * (&rx * &rmu);
    let nrx = weighted_norm(&rx, f, e)?;
    let first = weighted_norm(&first_res, f, e)?;
    let first_scale = nrx * weighted_norm(&diff, e, f)? * weighted_norm(&ry, f, e)?;
    let second = weighted_norm(&second_res, f, e)?;
    let second_scale = (lambda - mu).norm() * nrx * weighted_norm(&rmu, f, e)?;
    let tol = cfg.tolerances.id_tol;
    let ok = |r: f64, s: f64| r == 0.0 || r <= tol * s;
    Ok(IdentityReport {
        lambda,
        mu,
        n,
        first,
        first_scale,
        second,
        second_scale,
        passed: ok(first, first_scale) && ok(second, second_scale),
    })
}

/// Neumann continuation next to the direct solve on one right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannComparison {
    pub lambda0: Complex64,
    pub lambda: Complex64,
    pub from: String,
    pub to: String,
    pub radius: f64,
    pub terms: usize,
    pub tail_bound: f64,
    pub n: usize,
    /// `max_k |(series η)_k − (direct η)_k|`.
    pub max_error: f64,
    pub passed: bool,
}

pub fn neumann_compare(
    x: &CoefficientOperator,
    lambda0: Complex64,
    lambda: Complex64,
    e: &ScaleSpace,
    f: &ScaleSpace,
    eta: &CoefficientVector,
    cfg: &RunConfig,
) -> Result<NeumannComparison> {
    let nc = NeumannContinuation::new(x, lambda0, lambda, e, f, cfg)?;
    let eta = eta.resized(nc.n);
    let series = nc.apply(&eta)?;
    let direct = section_solve(x, lambda, e, f, &eta)?;
    let max_error = series.sub(&direct.xi)?.max_abs();
    let allowed = nc.tail_bound * eta.max_abs() + cfg.tolerances.solve_tol * direct.xi.max_abs().max(1.0);
    Ok(NeumannComparison {
        lambda0,
        lambda,
        from: e.label().into(),
        to: f.label().into(),
        radius: nc.radius,
        terms: nc.terms,
        tail_bound: nc.tail_bound,
        n: nc.n,
        max_error,
        passed: max_error <= allowed,
    })
}
