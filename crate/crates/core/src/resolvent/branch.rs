use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::solve::{require_resolvent, truncated_solver};
use super::{PairContext, Status};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::linalg::LinearSolver;
use crate::operator::CoefficientOperator;
use crate::scale::{check_basis, BasisTag, CoefficientVector, ScaleFamily, ScaleSpace};

/// Anything that applies a resolvent to coefficient vectors.
pub trait ResolventHandle {
    fn basis(&self) -> BasisTag;
    fn apply(&self, v: &CoefficientVector) -> Result<CoefficientVector>;
    fn label(&self) -> String;
}

type ApplyFn = dyn Fn(&CoefficientVector) -> Result<CoefficientVector> + Send + Sync;

/// A handle built from a closure.
#[derive(Clone)]
pub struct FnHandle {
    basis: BasisTag,
    label: String,
    f: Arc<ApplyFn>,
}

impl FnHandle {
    pub fn new(
        basis: BasisTag,
        label: impl Into<String>,
        f: impl Fn(&CoefficientVector) -> Result<CoefficientVector> + Send + Sync + 'static,
    ) -> Self {
        FnHandle { basis, label: label.into(), f: Arc::new(f) }
    }
}

impl ResolventHandle for FnHandle {
    fn basis(&self) -> BasisTag {
        self.basis
    }

    fn apply(&self, v: &CoefficientVector) -> Result<CoefficientVector> {
        check_basis(self.basis, v.basis)?;
        (self.f)(v)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `R_λ^{E,F}(X)` on the working truncation.
pub struct BranchSolver {
    pub lambda: Complex64,
    pub from: String,
    pub to: String,
    basis: BasisTag,
    solver: LinearSolver,
}

impl ResolventHandle for BranchSolver {
    fn basis(&self) -> BasisTag {
        self.basis
    }

    fn apply(&self, v: &CoefficientVector) -> Result<CoefficientVector> {
        check_basis(self.basis, v.basis)?;
        let x = self.solver.solve(&v.resized(self.solver.dim()).coeffs);
        Ok(CoefficientVector::new(self.basis, x))
    }

    fn label(&self) -> String {
        format!("R({})[{},{}]", crate::scale::format_complex(self.lambda), self.from, self.to)
    }
}

/// Whether two handles agree on the first `eq_probes` unit vectors, measured in `space`.
pub fn equivalent(b: &dyn ResolventHandle, c: &dyn ResolventHandle, space: &ScaleSpace, cfg: &RunConfig) -> Result<bool> {
    check_basis(b.basis(), c.basis())?;
    check_basis(b.basis(), space.basis())?;
    let k = cfg.eq_probes;
    for j in 0..k {
        let probe = CoefficientVector::unit(b.basis(), j, k);
        let (u, v) = (b.apply(&probe)?, c.apply(&probe)?);
        let scale = space.norm(&u)?.max(space.norm(&v)?);
        let diff = space.norm(&u.sub(&v)?)?;
        if diff > cfg.tolerances.eq_tol * scale || diff.is_nan() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The single-valued resolvent function attached to one pair `(E, F)`.
#[derive(Debug, Clone)]
pub struct ResolventBranch {
    pub context: PairContext,
    pub points: Vec<(Complex64, Status)>,
}

impl ResolventBranch {
    pub fn new(x: &CoefficientOperator, e: &ScaleSpace, f: &ScaleSpace, lambdas: &[Complex64], cfg: &RunConfig) -> Result<Self> {
        let context = PairContext::new(x, e, f, cfg)?;
        let points = lambdas.iter().map(|&l| Ok((l, context.classify(l, cfg)?.status))).collect::<Result<_>>()?;
        Ok(ResolventBranch { context, points })
    }

    pub fn resolvent_points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.points.iter().filter(|(_, s)| *s == Status::Resolvent).map(|(l, _)| *l)
    }

    /// Solver for a recorded grid point with status `resolvent`.
    pub fn solver(&self, lambda: Complex64, cfg: &RunConfig) -> Result<BranchSolver> {
        match self.points.iter().find(|(l, _)| *l == lambda) {
            Some((_, Status::Resolvent)) => {}
            Some((_, s)) => {
                return Err(Error::NotInResolvent {
                    lambda,
                    from: self.context.e.label().into(),
                    to: self.context.f.label().into(),
                    status: s.to_string(),
                })
            }
            None => return Err(Error::Precondition(format!("{lambda} is not a grid point of this branch"))),
        }
        branch_solver(&self.context, lambda, cfg)
    }
}

fn branch_solver(ctx: &PairContext, lambda: Complex64, cfg: &RunConfig) -> Result<BranchSolver> {
    Ok(BranchSolver {
        lambda,
        from: ctx.e.label().into(),
        to: ctx.f.label().into(),
        basis: ctx.x.basis,
        solver: truncated_solver(&ctx.x, lambda, cfg.working_n())?,
    })
}

/// Builds a handle for `R_λ^{E,F}(X)`; fails unless `λ` has status `resolvent`.
pub fn branch_handle(x: &CoefficientOperator, lambda: Complex64, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Result<BranchSolver> {
    let ctx = PairContext::new(x, e, f, cfg)?;
    require_resolvent(&ctx, lambda, cfg)?;
    branch_solver(&ctx, lambda, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPair {
    pub from: String,
    pub to: String,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub operator: String,
    pub lambda: Complex64,
    /// Pairs with status `resolvent`, i.e. the branches through `λ`.
    pub pairs: Vec<BranchPair>,
    /// `[i, j, equivalent]` over the indices of `pairs`.
    pub equivalences: Vec<(usize, usize, bool)>,
}

/// All branches of the multivalued resolvent at `λ` and their pairwise equivalence.
pub fn branch_report(x: &CoefficientOperator, family: &ScaleFamily, lambda: Complex64, cfg: &RunConfig) -> Result<BranchReport> {
    let spaces = family.spaces();
    let mut pairs = Vec::new();
    let mut solvers = Vec::new();
    for (i, j) in family.admissible_pairs() {
        let ctx = PairContext::new(x, &spaces[i], &spaces[j], cfg)?;
        let status = ctx.classify(lambda, cfg)?.status;
        if status == Status::Resolvent {
            pairs.push(BranchPair { from: spaces[i].label().into(), to: spaces[j].label().into(), status });
            solvers.push(branch_solver(&ctx, lambda, cfg)?);
        }
    }
    let mut equivalences = Vec::new();
    if let Some(finest) = family.finest() {
        for a in 0..solvers.len() {
            for b in a + 1..solvers.len() {
                equivalences.push((a, b, equivalent(&solvers[a], &solvers[b], finest, cfg)?));
            }
        }
    }
    Ok(BranchReport { operator: x.name.clone(), lambda, pairs, equivalences })
}
