//! The momentum operator on [0,1], its circle of self-adjoint extensions, and the
//! point interaction on the line.
//!
//! Functions on [0,1] are Gauss–Legendre samples. The resolvent of `S_α` is a
//! Volterra operator plus a rank-one term, so it is evaluated by spectral
//! integration rather than through a coefficient matrix.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::quadrature::IntervalQuadrature;
use crate::resolvent::FnHandle;
use crate::scale::BasisTag;

/// `λ` counts as an eigenvalue of `S_α` when `|e^{iλ} − α|` is below this.
pub const EIGEN_TOL: f64 = 1e-12;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `S_α`: `−i d/dx` with `u(1) = α u(0)`, `|α| = 1`.
#[derive(Debug, Clone)]
pub struct MomentumExtension {
    pub alpha: Complex64,
    pub quadrature: IntervalQuadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSolve {
    pub alpha: Complex64,
    pub lambda: Complex64,
    /// `u` at the quadrature nodes.
    pub u: Vec<Complex64>,
    pub u_at_0: Complex64,
    pub u_at_1: Complex64,
    /// `|u(1) − α u(0)|`.
    pub boundary_defect: f64,
    /// `‖−iu′ − λu − g‖ / ‖g‖` in L²(0,1).
    pub residual: f64,
}

impl MomentumExtension {
    pub fn new(alpha: Complex64, nodes: usize) -> Result<Self> {
        if ((alpha.norm() - 1.0).abs()) > 1e-12 {
            return Err(Error::Precondition(format!("boundary parameter must have |alpha| = 1, got {alpha}")));
        }
        if nodes < 2 {
            return Err(Error::Precondition("need at least 2 quadrature nodes".into()));
        }
        Ok(MomentumExtension { alpha, quadrature: IntervalQuadrature::new(nodes) })
    }

    /// `α = e^{iθ}`.
    pub fn from_angle(theta: f64, nodes: usize) -> Result<Self> {
        Self::new(Complex64::from_polar(1.0, theta), nodes)
    }

    pub fn is_eigenvalue(&self, lambda: Complex64) -> bool {
        is_eigenvalue(self.alpha, lambda)
    }

    /// `arg(α) + 2kπ` for `k ∈ [kmin, kmax]`.
    pub fn eigenvalues(&self, kmin: i64, kmax: i64) -> Vec<f64> {
        (kmin..=kmax).map(|k| self.alpha.arg() + 2.0 * PI * k as f64).collect()
    }

    fn check(&self, lambda: Complex64) -> Result<()> {
        if self.is_eigenvalue(lambda) {
            return Err(Error::MomentumEigenvalue { lambda, alpha: self.alpha });
        }
        Ok(())
    }

    /// `u(0)`, the rank-one part, and the running integral `∫_0^x e^{−iλτ} g`.
    fn parts(&self, lambda: Complex64, g: &[Complex64]) -> (Complex64, Vec<Complex64>, Complex64) {
        let q = &self.quadrature;
        let damped: Vec<Complex64> = q.nodes.iter().zip(g).map(|(&x, gi)| (-I * lambda * x).exp() * gi).collect();
        let total = q.integrate(&damped);
        let e1 = (I * lambda).exp();
        let u0 = I * e1 / (self.alpha - e1) * total;
        (u0, q.cumulative(&damped), total)
    }

    /// `(S_α − λ)^{-1} g` at the nodes.
    pub fn resolvent_apply(&self, lambda: Complex64, g: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(lambda)?;
        self.check_len(g)?;
        let (u0, running, _) = self.parts(lambda, g);
        Ok(self.quadrature.nodes.iter().zip(&running).map(|(&x, r)| (I * lambda * x).exp() * (u0 + I * r)).collect())
    }

    fn check_len(&self, g: &[Complex64]) -> Result<()> {
        if g.len() != self.quadrature.len() {
            return Err(Error::Precondition(format!("expected {} node samples, got {}", self.quadrature.len(), g.len())));
        }
        Ok(())
    }

    /// The resolvent together with its boundary values and ODE residual.
    pub fn solve(&self, lambda: Complex64, g: &[Complex64]) -> Result<MomentumSolve> {
        let u = self.resolvent_apply(lambda, g)?;
        let (u_at_0, _, total) = self.parts(lambda, g);
        let u_at_1 = (I * lambda).exp() * (u_at_0 + I * total);
        let du = self.quadrature.derivative(&u);
        let r: Vec<Complex64> = (0..u.len()).map(|i| -I * du[i] - lambda * u[i] - g[i]).collect();
        let gn = self.l2_norm(g);
        let rn = self.l2_norm(&r);
        Ok(MomentumSolve {
            alpha: self.alpha,
            lambda,
            u,
            u_at_0,
            u_at_1,
            boundary_defect: (u_at_1 - self.alpha * u_at_0).norm(),
            residual: if gn > 0.0 { rn / gn } else { rn },
        })
    }

    pub fn l2_norm(&self, f: &[Complex64]) -> f64 {
        f.iter().zip(&self.quadrature.weights).map(|(v, w)| w * v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// The resolvent at `λ` as a handle on node samples (shorter inputs are zero-padded).
    pub fn resolvent_handle(&self, lambda: Complex64) -> Result<FnHandle> {
        self.check(lambda)?;
        let ext = self.clone();
        let label = format!("R({})[S_alpha, alpha={}]", crate::scale::format_complex(lambda), crate::scale::format_complex(self.alpha));
        Ok(FnHandle::new(BasisTag::Interval, label, move |v| {
            let g = v.resized(ext.quadrature.len());
            Ok(crate::scale::CoefficientVector::new(BasisTag::Interval, ext.resolvent_apply(lambda, &g.coeffs)?))
        }))
    }
}

pub fn is_eigenvalue(alpha: Complex64, lambda: Complex64) -> bool {
    ((I * lambda).exp() - alpha).norm() <= EIGEN_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KreinReport {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub lambda: Complex64,
    pub nodes: usize,
    /// `max_x |(R(S_α) − R(S_β))g(x) − closed form(x)|`.
    pub residual: f64,
    pub g_sup: f64,
    /// `residual / ‖g‖_∞`.
    pub relative: f64,
}

/// The difference of two extension resolvents as a vector of node values.
pub fn krein_difference(alpha: &MomentumExtension, beta: &MomentumExtension, lambda: Complex64, g: &[Complex64]) -> Result<Vec<Complex64>> {
    let a = alpha.resolvent_apply(lambda, g)?;
    let b = beta.resolvent_apply(lambda, g)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
}

/// `(1/(α−e^{iλ}) − 1/(β−e^{iλ})) i e^{i(x+1)λ} ∫_0^1 g(τ) e^{−iλτ} dτ` at the nodes.
pub fn krein_closed_form(alpha: Complex64, beta: Complex64, lambda: Complex64, q: &IntervalQuadrature, g: &[Complex64]) -> Vec<Complex64> {
    let e1 = (I * lambda).exp();
    let coef = 1.0 / (alpha - e1) - 1.0 / (beta - e1);
    let damped: Vec<Complex64> = q.nodes.iter().zip(g).map(|(&t, gi)| gi * (-I * lambda * t).exp()).collect();
    let total = q.integrate(&damped);
    q.nodes.iter().map(|&x| coef * I * (I * (x + 1.0) * lambda).exp() * total).collect()
}

pub fn krein_difference_check(alpha: Complex64, beta: Complex64, lambda: Complex64, g: impl Fn(f64) -> Complex64, nodes: usize) -> Result<KreinReport> {
    let sa = MomentumExtension::new(alpha, nodes)?;
    let sb = MomentumExtension::new(beta, nodes)?;
    let gs = sa.quadrature.sample(g);
    let diff = krein_difference(&sa, &sb, lambda, &gs)?;
    let closed = krein_closed_form(alpha, beta, lambda, &sa.quadrature, &gs);
    let residual = diff.iter().zip(&closed).map(|(d, c)| (d - c).norm()).fold(0.0, f64::max);
    let g_sup = gs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(KreinReport {
        alpha,
        beta,
        lambda,
        nodes,
        residual,
        g_sup,
        relative: if g_sup > 0.0 { residual / g_sup } else { residual },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub lambda: Complex64,
    /// Indices of the extensions whose resolvent set contains `λ`.
    pub resolvent_for: Vec<usize>,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub alphas: Vec<Complex64>,
    pub rows: Vec<CoverageRow>,
    pub all_covered: bool,
}

impl CoverageReport {
    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "covered", "resolvent_for"])?;
        for r in &self.rows {
            let idx: Vec<String> = r.resolvent_for.iter().map(|i| i.to_string()).collect();
            w.write_record([
                crate::report::fmt_f64(r.lambda.re),
                crate::report::fmt_f64(r.lambda.im),
                r.covered.to_string(),
                idx.join(";"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which extensions `S_α` have each point in their resolvent set.
pub fn momentum_union_resolvent(alphas: &[Complex64], points: &[Complex64]) -> Result<CoverageReport> {
    if alphas.is_empty() {
        return Err(Error::Precondition("the family of boundary parameters is empty".into()));
    }
    let rows: Vec<CoverageRow> = points
        .iter()
        .map(|&lambda| {
            let resolvent_for: Vec<usize> = (0..alphas.len()).filter(|&k| !is_eigenvalue(alphas[k], lambda)).collect();
            CoverageRow { lambda, covered: !resolvent_for.is_empty(), resolvent_for }
        })
        .collect();
    let all_covered = rows.iter().all(|r| r.covered);
    Ok(CoverageReport { alphas: alphas.to_vec(), rows, all_covered })
}

/// `−d²/dx² + α δ(· − y)` on the line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaInteraction {
    pub alpha: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDescriptor {
    /// The spectrum contains `[continuous_from, ∞)`.
    pub continuous_from: f64,
    pub eigenvalues: Vec<f64>,
    pub text: String,
}

impl SpectrumDescriptor {
    pub fn contains(&self, lambda: Complex64, tol: f64) -> bool {
        (lambda.im.abs() <= tol && lambda.re >= self.continuous_from - tol)
            || self.eigenvalues.iter().any(|&e| (lambda - e).norm() <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshLevel {
    pub h: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStateReport {
    pub alpha: f64,
    pub y: f64,
    pub half_width: f64,
    pub levels: Vec<MeshLevel>,
    pub extrapolated: f64,
    pub error_bar: f64,
    /// `−α²/4`.
    pub expected: f64,
    pub relative_error: f64,
}

impl DeltaInteraction {
    pub fn new(alpha: f64, y: f64) -> Self {
        DeltaInteraction { alpha, y }
    }

    pub fn spectrum(&self) -> SpectrumDescriptor {
        if self.alpha < 0.0 {
            let e = -self.alpha * self.alpha / 4.0;
            SpectrumDescriptor { continuous_from: 0.0, eigenvalues: vec![e], text: format!("[0,inf) u {{{}}}", crate::report::fmt_f64(e)) }
        } else {
            SpectrumDescriptor { continuous_from: 0.0, eigenvalues: vec![], text: "[0,inf)".into() }
        }
    }

    /// Lowest eigenvalue of the three-point discretization on `[y−L, y+L]` with mesh `h`,
    /// Dirichlet walls and the jump condition at the grid point `y`.
    pub fn ground_state(&self, half_width: f64, h: f64) -> f64 {
        let m = (half_width / h).round() as usize;
        let h = half_width / m as f64;
        let n = 2 * m - 1;
        let inv = 1.0 / (h * h);
        let mut diag = vec![2.0 * inv; n];
        diag[m - 1] += self.alpha / h;
        lowest_tridiagonal_eigenvalue(&diag, -inv)
    }

    pub fn bound_state_check(&self, cfg: &RunConfig) -> Result<BoundStateReport> {
        if self.alpha >= 0.0 {
            return Err(Error::NoBoundState(self.alpha));
        }
        let ic = &cfg.interval;
        let levels: Vec<MeshLevel> = (0..ic.delta_levels)
            .map(|k| {
                let h = ic.delta_h0 / (1u64 << k) as f64;
                MeshLevel { h, estimate: self.ground_state(ic.delta_half_width, h) }
            })
            .collect();
        // the scheme is second order, so the k-th column removes h^{2k}
        let mut table: Vec<Vec<f64>> = vec![levels.iter().map(|l| l.estimate).collect()];
        for k in 1..levels.len() {
            let prev = &table[k - 1];
            let f = 4f64.powi(k as i32);
            table.push((0..prev.len() - 1).map(|i| prev[i + 1] + (prev[i + 1] - prev[i]) / (f - 1.0)).collect());
        }
        let extrapolated = table[table.len() - 1][0];
        let runner_up = *table[table.len() - 2].last().expect("at least two levels");
        let expected = -self.alpha * self.alpha / 4.0;
        Ok(BoundStateReport {
            alpha: self.alpha,
            y: self.y,
            half_width: ic.delta_half_width,
            levels,
            extrapolated,
            error_bar: (extrapolated - runner_up).abs(),
            expected,
            relative_error: ((extrapolated - expected) / expected).abs(),
        })
    }
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix with constant off-diagonal,
/// by bisection on the Sturm count.
fn lowest_tridiagonal_eigenvalue(diag: &[f64], off: f64) -> f64 {
    let below = |x: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for (i, d) in diag.iter().enumerate() {
            q = d - x - if i == 0 { 0.0 } else { off * off / q };
            if q == 0.0 {
                q = f64::EPSILON * (d.abs() + x.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let r = 2.0 * off.abs();
    let mut lo = diag.iter().fold(f64::INFINITY, |m, &d| m.min(d - r));
    let mut hi = diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d + r));
    while hi - lo > 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolvent::equivalent;
    use crate::scale::ScaleSpace;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn periodic_resolvent_against_closed_form() {
        let s = MomentumExtension::new(c(1.0, 0.0), 128).unwrap();
        let g = s.quadrature.sample(|x| (I * PI * x).exp());
        let r = s.solve(c(PI, 0.0), &g).unwrap();
        // E = 1, so u = e^{iπx}(−i/2 + ix)
        for (k, &x) in s.quadrature.nodes.iter().enumerate() {
            let exact = (I * PI * x).exp() * (-I / 2.0 + I * x);
            assert!((r.u[k] - exact).norm() < 1e-13);
        }
        assert!(r.residual <= 1e-10, "{}", r.residual);
        assert!(r.boundary_defect <= 1e-12);
        assert!(matches!(s.resolvent_apply(c(2.0 * PI, 0.0), &g), Err(Error::MomentumEigenvalue { .. })));
    }

    #[test]
    fn rejects_non_unimodular_alpha() {
        assert!(MomentumExtension::new(c(2.0, 0.0), 16).is_err());
    }

    #[test]
    fn eigenvalue_lattice() {
        for theta in [0.0, PI / 2.0, PI] {
            let s = MomentumExtension::from_angle(theta, 64).unwrap();
            let g = s.quadrature.sample(|x| c(x.cos(), x));
            for k in -3..=3 {
                let ev = theta + 2.0 * PI * k as f64;
                assert!(s.resolvent_apply(c(ev, 0.0), &g).is_err());
                let r = s.solve(c(ev + PI, 0.0), &g).unwrap();
                assert!(r.residual <= 1e-8);
            }
        }
    }

    #[test]
    fn krein_examples() {
        let same = krein_difference_check(c(1.0, 0.0), c(1.0, 0.0), c(0.3, 0.2), |x| c(x, 0.0), 128).unwrap();
        assert_eq!(same.residual, 0.0);

        let r = krein_difference_check(c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), |_| c(1.0, 0.0), 256).unwrap();
        assert!(r.relative <= 1e-10);
        // closed form by hand for g ≡ 1, λ = i: ∫ e^{τ} = e − 1
        let e = std::f64::consts::E;
        let e1 = (-1.0f64).exp();
        let coef = 1.0 / (1.0 - e1) - 1.0 / (-1.0 - e1);
        let s1 = MomentumExtension::new(c(1.0, 0.0), 256).unwrap();
        let sm = MomentumExtension::new(c(-1.0, 0.0), 256).unwrap();
        let g = vec![c(1.0, 0.0); 256];
        let d = krein_difference(&s1, &sm, c(0.0, 1.0), &g).unwrap();
        for (k, &x) in s1.quadrature.nodes.iter().enumerate() {
            let exact = coef * I * (-(x + 1.0)).exp() * (e - 1.0);
            assert!((d[k] - exact).norm() < 1e-13);
        }

        let a = Complex64::from_polar(1.0, PI / 3.0);
        let r = krein_difference_check(a, a.conj(), c(0.5, 0.5), |x| c(x, 0.0), 256).unwrap();
        assert!(r.relative <= 1e-10);
    }

    #[test]
    fn krein_swap_is_exact_negation() {
        let a = Complex64::from_polar(1.0, 0.7);
        let b = Complex64::from_polar(1.0, -2.1);
        let l = c(1.3, -0.4);
        let ab = krein_difference_check(a, b, l, |x| c(x * x, 1.0 - x), 128).unwrap();
        let ba = krein_difference_check(b, a, l, |x| c(x * x, 1.0 - x), 128).unwrap();
        assert_eq!(ab.residual, ba.residual);
        let sa = MomentumExtension::new(a, 128).unwrap();
        let sb = MomentumExtension::new(b, 128).unwrap();
        let g = sa.quadrature.sample(|x| c(x.sin(), 0.0));
        let d1 = krein_difference(&sa, &sb, l, &g).unwrap();
        let d2 = krein_difference(&sb, &sa, l, &g).unwrap();
        for (x, y) in d1.iter().zip(&d2) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn coverage_examples() {
        let line: Vec<Complex64> = (0..201).map(|k| c(-10.0 + 0.1 * k as f64, 0.0)).collect();
        assert!(momentum_union_resolvent(&[c(1.0, 0.0), c(-1.0, 0.0)], &line).unwrap().all_covered);
        let r = momentum_union_resolvent(&[c(1.0, 0.0)], &[c(2.0 * PI, 0.0)]).unwrap();
        assert!(!r.rows[0].covered);
        let four = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        let grid = crate::config::Grid::parse("-10:10:41,-1:1:5").unwrap();
        assert!(momentum_union_resolvent(&four, &grid.points()).unwrap().all_covered);
        assert!(momentum_union_resolvent(&[], &line).is_err());
        // a lattice point of one extension is covered by the other
        let r = momentum_union_resolvent(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(2.0 * PI, 0.0), c(PI, 0.0)]).unwrap();
        assert_eq!(r.rows[0].resolvent_for, vec![1]);
        assert_eq!(r.rows[1].resolvent_for, vec![0]);
    }

    #[test]
    fn handles_separate_extensions() {
        let cfg = RunConfig::default();
        let space = ScaleSpace::central(BasisTag::Interval);
        let l = c(0.4, 0.3);
        let s1 = MomentumExtension::new(c(1.0, 0.0), 128).unwrap();
        let s2 = MomentumExtension::new(c(0.0, 1.0), 128).unwrap();
        let h1 = s1.resolvent_handle(l).unwrap();
        let h1b = s1.clone().resolvent_handle(l).unwrap();
        let h2 = s2.resolvent_handle(l).unwrap();
        assert!(equivalent(&h1, &h1b, &space, &cfg).unwrap());
        assert!(!equivalent(&h1, &h2, &space, &cfg).unwrap());
    }

    #[test]
    fn delta_interaction() {
        let cfg = RunConfig::default();
        let d = DeltaInteraction::new(-2.0, 0.0);
        assert_eq!(d.spectrum().eigenvalues, vec![-1.0]);
        assert!(d.spectrum().contains(c(-1.0, 0.0), 1e-12));
        assert!(!d.spectrum().contains(c(-0.5, 0.0), 1e-12));
        let r = d.bound_state_check(&cfg).unwrap();
        assert!(r.relative_error <= 0.01);
        // discrete ground state is −2(√(1+h²) − 1)/h² exactly
        for l in &r.levels {
            let exact = -2.0 * ((1.0 + l.h * l.h).sqrt() - 1.0) / (l.h * l.h);
            assert!((l.estimate - exact).abs() < 1e-9, "{} vs {exact}", l.estimate);
        }
        assert!((r.extrapolated + 1.0).abs() <= r.error_bar.max(1e-9) * 10.0);

        let repulsive = DeltaInteraction::new(3.0, 0.5);
        assert!(repulsive.spectrum().eigenvalues.is_empty());
        assert!(matches!(repulsive.bound_state_check(&cfg), Err(Error::NoBoundState(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn ode_and_boundary_hold_off_the_lattice(theta in -3.0f64..3.0, re in -12.0f64..12.0, im in -2.0f64..2.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let s = MomentumExtension::from_angle(theta, 128).unwrap();
            let l = c(re, im);
            prop_assume!(((I * l).exp() - s.alpha).norm() > 1e-3);
            let g = s.quadrature.sample(|x| c((a * x).cos(), (b * x).sin() + x));
            let r = s.solve(l, &g).unwrap();
            prop_assert!(r.residual <= 1e-8, "{}", r.residual);
            prop_assert!(r.boundary_defect <= 1e-12 * (1.0 + r.u_at_0.norm()));
        }
    }
}
