//! Generalized eigenvectors of the Hermite position operator and the
//! completeness expansion they carry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models;
use crate::operator::{certify, CoefficientOperator};
use crate::quadrature::gauss_legendre;
use crate::scale::{series_sum, BasisTag, CoefficientVector, ScaleFamily, ScaleSpace};

/// Beyond this distance past the turning point `√(2n+1)` every `φ_k(x)`, `k < n`, underflows.
pub fn hermite_safe_bound(n: usize) -> f64 {
    (2.0 * n as f64 + 1.0).sqrt() + 36.0
}

const RESCALE: f64 = 1e150;

/// Normalized Hermite functions `φ_0(x), …, φ_{n−1}(x)`.
///
/// Runs the three-term recurrence on a rescaled pair and folds the Gaussian factor
/// back in per entry, so nothing overflows even where `e^{−x²/2}` alone would underflow.
pub fn hermite_functions(x: f64, n: usize) -> Result<Vec<f64>> {
    let bound = hermite_safe_bound(n);
    if !x.is_finite() || x.abs() > bound {
        return Err(Error::RecurrenceOverflow { lambda: x.abs(), bound });
    }
    let mut out = vec![0.0; n];
    if n == 0 {
        return Ok(out);
    }
    // φ_k = p_k · exp(log_scale), p_0 = π^{-1/4}
    let mut log_scale = -0.5 * x * x;
    let (mut prev, mut cur) = (0.0, std::f64::consts::PI.powf(-0.25));
    out[0] = cur * log_scale.exp();
    for k in 0..n - 1 {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            log_scale += RESCALE.ln();
        }
        out[k + 1] = cur * log_scale.exp();
    }
    Ok(out)
}

/// `Σ_m c_m φ_m(x)`.
pub fn hermite_synthesis(coeffs: &[Complex64], x: f64) -> Result<Complex64> {
    let phi = hermite_functions(x, coeffs.len())?;
    Ok(coeffs.iter().zip(&phi).map(|(c, p)| c * *p).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedEigenpair {
    pub lambda: f64,
    pub vector: CoefficientVector,
    pub home_space: String,
    pub target_space: String,
    /// `‖(X − λ)v‖_target / ‖v‖_home` at the truncation of `v`.
    pub residual: f64,
    pub membership_norm: f64,
}

/// The Dirac delta at `λ` as the coefficient vector `(φ_n(λ))_{n<N}` in `ℋ_{−s}`.
pub fn delta_eigenvector_hermite(lambda: f64, s: f64, n: usize) -> Result<GeneralizedEigenpair> {
    if !(s >= 1.0) {
        return Err(Error::Precondition(format!("home index -s needs s >= 1, got s = {s}")));
    }
    let entry = models::hermite_position();
    let home = ScaleSpace::hermite(-s);
    let target = entry.family.coarsest().expect("nonempty chain").clone();
    let phi = hermite_functions(lambda, n)?;
    let v: Vec<Complex64> = phi.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    let mut r = entry.operator.apply_slice(&v, n);
    for (ri, vi) in r.iter_mut().zip(&v) {
        *ri -= lambda * vi;
    }
    let membership_norm = home.norm_of(&v);
    Ok(GeneralizedEigenpair {
        lambda,
        residual: target.norm_of(&r) / membership_norm,
        vector: CoefficientVector::new(BasisTag::Hermite, v),
        home_space: home.label().into(),
        target_space: target.label().into(),
        membership_norm,
    })
}

const MEMBERSHIP_LOG2: u32 = 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub lambda: f64,
    pub s: f64,
    /// `(N, ‖(φ_n(λ))_{n<N}‖_{−s})` for `N = 2^6, …, 2^21`.
    pub partial_norms: Vec<(usize, f64)>,
    /// Full norm from the dyadic-block series test; `null` when the series diverges.
    #[serde(with = "crate::report::inf_as_null")]
    pub norm: f64,
    pub member: bool,
}

/// Whether `δ_λ` lies in `ℋ_{−s}`, judged from partial sums of `Σ |φ_n(λ)|² w_{−s}(n)²`.
pub fn delta_membership(lambda: f64, s: f64) -> Result<MembershipReport> {
    let len = 1usize << MEMBERSHIP_LOG2;
    let phi = hermite_functions(lambda, len)?;
    let space = ScaleSpace::hermite(-s);
    let term = |n: u64| {
        let i = n as usize;
        if i < len { (phi[i] * space.weight(n)).powi(2) } else { 0.0 }
    };
    let mut partial_norms = Vec::new();
    let mut acc = 0.0;
    let mut next = 64usize;
    for i in 0..len {
        acc += term(i as u64);
        if i + 1 == next {
            partial_norms.push((next, acc.sqrt()));
            next *= 2;
        }
    }
    let norm = series_sum(term).sqrt();
    Ok(MembershipReport { lambda, s, partial_norms, norm, member: norm.is_finite() })
}

/// Smallest `s` among `candidates` (ascending) with `δ_λ ∈ ℋ_{−s}`.
pub fn smallest_member_index(lambda: f64, candidates: &[f64]) -> Result<Option<f64>> {
    for &s in candidates {
        if delta_membership(lambda, s)?.member {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub modes: usize,
    pub nodes: usize,
    /// `max_n |∫ φ(λ) φ_n(λ) dλ − c_n|`.
    pub reconstruction_error: f64,
    /// `|∫ |φ(λ)|² dλ − Σ |c_n|²|`.
    pub parseval_error: f64,
    /// Coefficients beyond the resolvable range are not negligible.
    pub tail_warning: bool,
}

pub const EXPANSION_NODES: usize = 400;
pub const EXPANSION_HALF_WIDTH: f64 = 20.0;
/// Modes the default quadrature resolves; coefficients past this trigger the tail warning.
const RESOLVED_MODES: usize = 128;

/// Reconstructs the coefficients of `φ = Σ c_m φ_m` from its values on the line.
pub fn expansion_check(phi: &CoefficientVector, nodes: usize) -> Result<ExpansionReport> {
    crate::scale::check_basis(phi.basis, BasisTag::Hermite)?;
    let c = &phi.coeffs;
    let modes = c.len();
    let (xs, ws) = gauss_legendre(nodes, -EXPANSION_HALF_WIDTH, EXPANSION_HALF_WIDTH);
    let mut recon = vec![Complex64::default(); modes];
    let mut integral_sq = 0.0;
    for (&x, &w) in xs.iter().zip(&ws) {
        let basis = hermite_functions(x, modes)?;
        let value: Complex64 = c.iter().zip(&basis).map(|(a, p)| a * *p).sum();
        integral_sq += w * value.norm_sqr();
        for (r, p) in recon.iter_mut().zip(&basis) {
            *r += value * (w * p);
        }
    }
    let reconstruction_error = recon.iter().zip(c).map(|(r, a)| (r - a).norm()).fold(0.0, f64::max);
    let sum_sq: f64 = c.iter().map(|a| a.norm_sqr()).sum();
    let peak = phi.max_abs();
    let tail_warning = c.iter().skip(RESOLVED_MODES).any(|a| a.norm() > 1e-12 * peak);
    Ok(ExpansionReport {
        modes,
        nodes,
        reconstruction_error,
        parseval_error: (integral_sq - sum_sq).abs(),
        tail_warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub operator: String,
    pub index: f64,
    pub truncation: usize,
    /// Basis vectors whose image has finite ℋ-norm at this truncation.
    pub domain_dimension: usize,
    /// Whether `X` is certified bounded from `ℋ_n` into ℋ.
    pub bounded_from_index: bool,
    pub numerical_rank: usize,
    /// `max |X_{ij} − conj X_{ji}|` of the truncated restriction.
    pub symmetry_defect: f64,
    pub max_imag_eigenvalue: f64,
    pub note: String,
}

/// The restriction `X_{0,n}` of `X` to `ℋ ∩ ℋ_n` with values in ℋ, seen at truncation.
pub fn restricted_operator(x: &CoefficientOperator, family: &ScaleFamily, index: f64, truncation: usize, cfg: &RunConfig) -> Result<RestrictionReport> {
    let space = family
        .spaces()
        .iter()
        .find(|s| s.index() == Some(index))
        .ok_or_else(|| Error::Precondition(format!("family has no space with index {index}")))?;
    let central = ScaleSpace::central(family.basis());
    let bounded_from_index = certify(x, space, &central, cfg)?.is_certified();
    let m = x.truncate(truncation);
    let domain_dimension = (0..truncation)
        .filter(|&j| (0..truncation).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().is_finite())
        .count();
    let mut symmetry_defect = 0.0f64;
    for i in 0..truncation {
        for j in 0..truncation {
            symmetry_defect = symmetry_defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    let s = linalg::singular_values(&m)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let numerical_rank = s.iter().filter(|&&v| v > 1e-8 * smax).count();
    let max_imag_eigenvalue = if symmetry_defect <= 1e-14 * smax.max(1.0) {
        linalg::hermitian_eigenvalues(&m)?;
        0.0
    } else {
        linalg::eigenvalues(&m)?.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    };
    let note = if x.symmetric {
        "densely defined, essentially self-adjoint (by model construction)".to_string()
    } else {
        "not flagged symmetric".to_string()
    };
    Ok(RestrictionReport {
        operator: x.name.clone(),
        index,
        truncation,
        domain_dimension,
        bounded_from_index,
        numerical_rank,
        symmetry_defect,
        max_imag_eigenvalue,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn low_order_functions_match_closed_forms() {
        for x in [-2.5, -0.3, 0.0, 1.0, 4.0] {
            let phi = hermite_functions(x, 4).unwrap();
            let g = std::f64::consts::PI.powf(-0.25) * (-x * x / 2.0).exp();
            assert!((phi[0] - g).abs() < 1e-15);
            assert!((phi[1] - 2f64.sqrt() * x * g).abs() < 1e-15);
            assert!((phi[2] - (2.0 * x * x - 1.0) / 2f64.sqrt() * g).abs() < 1e-14);
            assert!((phi[3] - (2.0 * x * x * x - 3.0 * x) / 3f64.sqrt() * g).abs() < 1e-14);
        }
    }

    #[test]
    fn parity_at_zero_and_reflection() {
        let phi = hermite_functions(0.0, 64).unwrap();
        for k in (1..64).step_by(2) {
            assert_eq!(phi[k], 0.0);
        }
        for x in [0.5, 1.0, 2.0, 3.0] {
            let (a, b) = (hermite_functions(x, 300).unwrap(), hermite_functions(-x, 300).unwrap());
            for k in 0..300 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(b[k], sign * a[k]);
            }
        }
    }

    #[test]
    fn far_arguments_are_rejected() {
        assert!(hermite_functions(6.0, 4096).is_ok());
        assert!(matches!(hermite_functions(200.0, 64), Err(Error::RecurrenceOverflow { .. })));
    }

    #[test]
    fn orthonormality_by_quadrature() {
        let (xs, ws) = gauss_legendre(400, -20.0, 20.0);
        let mut gram = [[0.0; 6]; 6];
        for (&x, &w) in xs.iter().zip(&ws) {
            let p = hermite_functions(x, 6).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    gram[i][j] += w * p[i] * p[j];
                }
            }
        }
        for (i, row) in gram.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn delta_residual_small_and_decreasing() {
        let mut prev = f64::INFINITY;
        for n in [256, 512, 1024] {
            let p = delta_eigenvector_hermite(1.0, 1.0, n).unwrap();
            assert!(p.residual <= prev);
            prev = p.residual;
        }
        assert!(prev <= 1e-6, "{prev}");
        assert!(delta_eigenvector_hermite(1.0, 0.5, 64).is_err());
    }

    #[test]
    fn membership_partial_sums_stabilize() {
        let m = delta_membership(1.0, 1.0).unwrap();
        assert!(m.member);
        let k = m.partial_norms.len();
        let (a, b) = (m.partial_norms[k - 2].1, m.partial_norms[k - 1].1);
        assert!((b * b - a * a).abs() <= 1e-8 * b * b);
        assert!(!delta_membership(1.0, 0.25).unwrap().member);
        assert_eq!(smallest_member_index(1.0, &[0.25, 0.5, 1.0]).unwrap(), Some(0.5));
    }

    #[test]
    fn expansion_of_basis_vectors() {
        let e0 = CoefficientVector::unit(BasisTag::Hermite, 0, 32);
        let r = expansion_check(&e0, EXPANSION_NODES).unwrap();
        assert!(r.reconstruction_error <= 1e-8 && !r.tail_warning);
        let e3 = CoefficientVector::unit(BasisTag::Hermite, 3, 32);
        assert!(expansion_check(&e3, EXPANSION_NODES).unwrap().reconstruction_error <= 1e-7);
        let zero = CoefficientVector::zeros(BasisTag::Hermite, 32);
        let z = expansion_check(&zero, EXPANSION_NODES).unwrap();
        assert_eq!(z.reconstruction_error, 0.0);
        assert_eq!(z.parseval_error, 0.0);
    }

    #[test]
    fn restriction_reports() {
        let cfg = RunConfig::default();
        let mx = models::hermite_position();
        let r = restricted_operator(&mx.operator, &mx.family, 1.0, 256, &cfg).unwrap();
        assert!(r.max_imag_eigenvalue <= 1e-12);
        assert!(r.bounded_from_index);
        assert_eq!(r.domain_dimension, 256);
        let d = models::torus_delta();
        let r = restricted_operator(&d.operator, &d.family, 1.0, 64, &cfg).unwrap();
        assert_eq!(r.numerical_rank, 1);
        assert_eq!(r.domain_dimension, 64);
        let a = models::hilbert_scale_generator();
        let r = restricted_operator(&a.operator, &a.family, 1.0, 64, &cfg).unwrap();
        assert_eq!(r.symmetry_defect, 0.0);
        assert_eq!(r.numerical_rank, 64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn expansion_is_linear(
            a in -2.0f64..2.0, b in -2.0f64..2.0,
            u in proptest::collection::vec(-1.0f64..1.0, 32),
            v in proptest::collection::vec(-1.0f64..1.0, 32),
        ) {
            let phi = CoefficientVector::from_real(BasisTag::Hermite, &u);
            let psi = CoefficientVector::from_real(BasisTag::Hermite, &v);
            let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
            let mix = CoefficientVector::from_real(BasisTag::Hermite, &combo);
            let e = |w: &CoefficientVector| expansion_check(w, EXPANSION_NODES).unwrap();
            let (ep, eq, em) = (e(&phi), e(&psi), e(&mix));
            prop_assert!(em.reconstruction_error <= a.abs() * ep.reconstruction_error + b.abs() * eq.reconstruction_error + 1e-12);
            prop_assert!(ep.reconstruction_error <= 1e-6);
            prop_assert!(ep.parseval_error <= 1e-6);
        }
    }
}
