//! Operators in 𝔏(𝒟,𝒟^×) as infinite coefficient matrices.

use std::fmt;
use std::sync::Arc;

use faer::{c64, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{self, Section};
use crate::scale::{check_basis, log_sup, BasisTag, CoefficientVector, ScaleFamily, ScaleSpace, Sequence};

/// A pure entry generator `(n, m) ↦ X_{n,m}`.
#[derive(Clone)]
pub struct Kernel {
    label: String,
    f: Arc<dyn Fn(u64, u64) -> Complex64 + Send + Sync>,
}

impl Kernel {
    pub fn new(label: impl Into<String>, f: impl Fn(u64, u64) -> Complex64 + Send + Sync + 'static) -> Self {
        Kernel { label: label.into(), f: Arc::new(f) }
    }

    pub fn parse(src: &str) -> Result<Self> {
        let expr = Expr::parse(src, &["n", "m"])?;
        Ok(Kernel::new(src.trim(), move |n, m| {
            expr.eval(&[Complex64::new(n as f64, 0.0), Complex64::new(m as f64, 0.0)])
        }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, n: u64, m: u64) -> Complex64 {
        (self.f)(n, m)
    }

    fn adjoint(&self) -> Kernel {
        let f = self.f.clone();
        Kernel::new(format!("adj({})", self.label), move |n, m| f(m, n).conj())
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel({:?})", self.label)
    }
}

#[derive(Debug, Clone)]
pub enum Rep {
    Diagonal { symbol: Sequence },
    /// Entries vanish for `|n − m| > bandwidth`.
    Banded { bandwidth: usize, entry: Kernel },
    /// `Σ_t ⟨·, u_t⟩ v_t`, i.e. entries `Σ_t v_t(n) conj(u_t(m))`.
    RankSum { terms: Vec<(Sequence, Sequence)> },
    Dense { entry: Kernel },
}

#[derive(Debug, Clone)]
pub struct CoefficientOperator {
    pub name: String,
    pub basis: BasisTag,
    pub rep: Rep,
    pub symmetric: bool,
}

impl CoefficientOperator {
    pub fn diagonal(name: impl Into<String>, basis: BasisTag, symbol: Sequence) -> Self {
        CoefficientOperator { name: name.into(), basis, rep: Rep::Diagonal { symbol }, symmetric: false }
    }

    pub fn diagonal_expr(basis: BasisTag, symbol: &str) -> Result<Self> {
        let seq = Sequence::parse(symbol)?;
        let real = (0..64).all(|n| seq.at(n).im == 0.0);
        let mut op = Self::diagonal(format!("diag({symbol})"), basis, seq);
        op.symmetric = real;
        Ok(op)
    }

    pub fn banded(name: impl Into<String>, basis: BasisTag, bandwidth: usize, entry: Kernel, symmetric: bool) -> Self {
        CoefficientOperator { name: name.into(), basis, rep: Rep::Banded { bandwidth, entry }, symmetric }
    }

    pub fn rank_sum(name: impl Into<String>, basis: BasisTag, terms: Vec<(Sequence, Sequence)>) -> Self {
        CoefficientOperator { name: name.into(), basis, rep: Rep::RankSum { terms }, symmetric: false }
    }

    pub fn dense(name: impl Into<String>, basis: BasisTag, entry: Kernel) -> Self {
        CoefficientOperator { name: name.into(), basis, rep: Rep::Dense { entry }, symmetric: false }
    }

    pub fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn entry(&self, n: u64, m: u64) -> Complex64 {
        match &self.rep {
            Rep::Diagonal { symbol } => {
                if n == m {
                    symbol.at(n)
                } else {
                    Complex64::default()
                }
            }
            Rep::Banded { bandwidth, entry } => {
                if n.abs_diff(m) <= *bandwidth as u64 {
                    entry.at(n, m)
                } else {
                    Complex64::default()
                }
            }
            Rep::RankSum { terms } => terms.iter().map(|(u, v)| v.at(n) * u.at(m).conj()).sum(),
            Rep::Dense { entry } => entry.at(n, m),
        }
    }

    /// Number of nonzero subdiagonals, `None` when unbounded.
    pub fn lower_bandwidth(&self) -> Option<usize> {
        match &self.rep {
            Rep::Diagonal { .. } => Some(0),
            Rep::Banded { bandwidth, .. } => Some(*bandwidth),
            _ => None,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.rep, Rep::Diagonal { .. })
    }

    /// Leading `N x N` block of the coefficient matrix.
    pub fn truncate(&self, n: usize) -> Mat<c64> {
        self.block(n, n)
    }

    pub fn block(&self, rows: usize, cols: usize) -> Mat<c64> {
        match &self.rep {
            Rep::RankSum { terms } => {
                let us: Vec<Vec<Complex64>> = terms.iter().map(|(u, _)| u.take(cols)).collect();
                let vs: Vec<Vec<Complex64>> = terms.iter().map(|(_, v)| v.take(rows)).collect();
                Mat::from_fn(rows, cols, |i, j| us.iter().zip(&vs).map(|(u, v)| v[i] * u[j].conj()).sum())
            }
            _ => Mat::from_fn(rows, cols, |i, j| self.entry(i as u64, j as u64)),
        }
    }

    /// Weighted section `W_F (X − shift) W_E^{-1}`, `rows x cols`.
    ///
    /// Entries are scaled by `exp(ln w_F(i) − ln w_E(j))` in one multiplication, which
    /// makes the section for `(X†, F^×, E^×)` the exact conjugate transpose.
    pub fn weighted_section(&self, shift: Complex64, e: &ScaleSpace, f: &ScaleSpace, rows: usize, cols: usize) -> Section {
        let lf = f.ln_weights(rows);
        let le = e.ln_weights(cols);
        if let Rep::Diagonal { symbol } = &self.rep {
            let k = rows.min(cols);
            let diag = (0..k).map(|i| (symbol.at(i as u64) - shift) * (lf[i] - le[i]).exp()).collect();
            return Section::Diagonal { diag, rows, cols };
        }
        let raw = self.block(rows, cols);
        Section::Dense(Mat::from_fn(rows, cols, |i, j| {
            let x = if i == j { raw[(i, j)] - shift } else { raw[(i, j)] };
            x * (lf[i] - le[j]).exp()
        }))
    }

    /// `truncate(X, N)·ξ` with `N = len(ξ)`.
    pub fn apply(&self, v: &CoefficientVector) -> Result<CoefficientVector> {
        check_basis(self.basis, v.basis)?;
        Ok(CoefficientVector::new(self.basis, self.apply_slice(&v.coeffs, v.len())))
    }

    pub(crate) fn apply_slice(&self, x: &[Complex64], rows: usize) -> Vec<Complex64> {
        let n = x.len();
        match &self.rep {
            Rep::Diagonal { symbol } => (0..rows).map(|i| if i < n { symbol.at(i as u64) * x[i] } else { Complex64::default() }).collect(),
            Rep::Banded { bandwidth, entry } => (0..rows)
                .map(|i| {
                    let lo = i.saturating_sub(*bandwidth);
                    let hi = (i + bandwidth + 1).min(n);
                    (lo..hi).map(|j| entry.at(i as u64, j as u64) * x[j]).sum()
                })
                .collect(),
            Rep::RankSum { terms } => {
                let mut out = vec![Complex64::default(); rows];
                for (u, v) in terms {
                    let c: Complex64 = (0..n).map(|j| x[j] * u.at(j as u64).conj()).sum();
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += v.at(i as u64) * c;
                    }
                }
                out
            }
            Rep::Dense { entry } => {
                (0..rows).map(|i| (0..n).map(|j| entry.at(i as u64, j as u64) * x[j]).sum()).collect()
            }
        }
    }

    /// `θ_X(ξ, η) = ⟨Xξ, η⟩ = η^* X_N ξ`, `N` the longer truncation.
    pub fn sesq_form(&self, xi: &CoefficientVector, eta: &CoefficientVector) -> Result<Complex64> {
        check_basis(self.basis, xi.basis)?;
        check_basis(self.basis, eta.basis)?;
        let n = xi.len().max(eta.len());
        let x = self.apply(&xi.resized(n))?;
        x.pairing(&eta.resized(n))
    }

    pub fn adjoint(&self) -> CoefficientOperator {
        if self.symmetric {
            return self.clone();
        }
        let name = match self.name.strip_suffix('†') {
            Some(base) => base.to_string(),
            None => format!("{}†", self.name),
        };
        let rep = match &self.rep {
            Rep::Diagonal { symbol } => Rep::Diagonal { symbol: symbol.conj() },
            Rep::Banded { bandwidth, entry } => Rep::Banded { bandwidth: *bandwidth, entry: entry.adjoint() },
            Rep::RankSum { terms } => Rep::RankSum { terms: terms.iter().map(|(u, v)| (v.clone(), u.clone())).collect() },
            Rep::Dense { entry } => Rep::Dense { entry: entry.adjoint() },
        };
        CoefficientOperator { name, basis: self.basis, rep, symmetric: false }
    }

    /// Adds `c·I`.
    pub fn shifted(&self, c: Complex64) -> CoefficientOperator {
        let name = format!("{} + ({})", self.name, crate::scale::format_complex(c));
        let symmetric = self.symmetric && c.im == 0.0;
        match &self.rep {
            Rep::Diagonal { symbol } => {
                let s = symbol.clone();
                CoefficientOperator::diagonal(name, self.basis, Sequence::new(format!("{}+c", s.label()), move |n| s.at(n) + c))
                    .with_symmetric(symmetric)
            }
            Rep::Banded { bandwidth, entry } => {
                let e = entry.clone();
                let k = Kernel::new(format!("{}+cI", e.label()), move |n, m| if n == m { e.at(n, m) + c } else { e.at(n, m) });
                CoefficientOperator::banded(name, self.basis, *bandwidth, k, symmetric)
            }
            _ => {
                let x = self.clone();
                let k = Kernel::new(format!("{}+cI", x.name), move |n, m| if n == m { x.entry(n, m) + c } else { x.entry(n, m) });
                CoefficientOperator::dense(name, self.basis, k).with_symmetric(symmetric)
            }
        }
    }

    pub fn from_spec(spec: &OperatorSpec) -> Result<CoefficientOperator> {
        let symmetric = spec.symmetric;
        let name = spec.name.clone();
        let op = match &spec.rep {
            RepSpec::Diagonal { symbol } => {
                let seq = Sequence::parse(symbol)?;
                CoefficientOperator::diagonal(name.unwrap_or_else(|| format!("diag({symbol})")), spec.basis, seq)
            }
            RepSpec::Banded { bands } => {
                let mut parsed = Vec::new();
                for b in bands {
                    parsed.push((b.offset, Expr::parse(&b.entry, &["n"])?));
                }
                let bandwidth = parsed.iter().map(|(o, _)| o.unsigned_abs() as usize).max().unwrap_or(0);
                let label = bands.iter().map(|b| format!("{}:{}", b.offset, b.entry)).collect::<Vec<_>>().join(";");
                let kernel = Kernel::new(label, move |n, m| {
                    let offset = m as i64 - n as i64;
                    parsed
                        .iter()
                        .filter(|(o, _)| *o == offset)
                        .map(|(_, e)| e.eval_real(n as f64))
                        .sum()
                });
                CoefficientOperator::banded(name.unwrap_or_else(|| "banded".into()), spec.basis, bandwidth, kernel, false)
            }
            RepSpec::RankSum { terms } => {
                let mut parsed = Vec::new();
                for t in terms {
                    parsed.push((Sequence::parse(&t.u)?, Sequence::parse(&t.v)?));
                }
                CoefficientOperator::rank_sum(name.unwrap_or_else(|| "rank-sum".into()), spec.basis, parsed)
            }
            RepSpec::Dense { entry } => {
                CoefficientOperator::dense(name.unwrap_or_else(|| format!("dense({entry})")), spec.basis, Kernel::parse(entry)?)
            }
            RepSpec::ToeplitzTorus { symbol } => {
                check_basis(BasisTag::Fourier, spec.basis)?;
                let mut op = crate::models::toeplitz_torus(symbol)?;
                if let Some(n) = name {
                    op.name = n;
                }
                op
            }
            RepSpec::Gallery { entry } => {
                let g = crate::models::gallery_entry(entry)?;
                check_basis(g.operator.basis, spec.basis)?;
                g.operator
            }
        };
        let op = op.with_symmetric(symmetric);
        if symmetric && !op.is_hermitian_at(32) {
            return Err(Error::InvalidConfig(format!("operator `{}` declared symmetric but its 32x32 section is not Hermitian", op.name)));
        }
        Ok(op)
    }

    pub fn from_json(text: &str) -> Result<CoefficientOperator> {
        let spec: OperatorSpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    pub fn is_hermitian_at(&self, n: usize) -> bool {
        let m = self.truncate(n);
        (0..n).all(|i| (0..n).all(|j| m[(i, j)] == m[(j, i)].conj()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    /// Column offset `m − n`.
    pub offset: i64,
    /// Expression in the row index `n`.
    pub entry: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub u: String,
    pub v: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RepSpec {
    Diagonal { symbol: String },
    Banded { bands: Vec<BandSpec> },
    RankSum { terms: Vec<TermSpec> },
    Dense { entry: String },
    ToeplitzTorus { symbol: String },
    Gallery { entry: String },
}

/// JSON form of a [`CoefficientOperator`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub basis: BasisTag,
    pub rep: RepSpec,
    #[serde(default)]
    pub symmetric: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertMethod {
    AnalyticExact,
    TruncationStabilized,
    Failed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityCertificate {
    pub operator: String,
    pub from: String,
    pub to: String,
    /// `+∞` exactly when the method is `failed`; serialized as `null` then.
    #[serde(with = "crate::report::inf_as_null")]
    pub norm_bound: f64,
    pub lower_bound: f64,
    pub method: CertMethod,
    pub witness_n: usize,
}

impl ContinuityCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self.method, CertMethod::AnalyticExact | CertMethod::TruncationStabilized)
    }
}

/// σ_max of the square weighted `N x N` section of `X` from E to F.
pub fn section_norm(x: &CoefficientOperator, e: &ScaleSpace, f: &ScaleSpace, n: usize) -> Result<f64> {
    match x.weighted_section(Complex64::default(), e, f, n, n) {
        Section::Dense(m) => Ok(linalg::singular_values_canonical(&m)?.first().copied().unwrap_or(0.0)),
        s => Ok(s.singular_values()?.first().copied().unwrap_or(0.0)),
    }
}

/// Continuity certificate for `X ∈ C(E, F)`.
pub fn certify(x: &CoefficientOperator, e: &ScaleSpace, f: &ScaleSpace, cfg: &RunConfig) -> Result<ContinuityCertificate> {
    check_basis(x.basis, e.basis())?;
    check_basis(x.basis, f.basis())?;
    let mut cert = ContinuityCertificate {
        operator: x.name.clone(),
        from: e.label().to_string(),
        to: f.label().to_string(),
        norm_bound: f64::INFINITY,
        lower_bound: 0.0,
        method: CertMethod::Failed,
        witness_n: 0,
    };
    match &x.rep {
        Rep::Diagonal { symbol } => {
            // grouped so that the dual pair (F^×, E^×) rounds identically
            let ln_sup = log_sup(|n| symbol.at(n).norm().ln() + (f.ln_weight(n) - e.ln_weight(n)));
            let bound = ln_sup.exp();
            if bound.is_finite() {
                cert.norm_bound = bound;
                cert.lower_bound = bound;
                cert.method = CertMethod::AnalyticExact;
            }
        }
        Rep::RankSum { terms } => {
            let ed = e.dual();
            let upper: f64 = terms.iter().map(|(u, v)| ed.sequence_norm(u) * f.sequence_norm(v)).sum();
            let n = (cfg.truncation.n0 * 8).min(cfg.dense_cap());
            cert.lower_bound = if let [(u, v)] = terms.as_slice() {
                // the section of a single term is itself rank one
                ed.norm_of(&u.take(n)) * f.norm_of(&v.take(n))
            } else {
                // 0 stays a valid lower bound if the SVD of a badly scaled section fails
                match section_norm(x, e, f, n) {
                    Err(Error::Linalg(_)) => 0.0,
                    other => other?,
                }
            };
            cert.witness_n = n;
            if upper.is_finite() {
                cert.norm_bound = upper;
                cert.method = CertMethod::AnalyticExact;
            }
        }
        Rep::Banded { .. } | Rep::Dense { .. } => {
            let tr = &cfg.truncation;
            let cap = cfg.dense_cap();
            let mut ests: Vec<(usize, f64)> = Vec::new();
            let mut n = tr.n0;
            cert.method = CertMethod::Inconclusive;
            while n <= cap {
                let est = section_norm(x, e, f, n)?;
                ests.push((n, est));
                cert.lower_bound = est;
                cert.witness_n = n;
                let k = ests.len();
                if k >= 2 {
                    let (n_prev, prev) = ests[k - 2];
                    if (est - prev).abs() < tr.rel_tol * est.max(f64::MIN_POSITIVE) || (est == 0.0 && prev == 0.0) {
                        cert.norm_bound = est;
                        cert.method = CertMethod::TruncationStabilized;
                        cert.witness_n = n_prev;
                        break;
                    }
                }
                if k >= 4 && ests[k - 1].1 >= tr.growth_threshold * ests[k - 4].1 {
                    cert.method = CertMethod::Failed;
                    break;
                }
                n *= 2;
            }
        }
    }
    Ok(cert)
}

/// Result of a framework product: the product operator and every admissible triple.
#[derive(Debug, Clone)]
pub struct FrameworkProduct {
    pub operator: CoefficientOperator,
    /// `(E, F, G)` positions in the family with `Y ∈ C(E,F)` and `X ∈ C(F,G)`.
    pub triples: Vec<(usize, usize, usize)>,
}

/// Admissible triples for the partial product `X·Y` in a family.
pub fn admissible_triples(
    x: &CoefficientOperator,
    y: &CoefficientOperator,
    family: &ScaleFamily,
    cfg: &RunConfig,
) -> Result<Vec<(usize, usize, usize)>> {
    check_basis(x.basis, y.basis)?;
    check_basis(x.basis, family.basis())?;
    if !family.closed_under_duality() {
        return Err(Error::Precondition("framework product needs a family closed under duality".into()));
    }
    let spaces = family.spaces();
    let mut x_ok = vec![vec![false; spaces.len()]; spaces.len()];
    for (i, f) in spaces.iter().enumerate() {
        for (j, g) in spaces.iter().enumerate() {
            x_ok[i][j] = certify(x, f, g, cfg)?.is_certified();
        }
    }
    let mut triples = Vec::new();
    for (a, e) in spaces.iter().enumerate() {
        for (b, f) in spaces.iter().enumerate() {
            if !x_ok[b].iter().any(|&ok| ok) {
                continue;
            }
            if certify(y, e, f, cfg)?.is_certified() {
                for (c, _) in spaces.iter().enumerate() {
                    if x_ok[b][c] {
                        triples.push((a, b, c));
                    }
                }
            }
        }
    }
    Ok(triples)
}

/// `X·Y ξ = X_F Y ξ` when some triple makes both factors continuous.
pub fn framework_product(
    x: &CoefficientOperator,
    y: &CoefficientOperator,
    family: &ScaleFamily,
    cfg: &RunConfig,
) -> Result<FrameworkProduct> {
    let triples = admissible_triples(x, y, family, cfg)?;
    if triples.is_empty() {
        return Err(Error::ProductUndefined { left: x.name.clone(), right: y.name.clone() });
    }
    Ok(FrameworkProduct { operator: matrix_product(x, y)?, triples })
}

/// Coefficient matrix of `XY`, when each entry is a finite sum.
pub fn matrix_product(x: &CoefficientOperator, y: &CoefficientOperator) -> Result<CoefficientOperator> {
    check_basis(x.basis, y.basis)?;
    let name = format!("{}·{}", x.name, y.name);
    let symmetric = false;
    if let (Rep::Diagonal { symbol: a }, Rep::Diagonal { symbol: b }) = (&x.rep, &y.rep) {
        let (a, b) = (a.clone(), b.clone());
        let label = format!("({})*({})", a.label(), b.label());
        return Ok(CoefficientOperator::diagonal(name, x.basis, Sequence::new(label, move |n| a.at(n) * b.at(n))));
    }
    // rows of X or columns of Y must be finitely supported
    let (xb, yb) = (x.lower_bandwidth(), y.lower_bandwidth());
    let (xc, yc) = (x.clone(), y.clone());
    let entry = match (xb, yb) {
        (Some(bx), Some(by)) => {
            let k = Kernel::new(name.clone(), move |n, m| {
                let lo = n.saturating_sub(bx as u64).max(m.saturating_sub(by as u64));
                let hi = (n + bx as u64).min(m + by as u64);
                (lo..=hi).map(|k| xc.entry(n, k) * yc.entry(k, m)).sum()
            });
            let op = CoefficientOperator::banded(name, x.basis, bx + by, k, symmetric);
            return Ok(op);
        }
        (Some(bx), None) => Kernel::new(name.clone(), move |n, m| {
            (n.saturating_sub(bx as u64)..=n + bx as u64).map(|k| xc.entry(n, k) * yc.entry(k, m)).sum()
        }),
        (None, Some(by)) => Kernel::new(name.clone(), move |n, m| {
            (m.saturating_sub(by as u64)..=m + by as u64).map(|k| xc.entry(n, k) * yc.entry(k, m)).sum()
        }),
        (None, None) => {
            return Err(Error::Unsupported(format!(
                "product {} of two operators with unbounded bandwidth has infinite entry sums",
                name
            )))
        }
    };
    Ok(CoefficientOperator::dense(name, x.basis, entry))
}
