//! Scale spaces as weighted ℓ² sequence spaces.
//!
//! Every weight is handled through its logarithm `ln w(n)`. The dual space
//! negates the logarithm, so pairing a space with its dual is exact in
//! floating point and `dual(dual(E)) == E` holds structurally.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisTag {
    /// Hermite functions φ_n on the real line.
    Hermite,
    /// Exponentials e^{ifθ} on the torus, positions interleaving 0, 1, −1, 2, −2, …
    Fourier,
    /// Function samples on [0,1] (the momentum model).
    Interval,
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisTag::Hermite => "hermite",
            BasisTag::Fourier => "fourier",
            BasisTag::Interval => "interval",
        })
    }
}

pub(crate) fn check_basis(a: BasisTag, b: BasisTag) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::BasisMismatch { left: a.to_string(), right: b.to_string() })
    }
}

/// Frequency stored at Fourier position `p`.
pub fn fourier_freq(p: u64) -> i64 {
    if p == 0 {
        0
    } else if p % 2 == 1 {
        p.div_ceil(2) as i64
    } else {
        -((p / 2) as i64)
    }
}

/// Position of frequency `f` in the interleaved Fourier ordering.
pub fn fourier_pos(f: i64) -> u64 {
    if f > 0 {
        (2 * f - 1) as u64
    } else {
        (-2 * f) as u64
    }
}

/// An infinite sequence `n ↦ s_n`, given by a pure function and a label.
#[derive(Clone)]
pub struct Sequence {
    label: String,
    f: Arc<dyn Fn(u64) -> Complex64 + Send + Sync>,
}

impl Sequence {
    pub fn new(label: impl Into<String>, f: impl Fn(u64) -> Complex64 + Send + Sync + 'static) -> Self {
        Sequence { label: label.into(), f: Arc::new(f) }
    }

    pub fn constant(c: Complex64) -> Self {
        Sequence::new(format_complex(c), move |_| c)
    }

    /// Parses an expression in the variable `n`.
    pub fn parse(src: &str) -> Result<Self> {
        let expr = Expr::parse(src, &["n"])?;
        Ok(Sequence::new(src.trim(), move |n| expr.eval_real(n as f64)))
    }

    /// The finitely supported sequence with the given leading entries.
    pub fn finite(label: impl Into<String>, coeffs: Vec<Complex64>) -> Self {
        let coeffs = Arc::new(coeffs);
        Sequence::new(label, move |n| coeffs.get(n as usize).copied().unwrap_or_default())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn at(&self, n: u64) -> Complex64 {
        (self.f)(n)
    }

    pub fn conj(&self) -> Self {
        let f = self.f.clone();
        Sequence::new(format!("conj({})", self.label), move |n| f(n).conj())
    }

    pub fn take(&self, len: usize) -> Vec<Complex64> {
        (0..len as u64).map(|n| self.at(n)).collect()
    }
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sequence({:?})", self.label)
    }
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.f, &other.f) || self.label == other.label
    }
}

pub(crate) fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

pub(crate) fn format_index(k: f64) -> String {
    if k.fract() == 0.0 && k.abs() < 1e15 {
        format!("{}", k as i64)
    } else {
        format!("{k}")
    }
}

/// Source of a one-parameter weight family `k ↦ w_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// Hilbert scale of `A = diag(a_n)`: `w_k = (1 + |a_n|^{2k})^{1/2}` for `k > 0`.
    Diagonal { symbol: Sequence },
    /// Torus Sobolev weights `(1 + f²)^{k/2}` with `f` the frequency at the position.
    SobolevTorus,
    /// `(1 + n)^k`.
    Polynomial,
    /// `e^{k √n}`, faster than any polynomial.
    RootExponential,
}

impl Generator {
    pub fn diagonal(symbol: &str) -> Result<Generator> {
        Ok(Generator::Diagonal { symbol: Sequence::parse(symbol)? })
    }

    /// `ln w_k(n)` for `k ≥ 0`.
    fn ln_weight_nonneg(&self, k: f64, n: u64) -> f64 {
        if k == 0.0 {
            return 0.0;
        }
        match self {
            Generator::Diagonal { symbol } => {
                let t = 2.0 * k * symbol.at(n).norm().ln();
                // ½ ln(1 + e^t) without overflow
                0.5 * (t.max(0.0) + (-t.abs()).exp().ln_1p())
            }
            Generator::SobolevTorus => {
                let f = fourier_freq(n) as f64;
                0.5 * k * (f * f).ln_1p()
            }
            Generator::Polynomial => k * (n as f64).ln_1p(),
            Generator::RootExponential => k * (n as f64).sqrt(),
        }
    }

    fn ln_weight(&self, k: f64, n: u64) -> f64 {
        if k < 0.0 {
            -self.ln_weight_nonneg(-k, n)
        } else {
            self.ln_weight_nonneg(k, n)
        }
    }

    fn rung_label(&self, k: f64) -> String {
        let k = format_index(k);
        match self {
            Generator::Diagonal { .. } => format!("H_{k}"),
            Generator::SobolevTorus => format!("W^{{{k},2}}"),
            Generator::Polynomial => format!("s_{k}"),
            Generator::RootExponential => format!("e^{{{k}sqrt(n)}}"),
        }
    }

    pub fn spec(&self) -> GeneratorSpec {
        match self {
            Generator::Diagonal { symbol } => GeneratorSpec::Diagonal { symbol: symbol.label().to_string() },
            Generator::SobolevTorus => GeneratorSpec::SobolevTorus,
            Generator::Polynomial => GeneratorSpec::Polynomial,
            Generator::RootExponential => GeneratorSpec::RootExponential,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    Rung { generator: Arc<Generator>, index: f64 },
    Meet(Box<ScaleSpace>, Box<ScaleSpace>),
    Dual(Box<ScaleSpace>),
}

/// One interspace: a basis together with a positive weight sequence.
#[derive(Debug, Clone)]
pub struct ScaleSpace {
    basis: BasisTag,
    profile: Profile,
    label: String,
}

impl PartialEq for ScaleSpace {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis && self.profile == other.profile
    }
}

impl fmt::Display for ScaleSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl ScaleSpace {
    pub fn rung(basis: BasisTag, generator: Arc<Generator>, index: f64) -> ScaleSpace {
        let index = if index == 0.0 { 0.0 } else { index };
        let label = generator.rung_label(index);
        ScaleSpace { basis, profile: Profile::Rung { generator, index }, label }
    }

    /// ℋ_k of the scale generated by `diag(n+1)` in the Hermite basis.
    pub fn hermite(k: f64) -> ScaleSpace {
        ScaleSpace::rung(BasisTag::Hermite, Arc::new(Generator::diagonal("n+1").unwrap()), k)
    }

    /// Torus Sobolev space W^{k,2}.
    pub fn sobolev(k: f64) -> ScaleSpace {
        ScaleSpace::rung(BasisTag::Fourier, Arc::new(Generator::SobolevTorus), k)
    }

    /// Polynomially weighted sequence space s_k in the given basis.
    pub fn poly(basis: BasisTag, k: f64) -> ScaleSpace {
        ScaleSpace::rung(basis, Arc::new(Generator::Polynomial), k)
    }

    /// The central space ℓ² in the given basis.
    pub fn central(basis: BasisTag) -> ScaleSpace {
        ScaleSpace::poly(basis, 0.0)
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Index of a plain rung, `None` for meets and their duals.
    pub fn index(&self) -> Option<f64> {
        match &self.profile {
            Profile::Rung { index, .. } => Some(*index),
            _ => None,
        }
    }

    pub fn ln_weight(&self, n: u64) -> f64 {
        match &self.profile {
            Profile::Rung { generator, index } => generator.ln_weight(*index, n),
            Profile::Meet(a, b) => a.ln_weight(n).max(b.ln_weight(n)),
            Profile::Dual(inner) => -inner.ln_weight(n),
        }
    }

    pub fn weight(&self, n: u64) -> f64 {
        self.ln_weight(n).exp()
    }

    pub fn ln_weights(&self, len: usize) -> Vec<f64> {
        (0..len as u64).map(|n| self.ln_weight(n)).collect()
    }

    pub fn dual(&self) -> ScaleSpace {
        match &self.profile {
            Profile::Rung { generator, index } => ScaleSpace::rung(self.basis, generator.clone(), -*index),
            Profile::Dual(inner) => (**inner).clone(),
            Profile::Meet(..) => ScaleSpace {
                basis: self.basis,
                label: format!("({})^x", self.label),
                profile: Profile::Dual(Box::new(self.clone())),
            },
        }
    }

    /// The family intersection `E ∩ F`, normed by the pointwise larger weight.
    pub fn meet(&self, other: &ScaleSpace) -> Result<ScaleSpace> {
        check_basis(self.basis, other.basis)?;
        Ok(ScaleSpace {
            basis: self.basis,
            label: format!("{} ∩ {}", self.label, other.label),
            profile: Profile::Meet(Box::new(self.clone()), Box::new(other.clone())),
        })
    }

    pub fn norm(&self, v: &CoefficientVector) -> Result<f64> {
        check_basis(self.basis, v.basis)?;
        Ok(self.norm_of(&v.coeffs))
    }

    pub(crate) fn norm_of(&self, coeffs: &[Complex64]) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c.norm_sqr() * (2.0 * self.ln_weight(n as u64)).exp())
            .sum::<f64>()
            .sqrt()
    }

    /// Norm of the full infinite sequence, `+∞` when the series diverges.
    pub fn sequence_norm(&self, s: &Sequence) -> f64 {
        series_sum(|n| s.at(n).norm_sqr() * (2.0 * self.ln_weight(n)).exp()).sqrt()
    }
}

/// `sup_n w_F(n)/w_E(n)`; `+∞` when E does not embed in F.
pub fn embedding_norm(e: &ScaleSpace, f: &ScaleSpace) -> Result<f64> {
    check_basis(e.basis, f.basis)?;
    if e == f {
        return Ok(1.0);
    }
    Ok(log_sup(|n| f.ln_weight(n) - e.ln_weight(n)).exp())
}

const DENSE_SCAN: u64 = 1 << 16;
const PROBE_LIMIT: u64 = 1 << 50;

/// `ln sup_n exp(g(n))` by a dense scan and geometric probes; `+∞` if still growing at the probe limit.
pub fn log_sup(g: impl Fn(u64) -> f64) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for n in 0..DENSE_SCAN {
        let v = g(n);
        if v.is_nan() {
            return f64::INFINITY;
        }
        best = best.max(v);
    }
    let mut tail = Vec::new();
    let mut x = DENSE_SCAN as f64;
    while x <= PROBE_LIMIT as f64 {
        let v = g(x as u64);
        if v.is_nan() {
            return f64::INFINITY;
        }
        best = best.max(v);
        tail.push(v);
        x *= 2f64.sqrt();
    }
    let last = &tail[tail.len() - 8..];
    let increasing = last.windows(2).all(|w| w[1] >= w[0]);
    if best == f64::INFINITY || (increasing && last[7] - last[0] > 1e-3) {
        return f64::INFINITY;
    }
    best
}

/// `ln inf_n exp(g(n))`, mirroring [`log_sup`]; `−∞` if still decreasing at the probe limit.
pub fn log_inf(g: impl Fn(u64) -> f64) -> f64 {
    -log_sup(|n| -g(n))
}

const SERIES_MAX_LOG2: u32 = 21;

/// Sum of a nonnegative series with geometric tail extrapolation over dyadic blocks.
/// Returns `+∞` if block sums stop contracting (ratio ≥ 0.9).
pub fn series_sum(term: impl Fn(u64) -> f64) -> f64 {
    let mut s = 0.0;
    let mut n = 0u64;
    let mut blocks: Vec<f64> = Vec::new();
    for j in 4..=SERIES_MAX_LOG2 {
        let end = 1u64 << j;
        let mut block = 0.0;
        while n < end {
            block += term(n);
            n += 1;
        }
        if !block.is_finite() {
            return f64::INFINITY;
        }
        s += block;
        blocks.push(block);
        if blocks.len() < 3 {
            continue;
        }
        let (b1, b2) = (blocks[blocks.len() - 2], blocks[blocks.len() - 1]);
        if b2 == 0.0 {
            if b1 == 0.0 {
                return s;
            }
            continue;
        }
        let r = b2 / b1;
        if r >= 0.9 {
            if j >= 10 {
                return f64::INFINITY;
            }
            continue;
        }
        let tail = b2 * r / (1.0 - r);
        if tail <= 1e-15 * s || j == SERIES_MAX_LOG2 {
            return s + tail;
        }
    }
    s
}

/// A truncated coefficient sequence; entries beyond `len()` are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientVector {
    pub basis: BasisTag,
    pub coeffs: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn new(basis: BasisTag, coeffs: Vec<Complex64>) -> Self {
        CoefficientVector { basis, coeffs }
    }

    pub fn zeros(basis: BasisTag, len: usize) -> Self {
        CoefficientVector { basis, coeffs: vec![Complex64::default(); len] }
    }

    pub fn unit(basis: BasisTag, k: usize, len: usize) -> Self {
        let mut v = Self::zeros(basis, len.max(k + 1));
        v.coeffs[k] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(basis: BasisTag, values: &[f64]) -> Self {
        CoefficientVector { basis, coeffs: values.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// Zero-pads (or cuts) to length `len`.
    pub fn resized(&self, len: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(len, Complex64::default());
        CoefficientVector { basis: self.basis, coeffs }
    }

    /// ℓ² pairing `Σ u_n conj(v_n)`.
    pub fn pairing(&self, other: &CoefficientVector) -> Result<Complex64> {
        check_basis(self.basis, other.basis)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b.conj()).sum())
    }

    pub fn sub(&self, other: &CoefficientVector) -> Result<CoefficientVector> {
        check_basis(self.basis, other.basis)?;
        let len = self.len().max(other.len());
        let coeffs = (0..len).map(|n| self.get(n) - other.get(n)).collect();
        Ok(CoefficientVector { basis: self.basis, coeffs })
    }

    pub fn scaled(&self, c: Complex64) -> CoefficientVector {
        CoefficientVector { basis: self.basis, coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Diagonal { symbol: String },
    SobolevTorus,
    Polynomial,
    RootExponential,
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Generator> {
        Ok(match self {
            GeneratorSpec::Diagonal { symbol } => Generator::diagonal(symbol)?,
            GeneratorSpec::SobolevTorus => Generator::SobolevTorus,
            GeneratorSpec::Polynomial => Generator::Polynomial,
            GeneratorSpec::RootExponential => Generator::RootExponential,
        })
    }
}

/// JSON form of a [`ScaleFamily`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub basis: BasisTag,
    pub indices: Vec<f64>,
    pub generator: GeneratorSpec,
}

/// An ordered family of interspaces in a common basis, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFamily {
    basis: BasisTag,
    spaces: Vec<ScaleSpace>,
}

impl ScaleFamily {
    pub fn new(basis: BasisTag, spaces: Vec<ScaleSpace>) -> Result<ScaleFamily> {
        for s in &spaces {
            check_basis(basis, s.basis)?;
        }
        Ok(ScaleFamily { basis, spaces })
    }

    pub fn empty(basis: BasisTag) -> ScaleFamily {
        ScaleFamily { basis, spaces: Vec::new() }
    }

    /// Rungs `k` of one generator, sorted by decreasing index.
    pub fn chain(basis: BasisTag, generator: Generator, indices: &[f64]) -> ScaleFamily {
        let generator = Arc::new(generator);
        let mut ks = indices.to_vec();
        ks.sort_by(|a, b| b.total_cmp(a));
        ks.dedup();
        let spaces = ks.into_iter().map(|k| ScaleSpace::rung(basis, generator.clone(), k)).collect();
        ScaleFamily { basis, spaces }
    }

    /// Integer rungs `-m..=m`.
    pub fn symmetric_chain(basis: BasisTag, generator: Generator, m: i32) -> ScaleFamily {
        let ks: Vec<f64> = (-m..=m).map(f64::from).collect();
        Self::chain(basis, generator, &ks)
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<ScaleFamily> {
        if spec.indices.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidConfig("family indices must be finite".into()));
        }
        Ok(Self::chain(spec.basis, spec.generator.build()?, &spec.indices))
    }

    pub fn from_json(text: &str) -> Result<ScaleFamily> {
        let spec: FamilySpec = serde_json::from_str(text)?;
        Self::from_spec(&spec)
    }

    /// The JSON spec when the family is a single-generator chain.
    pub fn spec(&self) -> Option<FamilySpec> {
        let mut generator = None;
        let mut indices = Vec::new();
        for s in &self.spaces {
            match &s.profile {
                Profile::Rung { generator: g, index } => {
                    if generator.as_ref().is_some_and(|h: &Arc<Generator>| h != g) {
                        return None;
                    }
                    generator = Some(g.clone());
                    indices.push(*index);
                }
                _ => return None,
            }
        }
        Some(FamilySpec { basis: self.basis, indices, generator: generator?.spec() })
    }

    pub fn with_space(mut self, space: ScaleSpace) -> Result<ScaleFamily> {
        check_basis(self.basis, space.basis)?;
        if !self.spaces.contains(&space) {
            self.spaces.push(space);
        }
        Ok(self)
    }

    pub fn basis(&self) -> BasisTag {
        self.basis
    }

    pub fn spaces(&self) -> &[ScaleSpace] {
        &self.spaces
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn closed_under_duality(&self) -> bool {
        self.spaces.iter().all(|s| self.spaces.contains(&s.dual()))
    }

    pub fn position(&self, space: &ScaleSpace) -> Option<usize> {
        self.spaces.iter().position(|s| s == space)
    }

    /// Ordered pairs `(E, F)` with `E ↪ F`.
    pub fn admissible_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, e) in self.spaces.iter().enumerate() {
            for (j, f) in self.spaces.iter().enumerate() {
                if embedding_norm(e, f).map(|v| v.is_finite()).unwrap_or(false) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// The space with the most negative weights (the 𝒟^× model).
    pub fn coarsest(&self) -> Option<&ScaleSpace> {
        self.spaces.iter().min_by(|a, b| a.ln_weight(1 << 20).total_cmp(&b.ln_weight(1 << 20)))
    }

    /// The space with the largest weights (the 𝒟 model).
    pub fn finest(&self) -> Option<&ScaleSpace> {
        self.spaces.iter().max_by(|a, b| a.ln_weight(1 << 20).total_cmp(&b.ln_weight(1 << 20)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norm_examples() {
        // s_2 has w(0) = 1
        let e = ScaleSpace::poly(BasisTag::Hermite, 2.0);
        assert_eq!(e.norm(&CoefficientVector::unit(BasisTag::Hermite, 0, 5)).unwrap(), 1.0);

        let w1 = ScaleSpace::sobolev(1.0);
        let v = CoefficientVector::new(BasisTag::Fourier, vec![c(1.0), c(1.0)]);
        assert!((w1.norm(&v).unwrap() - 3f64.sqrt()).abs() < 1e-15);

        let h1 = ScaleSpace::hermite(1.0);
        let v = CoefficientVector::unit(BasisTag::Hermite, 3, 50);
        let expected = (1.0f64 + 4.0 * 4.0).sqrt();
        assert!((h1.norm(&v).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn norm_rejects_basis_mismatch() {
        let v = CoefficientVector::unit(BasisTag::Fourier, 0, 3);
        assert!(matches!(ScaleSpace::hermite(1.0).norm(&v), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn dual_examples() {
        let h2 = ScaleSpace::hermite(2.0);
        assert_eq!(h2.dual().index(), Some(-2.0));
        assert_eq!(h2.dual(), ScaleSpace::hermite(-2.0));
        assert_eq!(ScaleSpace::sobolev(0.0).dual(), ScaleSpace::sobolev(0.0));
        let s3 = ScaleSpace::poly(BasisTag::Hermite, 3.0);
        for n in [0u64, 1, 7, 1000] {
            let expected = (1.0 + n as f64).powi(-3);
            assert!((s3.dual().weight(n) / expected - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_index_has_unit_weight() {
        for n in 0..100 {
            assert_eq!(ScaleSpace::hermite(0.0).weight(n), 1.0);
        }
    }

    #[test]
    fn embedding_examples() {
        let brute = (0..1_000_000u64)
            .map(|n| {
                let a = (n + 1) as f64;
                ((1.0 + a * a) / (1.0 + a.powi(4))).sqrt()
            })
            .fold(0.0, f64::max);
        let got = embedding_norm(&ScaleSpace::hermite(2.0), &ScaleSpace::hermite(1.0)).unwrap();
        assert!((got - brute).abs() < 1e-12 && (got - 1.0).abs() < 1e-12);
        assert_eq!(embedding_norm(&ScaleSpace::hermite(1.0), &ScaleSpace::hermite(1.0)).unwrap(), 1.0);
        assert_eq!(embedding_norm(&ScaleSpace::sobolev(0.0), &ScaleSpace::sobolev(1.0)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn chain_monotonicity() {
        for k in -4..=4 {
            for m in -4..=4 {
                let v = embedding_norm(&ScaleSpace::hermite(k as f64), &ScaleSpace::hermite(m as f64)).unwrap();
                assert_eq!(v.is_finite(), k >= m, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn meet_takes_larger_weight() {
        let a = ScaleSpace::poly(BasisTag::Hermite, 1.0);
        let b = ScaleSpace::hermite(2.0);
        let m = a.meet(&b).unwrap();
        for n in 0..50 {
            assert_eq!(m.ln_weight(n), a.ln_weight(n).max(b.ln_weight(n)));
        }
        assert_eq!(m.dual().dual(), m);
        assert_eq!(m.dual().ln_weight(3), -m.ln_weight(3));
    }

    #[test]
    fn fourier_ordering_roundtrip() {
        assert_eq!((0..5).map(fourier_freq).collect::<Vec<_>>(), vec![0, 1, -1, 2, -2]);
        for p in 0..1000 {
            assert_eq!(fourier_pos(fourier_freq(p)), p);
        }
    }

    #[test]
    fn series_sum_converges_and_diverges() {
        let zeta2 = series_sum(|n| 1.0 / ((n + 1) as f64).powi(2));
        assert!((zeta2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-6);
        assert_eq!(series_sum(|n| 1.0 / (n + 1) as f64), f64::INFINITY);
        assert_eq!(series_sum(|_| 1.0), f64::INFINITY);
        assert_eq!(series_sum(|n| if n < 3 { 1.0 } else { 0.0 }), 3.0);
        let geo = series_sum(|n| 0.5f64.powi(n as i32));
        assert!((geo - 2.0).abs() < 1e-14);
    }

    #[test]
    fn family_spec_roundtrip() {
        let json = r#"{"basis":"hermite","indices":[-1,0,1],"generator":{"type":"diagonal","symbol":"n+1"}}"#;
        let fam = ScaleFamily::from_json(json).unwrap();
        assert_eq!(fam.spaces().len(), 3);
        assert!(fam.closed_under_duality());
        assert_eq!(fam.spaces()[0], ScaleSpace::hermite(1.0));
        let spec = fam.spec().unwrap();
        assert_eq!(ScaleFamily::from_spec(&spec).unwrap(), fam);
        let half = ScaleFamily::from_json(r#"{"basis":"fourier","indices":[0,1],"generator":{"type":"sobolev-torus"}}"#)
            .unwrap();
        assert!(!half.closed_under_duality());
    }

    fn arb_space() -> impl Strategy<Value = ScaleSpace> {
        (0usize..4, -8i32..=8).prop_map(|(g, k2)| {
            let k = k2 as f64 / 2.0;
            match g {
                0 => ScaleSpace::hermite(k),
                1 => ScaleSpace::sobolev(k),
                2 => ScaleSpace::poly(BasisTag::Hermite, k),
                _ => ScaleSpace::rung(BasisTag::Hermite, Arc::new(Generator::RootExponential), k),
            }
        })
    }

    proptest! {
        #[test]
        fn duality_is_involutive(e in arb_space(), n in 0u64..100_000) {
            prop_assert_eq!(e.dual().dual(), e.clone());
            prop_assert_eq!(e.dual().ln_weight(n), -e.ln_weight(n));
            prop_assert_eq!(e.dual().dual().ln_weight(n), e.ln_weight(n));
        }

        #[test]
        fn nonneg_index_weights_at_least_one(e in arb_space(), n in 0u64..100_000) {
            if e.index().unwrap() >= 0.0 {
                prop_assert!(e.weight(n) >= 1.0);
            }
        }

        #[test]
        fn pairing_bounded_by_dual_norms(
            e in arb_space(),
            re in proptest::collection::vec(-1.0f64..1.0, 1..40),
            im in proptest::collection::vec(-1.0f64..1.0, 1..40),
        ) {
            let basis = e.basis();
            let len = re.len().min(im.len());
            let v = CoefficientVector::new(basis, (0..len).map(|n| Complex64::new(re[n], im[n])).collect());
            // u_n = v̄_n w(n)^{-2} attains the bound
            let u = CoefficientVector::new(
                basis,
                v.coeffs.iter().enumerate().map(|(n, c)| c.conj() * (-2.0 * e.ln_weight(n as u64)).exp()).collect(),
            );
            let lhs = u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a * b).sum::<Complex64>().norm();
            let rhs = e.norm(&u).unwrap() * e.dual().norm(&v).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
            let w = CoefficientVector::new(basis, v.coeffs.iter().rev().copied().collect());
            let lhs2 = w.pairing(&v).unwrap().norm();
            prop_assert!(lhs2 <= e.norm(&w).unwrap() * e.dual().norm(&v).unwrap() * (1.0 + 1e-12));
        }
    }
}
