//! Thin layer over faer for the few dense kernels the crate needs.

use std::cmp::Ordering;

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Runs everything single-threaded so results do not depend on scheduling.
pub(crate) fn init() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// A finite (weighted) section of an operator.
#[derive(Debug, Clone)]
pub enum Section {
    /// `rows x cols` matrix whose only nonzeros sit on the main diagonal.
    Diagonal { diag: Vec<Complex64>, rows: usize, cols: usize },
    Dense(Mat<c64>),
}

impl Section {
    pub fn rows(&self) -> usize {
        match self {
            Section::Diagonal { rows, .. } => *rows,
            Section::Dense(m) => m.nrows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Section::Diagonal { cols, .. } => *cols,
            Section::Dense(m) => m.ncols(),
        }
    }

    pub fn to_dense(&self) -> Mat<c64> {
        match self {
            Section::Diagonal { diag, rows, cols } => {
                Mat::from_fn(*rows, *cols, |i, j| if i == j { diag[i] } else { c64::new(0.0, 0.0) })
            }
            Section::Dense(m) => m.clone(),
        }
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        match self {
            Section::Diagonal { diag, rows, cols } => {
                let k = (*rows).min(*cols);
                let mut s: Vec<f64> = diag.iter().take(k).map(|d| d.norm()).collect();
                s.resize(k, 0.0);
                s.sort_by(|a, b| b.total_cmp(a));
                Ok(s)
            }
            Section::Dense(m) => singular_values(m),
        }
    }
}

pub fn singular_values(m: &Mat<c64>) -> Result<Vec<f64>> {
    init();
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let finite = (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()));
    if !finite {
        return Err(Error::Linalg("non-finite matrix entry".into()));
    }
    let mut s = m.singular_values().map_err(|e| Error::Linalg(format!("{e:?}")))?;
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn lexicographic(a: &Mat<c64>, b: &Mat<c64>) -> Ordering {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
            if o != Ordering::Equal {
                return o;
            }
        }
    }
    Ordering::Equal
}

/// Singular values of a square matrix, computed from whichever of `M`, `M^H`
/// is lexicographically smaller, so the two give bitwise equal results.
pub fn singular_values_canonical(m: &Mat<c64>) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return singular_values(m);
    }
    let h = m.adjoint().to_owned();
    if lexicographic(&h, m) == Ordering::Less {
        singular_values(&h)
    } else {
        singular_values(m)
    }
}

pub fn sigma_max(m: &Mat<c64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Upper bound for the smallest singular value of a tall `(n + b) x n` matrix
/// with bandwidth `b`, where `entry(i, j)` is read only for `|i − j| ≤ b`.
///
/// Givens QR keeps the band (R has upper bandwidth `2b`), then inverse iteration
/// on `R^H R`. The bound is `‖R v‖/‖v‖` for the best iterate, so it never
/// undershoots however few iterations converge. `None` on non-finite entries.
pub fn banded_smin_upper(n: usize, b: usize, entry: impl Fn(usize, usize) -> Complex64, iters: usize) -> Option<f64> {
    if n == 0 {
        return Some(0.0);
    }
    let rows = n + b;
    let w = 3 * b + 1;
    // row i holds columns i−b ..= i+2b at offsets 0..w
    let col0 = |i: usize| i as isize - b as isize;
    let mut a = vec![vec![Complex64::default(); w]; rows];
    for (i, row) in a.iter_mut().enumerate() {
        for j in i.saturating_sub(b)..(i + b + 1).min(n) {
            let v = entry(i, j);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return None;
            }
            row[(j as isize - col0(i)) as usize] = v;
        }
    }
    for j in 0..n {
        for i in j + 1..(j + b + 1).min(rows) {
            let (oj, oi) = ((j as isize - col0(j)) as usize, (j as isize - col0(i)) as usize);
            let (x, y) = (a[j][oj], a[i][oi]);
            if y.norm() == 0.0 {
                continue;
            }
            let r = x.norm().hypot(y.norm());
            let (c, s) = if x.norm() == 0.0 {
                (0.0, Complex64::new(1.0, 0.0))
            } else {
                (x.norm() / r, x / x.norm() * y.conj() / r)
            };
            for col in j..(j + 2 * b + 1).min(n) {
                let (pj, pi) = ((col as isize - col0(j)) as usize, col as isize - col0(i));
                let u = a[j][pj];
                let v = if (0..w as isize).contains(&pi) { a[i][pi as usize] } else { Complex64::default() };
                a[j][pj] = u * c + s * v;
                if (0..w as isize).contains(&pi) {
                    a[i][pi as usize] = -s.conj() * u + v * c;
                }
            }
        }
    }
    let r = |i: usize, j: usize| a[i][(j as isize - col0(i)) as usize];
    let hi = |i: usize| (i + 2 * b + 1).min(n);
    if (0..n).any(|i| r(i, i).norm() == 0.0) {
        return Some(0.0);
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let rayleigh = |v: &[Complex64]| {
        let rv: Vec<Complex64> = (0..n).map(|i| (i..hi(i)).map(|j| r(i, j) * v[j]).sum()).collect();
        norm(&rv) / norm(v)
    };
    let mut v: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64 * 0.618_033_988_75).fract() - 0.5, 0.0)).collect();
    let mut best = rayleigh(&v);
    for _ in 0..iters {
        // R^H y = v, then R z = y
        let mut y = vec![Complex64::default(); n];
        for i in 0..n {
            let s: Complex64 = (i.saturating_sub(2 * b)..i).map(|k| r(k, i).conj() * y[k]).sum();
            y[i] = (v[i] - s) / r(i, i).conj();
        }
        let mut z = vec![Complex64::default(); n];
        for i in (0..n).rev() {
            let s: Complex64 = (i + 1..hi(i)).map(|k| r(i, k) * z[k]).sum();
            z[i] = (y[i] - s) / r(i, i);
        }
        let nz = norm(&z);
        if !(nz.is_finite() && nz > 0.0) {
            break;
        }
        v = z.into_iter().map(|x| x / nz).collect();
        best = best.min(rayleigh(&v));
    }
    Some(best)
}

/// LU factorization with partial pivoting, or plain division for diagonals.
pub enum LinearSolver {
    Diagonal(Vec<Complex64>),
    Dense { lu: PartialPivLu<c64>, n: usize },
}

impl LinearSolver {
    pub fn new(section: &Section) -> Result<LinearSolver> {
        init();
        if section.rows() != section.cols() {
            return Err(Error::Linalg("solver needs a square section".into()));
        }
        match section {
            Section::Diagonal { diag, .. } => {
                if diag.iter().any(|d| *d == Complex64::default()) {
                    return Err(Error::Linalg("singular diagonal".into()));
                }
                Ok(LinearSolver::Diagonal(diag.clone()))
            }
            Section::Dense(m) => Ok(LinearSolver::Dense { lu: m.partial_piv_lu(), n: m.nrows() }),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LinearSolver::Diagonal(d) => d.len(),
            LinearSolver::Dense { n, .. } => *n,
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        match self {
            LinearSolver::Diagonal(d) => b.iter().zip(d).map(|(x, y)| x / y).collect(),
            LinearSolver::Dense { lu, n } => {
                let rhs = Mat::from_fn(*n, 1, |i, _| b.get(i).copied().unwrap_or_default());
                let x = lu.solve(&rhs);
                (0..*n).map(|i| x[(i, 0)]).collect()
            }
        }
    }

    /// Full inverse matrix.
    pub fn inverse(&self) -> Mat<c64> {
        match self {
            LinearSolver::Diagonal(d) => {
                Mat::from_fn(d.len(), d.len(), |i, j| if i == j { c64::new(1.0, 0.0) / d[i] } else { c64::new(0.0, 0.0) })
            }
            LinearSolver::Dense { lu, n } => lu.solve(Mat::<c64>::identity(*n, *n)),
        }
    }
}

/// Eigenvalues of a Hermitian matrix in increasing order.
pub fn hermitian_eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    init();
    let mut e = m.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Linalg(format!("{e:?}")))?;
    e.sort_by(|a, b| a.total_cmp(b));
    Ok(e)
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(m: &Mat<c64>) -> Result<Vec<Complex64>> {
    init();
    m.eigenvalues().map_err(|e| Error::Linalg(format!("{e:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_section_singular_values_are_moduli() {
        let s = Section::Diagonal {
            diag: vec![c64::new(3.0, 4.0), c64::new(-1.0, 0.0), c64::new(0.0, 2.0)],
            rows: 4,
            cols: 3,
        };
        assert_eq!(s.singular_values().unwrap(), vec![5.0, 2.0, 1.0]);
        let dense = singular_values(&s.to_dense()).unwrap();
        for (a, b) in dense.iter().zip([5.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn canonical_svd_is_adjoint_invariant() {
        let m = Mat::from_fn(7, 7, |i, j| c64::new((i * 3 + j) as f64 * 0.37 - 2.0, (i as f64 - j as f64).sin()));
        let h = m.adjoint().to_owned();
        assert_eq!(singular_values_canonical(&m).unwrap(), singular_values_canonical(&h).unwrap());
    }

    #[test]
    fn lu_solves() {
        let m = Mat::from_fn(5, 5, |i, j| if i == j { c64::new(4.0, 1.0) } else { c64::new(0.3 * (i + 2 * j) as f64, 0.0) });
        let solver = LinearSolver::new(&Section::Dense(m.clone())).unwrap();
        let b: Vec<c64> = (0..5).map(|k| c64::new(k as f64, 1.0)).collect();
        let x = solver.solve(&b);
        for i in 0..5 {
            let r: c64 = (0..5).map(|j| m[(i, j)] * x[j]).sum::<c64>() - b[i];
            assert!(r.norm() < 1e-13);
        }
        let inv = solver.inverse();
        for i in 0..5 {
            for j in 0..5 {
                let e: c64 = (0..5).map(|k| inv[(i, k)] * m[(k, j)]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((e - c64::new(id, 0.0)).norm() < 1e-13);
            }
        }
    }

    fn band_entry(seed: u64) -> impl Fn(usize, usize) -> Complex64 {
        move |i, j| {
            let t = (i * 31 + j * 17) as f64 + seed as f64 * 0.37;
            Complex64::new(t.sin(), (1.3 * t).cos()) + if i == j { Complex64::new(0.5 + i as f64 * 0.01, 0.0) } else { Complex64::default() }
        }
    }

    fn dense_smin(n: usize, b: usize, f: &impl Fn(usize, usize) -> Complex64) -> f64 {
        let m = Mat::from_fn(n + b, n, |i, j| if i.abs_diff(j) <= b { f(i, j) } else { c64::new(0.0, 0.0) });
        *singular_values(&m).unwrap().last().unwrap()
    }

    #[test]
    fn banded_bound_converges_to_isolated_minimum() {
        // a near-kernel vector planted by a vanishing diagonal entry, off-band zero
        let f = |i: usize, j: usize| match (i, j) {
            (20, 20) => Complex64::new(1e-6, 0.0),
            _ if i == j => Complex64::new(2.0 + i as f64 * 0.1, 0.3),
            _ if i == 20 || j == 20 => Complex64::default(),
            _ => Complex64::new(0.4, -0.2),
        };
        let want = dense_smin(64, 2, &f);
        let got = banded_smin_upper(64, 2, f, 30).unwrap();
        // the dense oracle itself is only accurate to about ε·σ_max
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        assert_eq!(banded_smin_upper(3, 1, |i, j| if i == j && i == 1 { Complex64::default() } else if i == j { Complex64::new(1.0, 0.0) } else { Complex64::default() }, 5), Some(0.0));
        assert_eq!(banded_smin_upper(3, 1, |_, _| Complex64::new(f64::NAN, 0.0), 5), None);
    }

    proptest::proptest! {
        #[test]
        fn banded_bound_never_undershoots(seed in 0u64..1000, n in 1usize..40, b in 0usize..4) {
            let f = band_entry(seed);
            let want = dense_smin(n, b, &f);
            let got = banded_smin_upper(n, b, &f, 8).unwrap();
            proptest::prop_assert!(got >= want * (1.0 - 1e-9) - 1e-13, "{} < {}", got, want);
        }
    }
}
