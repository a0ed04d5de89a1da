//! Gauss–Legendre rules and a Legendre spectral toolkit on [0,1].

use num_complex::Complex64;

/// `P_n(t)` and `P_n'(t)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// `n`-point Gauss–Legendre nodes and weights on `[a, b]`, nodes increasing.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, t);
            let step = p / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, t);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = mid - half * t;
        nodes[n - 1 - i] = mid + half * t;
        weights[i] = w * half;
        weights[n - 1 - i] = w * half;
    }
    if n % 2 == 1 {
        nodes[n / 2] = mid;
    }
    (nodes, weights)
}

/// Values of the orthonormal shifted Legendre polynomials `q_k(x) = √(2k+1) P_k(2x−1)`, `k < n`.
fn shifted_legendre(n: usize, x: f64) -> Vec<f64> {
    let t = 2.0 * x - 1.0;
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = t;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * t * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

const CHOP: f64 = 1e-14;

/// Gauss–Legendre samples on [0,1] with spectral integration and differentiation.
#[derive(Debug, Clone)]
pub struct IntervalQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `q_k(x_i)`
    values: Vec<Vec<f64>>,
    /// `q_k'(x_i)`
    derivs: Vec<Vec<f64>>,
    /// `∫_0^{x_i} q_k`
    integrals: Vec<Vec<f64>>,
}

impl IntervalQuadrature {
    pub fn new(n: usize) -> IntervalQuadrature {
        let (nodes, weights) = gauss_legendre(n, 0.0, 1.0);
        let mut values = Vec::with_capacity(n);
        let mut derivs = Vec::with_capacity(n);
        let mut integrals = Vec::with_capacity(n);
        for &x in &nodes {
            let t = 2.0 * x - 1.0;
            let p = shifted_legendre(n, x);
            // P_k' = P_{k-2}' + (2k-1) P_{k-1}, free of the cancellation in the closed form
            let mut dp = vec![0.0; n.max(2)];
            dp[1] = 1.0;
            for k in 2..n {
                dp[k] = dp[k - 2] + (2.0 * k as f64 - 1.0) * p[k - 1];
            }
            let mut v = vec![0.0; n];
            let mut d = vec![0.0; n];
            let mut c = vec![0.0; n];
            for k in 0..n {
                let s = (2.0 * k as f64 + 1.0).sqrt();
                v[k] = s * p[k];
                d[k] = 2.0 * s * dp[k];
                let antideriv = if k == 0 { t + 1.0 } else { (p[k + 1] - p[k - 1]) / (2.0 * k as f64 + 1.0) };
                c[k] = s * 0.5 * antideriv;
            }
            values.push(v);
            derivs.push(d);
            integrals.push(c);
        }
        IntervalQuadrature { nodes, weights, values, derivs, integrals }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// `∫_0^1 f`.
    pub fn integrate(&self, f: &[Complex64]) -> Complex64 {
        f.iter().zip(&self.weights).map(|(v, w)| v * *w).sum()
    }

    /// Legendre coefficients of the interpolant.
    pub fn coefficients(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let mut a = vec![Complex64::default(); n];
        for (i, fi) in f.iter().enumerate() {
            let wf = fi * self.weights[i];
            for (k, ak) in a.iter_mut().enumerate() {
                *ak += wf * self.values[i][k];
            }
        }
        a
    }

    fn synthesize(&self, a: &[Complex64], table: &[Vec<f64>]) -> Vec<Complex64> {
        table.iter().map(|row| row.iter().zip(a).map(|(q, c)| c * *q).sum()).collect()
    }

    /// `x ↦ ∫_0^x f` at the nodes.
    pub fn cumulative(&self, f: &[Complex64]) -> Vec<Complex64> {
        self.synthesize(&self.coefficients(f), &self.integrals)
    }

    /// Spectral derivative; trailing coefficients at rounding level are dropped first,
    /// since `q_k'` grows like `k^{5/2}` and would amplify them.
    pub fn derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut a = self.coefficients(f);
        let peak = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let keep = a.iter().rposition(|c| c.norm() > CHOP * peak).map_or(0, |k| k + 1);
        a.truncate(keep);
        let table: Vec<Vec<f64>> = self.derivs.iter().map(|row| row[..keep].to_vec()).collect();
        self.synthesize(&a, &table)
    }

    /// Interpolant evaluated at an arbitrary point of [0,1].
    pub fn evaluate(&self, f: &[Complex64], x: f64) -> Complex64 {
        let a = self.coefficients(f);
        let p = shifted_legendre(self.len(), x);
        a.iter().enumerate().map(|(k, c)| c * ((2.0 * k as f64 + 1.0).sqrt() * p[k])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10, -1.0, 3.0);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(19)).sum();
        let exact = (3f64.powi(20) - 1.0) / 20.0;
        assert!((s - exact).abs() < 1e-12 * exact);
        let (x, w) = gauss_legendre(400, -20.0, 20.0);
        let gauss: f64 = x.iter().zip(&w).map(|(x, w)| w * (-x * x).exp()).sum();
        assert!((gauss - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn spectral_calculus_on_exponentials() {
        let q = IntervalQuadrature::new(64);
        let k = Complex64::new(0.3, 2.0);
        let f = q.sample(|x| (k * x).exp());
        let d = q.derivative(&f);
        let c = q.cumulative(&f);
        for (i, &x) in q.nodes.iter().enumerate() {
            assert!((d[i] - k * (k * x).exp()).norm() < 1e-11);
            assert!((c[i] - ((k * x).exp() - 1.0) / k).norm() < 1e-13);
        }
        assert!((q.evaluate(&f, 1.0) - k.exp()).norm() < 1e-12);
        assert!((q.evaluate(&f, 0.0) - 1.0).norm() < 1e-13);
    }
}
