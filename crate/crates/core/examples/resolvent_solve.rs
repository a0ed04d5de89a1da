//! Solving (X − λ)ξ = η on a pair where λ is a resolvent point.
use interspace::models::hermite_diagonal;
use interspace::resolvent::resolvent_solve;
use interspace::{BasisTag, CoefficientVector, RunConfig, ScaleSpace};
use num_complex::Complex64;

fn main() -> interspace::Result<()> {
    let cfg = RunConfig::default();
    let a = hermite_diagonal("n+1")?.operator;
    let eta = CoefficientVector::from_real(BasisTag::Hermite, &(0..64).map(|k| 1.0 / (k as f64 + 1.0)).collect::<Vec<_>>());
    let r = resolvent_solve(&a, Complex64::new(1.5, 0.5), &ScaleSpace::hermite(1.0), &ScaleSpace::hermite(0.0), &eta, &cfg)?;
    println!("{} -> {}: N={} ‖ξ‖={:.6} residual {:.1e}", r.from, r.to, r.n, r.xi_norm, r.residual);
    let head: Vec<String> = r.xi.coeffs[..3].iter().map(|z| format!("{z:.4}")).collect();
    println!("ξ starts {}", head.join(", "));
    Ok(())
}
