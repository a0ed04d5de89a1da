//! Continuing a resolvent by its Neumann series inside and just outside the radius.
use interspace::models::hermite_diagonal;
use interspace::resolvent::{neumann_compare, NeumannContinuation};
use interspace::{BasisTag, CoefficientVector, RunConfig, ScaleSpace};
use num_complex::Complex64;

fn main() -> interspace::Result<()> {
    let cfg = RunConfig::default();
    let a = hermite_diagonal("n+1")?.operator;
    let (e, f) = (ScaleSpace::hermite(1.0), ScaleSpace::hermite(0.0));
    let l0 = Complex64::new(-1.0, 0.0);
    let eta = CoefficientVector::from_real(BasisTag::Hermite, &(0..128).map(|k| 1.0 / (k as f64 + 1.0)).collect::<Vec<_>>());
    let delta = NeumannContinuation::new(&a, l0, l0, &e, &f, &cfg)?.radius;
    for t in [0.5, 0.9] {
        let cmp = neumann_compare(&a, l0, l0 - t * delta, &e, &f, &eta, &cfg)?;
        println!("|λ−λ0|={t}δ (δ={delta:.2}): {} terms, error {:.1e}, passed {}", cmp.terms, cmp.max_error, cmp.passed);
    }
    // past the radius only a fixed number of terms can be forced
    let wild = NeumannContinuation::unchecked(&a, l0, l0 - 1.5 * delta, &e, 60, &cfg)?;
    println!("60 terms at 1.5δ: ‖series‖∞ = {:.2e}", wild.apply(&eta)?.max_abs());
    Ok(())
}
