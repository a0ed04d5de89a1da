//! Both resolvent identities for a diagonal operator and a banded perturbation of it.
use interspace::models::hermite_diagonal;
use interspace::operator::Kernel;
use interspace::resolvent::check_resolvent_identities;
use interspace::{BasisTag, CoefficientOperator, RunConfig, ScaleSpace};
use num_complex::Complex64;

fn main() -> interspace::Result<()> {
    let cfg = RunConfig::default();
    let x = hermite_diagonal("n+1")?.operator;
    let k = Kernel::new("n+1 + 0.1 band", |n, m| {
        let d = if n == m { (n + 1) as f64 } else { 0.1 };
        Complex64::new(d, 0.0)
    });
    let y = CoefficientOperator::banded("Y", BasisTag::Hermite, 1, k, true);
    let (e, f) = (ScaleSpace::hermite(1.0), ScaleSpace::hermite(0.0));
    let r = check_resolvent_identities(&x, &y, Complex64::new(0.5, 1.0), Complex64::new(-2.0, 0.5), &e, &f, &cfg)?;
    println!("N={}: first {:.2e} (scale {:.2e}), second {:.2e} (scale {:.2e}), passed {}", r.n, r.first, r.first_scale, r.second, r.second_scale, r.passed);
    Ok(())
}
