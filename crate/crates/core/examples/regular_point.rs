//! Lower bounds, statuses and defect numbers for a diagonal operator and a shift.
use interspace::models::hermite_diagonal;
use interspace::resolvent::{classify, defect_number, regular_point};
use interspace::operator::Kernel;
use interspace::{BasisTag, CoefficientOperator, RunConfig, ScaleSpace};
use num_complex::Complex64;

fn main() -> interspace::Result<()> {
    let cfg = RunConfig::default();
    let a = hermite_diagonal("n+1")?.operator;
    let (h1, h0) = (ScaleSpace::hermite(1.0), ScaleSpace::hermite(0.0));
    for l in [Complex64::new(0.5, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 1.0)] {
        let rp = regular_point(&a, l, &h1, &h0, &cfg)?;
        let st = classify(&a, l, &h1, &h0, &cfg)?.status;
        println!("λ={l}: c_low {:.4} d_high {:.4} status {st}", rp.c_low, rp.d_high);
    }

    // the right shift is an isometry whose range misses e_0
    let h = ScaleSpace::central(BasisTag::Hermite);
    let k = Kernel::new("shift", |n, m| if n == m + 1 { Complex64::new(1.0, 0.0) } else { Complex64::default() });
    let shift = CoefficientOperator::banded("S", BasisTag::Hermite, 1, k, false);
    let d = defect_number(&shift, Complex64::new(0.0, 0.0), &h, &h, &cfg)?;
    println!("shift at 0: defect {} (gap {:.1e})", d.defect, d.singular_value_gap);
    Ok(())
}
