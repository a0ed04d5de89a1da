//! Difference of two momentum resolvents against its closed form.
use interspace::extension::krein_difference_check;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() -> interspace::Result<()> {
    let unit = |t: f64| Complex64::from_polar(1.0, t);
    let cases = [(0.0, PI, Complex64::new(0.0, 1.0)), (PI / 3.0, -PI / 3.0, Complex64::new(0.5, 0.5))];
    for (a, b, l) in cases {
        let r = krein_difference_check(unit(a), unit(b), l, |x| Complex64::new(x.cos(), x * x), 256)?;
        println!("α={:.3} β={:.3} λ={l}: residual {:.2e} (relative {:.2e})", r.alpha, r.beta, r.residual, r.relative);
    }
    Ok(())
}
