//! Eigenvalues of the momentum extensions and coverage of the real axis by two of them.
use interspace::extension::{momentum_union_resolvent, MomentumExtension};
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() -> interspace::Result<()> {
    let s = MomentumExtension::from_angle(PI / 2.0, 128)?;
    println!("eigenvalues for α=i: {:?}", s.eigenvalues(-2, 2));
    let g: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); 128];
    let sol = s.solve(Complex64::new(1.0, 0.0), &g)?;
    println!("u(0)={:.4} u(1)={:.4} boundary defect {:.1e}", sol.u_at_0, sol.u_at_1, sol.boundary_defect);

    let alphas = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    let pts: Vec<Complex64> = (0..=40).map(|k| Complex64::new(-10.0 + 0.5 * k as f64, 0.0)).collect();
    let cover = momentum_union_resolvent(&alphas, &pts)?;
    println!("α ∈ {{1, −1}} covers all {} points: {}", pts.len(), cover.all_covered);
    Ok(())
}
