//! The branches of the multivalued resolvent through one point and their equivalence.
use interspace::models::hilbert_scale_generator;
use interspace::resolvent::branch_report;
use interspace::RunConfig;
use num_complex::Complex64;

fn main() -> interspace::Result<()> {
    let cfg = RunConfig::default();
    let g = hilbert_scale_generator();
    let r = branch_report(&g.operator, &g.family, Complex64::new(0.5, 0.5), &cfg)?;
    for p in &r.pairs {
        println!("branch {} -> {}", p.from, p.to);
    }
    let agree = r.equivalences.iter().filter(|e| e.2).count();
    println!("{agree}/{} pairs of branches equivalent", r.equivalences.len());
    Ok(())
}
