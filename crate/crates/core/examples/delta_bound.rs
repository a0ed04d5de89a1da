//! Ground state of a point interaction by finite differences and Richardson extrapolation.
use interspace::extension::DeltaInteraction;
use interspace::RunConfig;

fn main() -> interspace::Result<()> {
    let d = DeltaInteraction::new(-2.0, 0.0);
    println!("spectrum: {}", d.spectrum().text);
    let r = d.bound_state_check(&RunConfig::default())?;
    for l in &r.levels {
        println!("h={:<6} E={:.8}", l.h, l.estimate);
    }
    println!("extrapolated {:.10} ± {:.1e}, expected {}", r.extrapolated, r.error_bar, r.expected);
    Ok(())
}
