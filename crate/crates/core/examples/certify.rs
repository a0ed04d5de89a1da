//! Continuity certificates for the position operator between Hermite rungs.
use interspace::models::{hermite_chain, hermite_position};
use interspace::{certify, RunConfig};

fn main() -> interspace::Result<()> {
    let cfg = RunConfig::default();
    let x = hermite_position().operator;
    let family = hermite_chain(2);
    let sp = family.spaces();
    for (i, j) in family.admissible_pairs() {
        let c = certify(&x, &sp[i], &sp[j], &cfg)?;
        println!("{:>4} -> {:<4} {:?} bound {:.4}", c.from, c.to, c.method, c.norm_bound);
    }
    Ok(())
}
