//! Weighted spaces of a Hermite scale, their duals and the embedding norms between rungs.
use interspace::models::hermite_chain;
use interspace::scale::embedding_norm;
use interspace::ScaleSpace;

fn main() -> interspace::Result<()> {
    let h2 = ScaleSpace::hermite(2.0);
    println!("{}: weights {:?}", h2.label(), (0..4).map(|n| h2.weight(n)).collect::<Vec<_>>());
    println!("dual of {} is {}", h2.label(), h2.dual().label());

    let family = hermite_chain(2);
    let sp = family.spaces();
    for (i, j) in family.admissible_pairs().into_iter().take(6) {
        println!("‖I‖ {} -> {} = {:.3}", sp[i].label(), sp[j].label(), embedding_norm(&sp[i], &sp[j])?);
    }
    println!("closed under duality: {}", family.closed_under_duality());
    Ok(())
}
