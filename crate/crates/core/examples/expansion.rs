//! Expanding a vector in the generalized eigenvectors and checking reconstruction.
use interspace::geneig::{expansion_check, EXPANSION_NODES};
use interspace::{BasisTag, CoefficientVector};

fn main() -> interspace::Result<()> {
    let c: Vec<f64> = (0..32).map(|m| (-(m as f64) / 4.0).exp()).collect();
    let r = expansion_check(&CoefficientVector::from_real(BasisTag::Hermite, &c), EXPANSION_NODES)?;
    println!("{} modes, {} nodes: reconstruction {:.2e}, Parseval {:.2e}", r.modes, r.nodes, r.reconstruction_error, r.parseval_error);
    Ok(())
}
