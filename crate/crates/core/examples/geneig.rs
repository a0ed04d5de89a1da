//! Generalized eigenvectors of the Hermite position operator and their scale membership.
use interspace::geneig::{delta_eigenvector_hermite, delta_membership, smallest_member_index};

fn main() -> interspace::Result<()> {
    for l in [-1.0, 0.0, 2.0] {
        let p = delta_eigenvector_hermite(l, 1.0, 1024)?;
        println!("λ={l}: {} ⊂ {}, residual {:.2e}", p.home_space, p.target_space, p.residual);
    }
    let m = delta_membership(0.5, 1.0)?;
    println!("δ_0.5 in H_-1: {} (norm {:.4})", m.member, m.norm);
    println!("smallest s among [0, 0.25, 0.5, 1]: {:?}", smallest_member_index(0.5, &[0.0, 0.25, 0.5, 1.0])?);
    Ok(())
}
