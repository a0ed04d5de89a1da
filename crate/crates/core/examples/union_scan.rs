//! Union spectrum of a diagonal operator over a scale, written as CSV.
use interspace::models::hermite_diagonal;
use interspace::resolvent::union_spectrum_scan;
use interspace::{Grid, RunConfig};

fn main() -> interspace::Result<()> {
    let cfg = RunConfig::default();
    let entry = hermite_diagonal("1/(n+1)")?;
    let map = union_spectrum_scan(&entry.operator, &entry.family, &Grid::new((-0.5, 1.5, 9), (-0.5, 0.5, 3)), &cfg)?;
    let resolvent = map.cells.iter().filter(|c| c.union_resolvent).count();
    println!("{resolvent}/{} cells in the union resolvent; duality agrees: {:?}", map.cells.len(), map.duality_agrees());
    let mut out = Vec::new();
    map.write_csv(&mut out)?;
    for line in String::from_utf8_lossy(&out).lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
