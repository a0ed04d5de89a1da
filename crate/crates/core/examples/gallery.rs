//! Every model in the gallery with its expected union spectrum.
use interspace::models;

fn main() {
    for e in models::gallery() {
        let d = e.descriptor();
        println!("{:<36} {:<18} {} spaces", d.name, e.operator.name, e.family.spaces().len());
    }
}
