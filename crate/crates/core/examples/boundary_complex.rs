//! Enumerate the boundary complex of a graphically stable moduli space and
//! print its f-vector and Graphviz 1-skeleton.

use tropmod::complex::enumerate_complex;
use tropmod::StabilityGraph;

fn main() {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "n=5;edges=2-3,2-4,3-5,4-5".into());
    let g: StabilityGraph = spec.parse().expect("graph spec");
    let c = enumerate_complex(&g);

    println!("graph {g}");
    println!("divisors: {}", c.divisors().iter().map(ToString::to_string).collect::<Vec<_>>().join(" "));
    println!("f-vector: {:?}", c.f_vector());
    for m in c.maximal_cells() {
        println!("maximal {m}");
    }
    println!("{}", c.to_dot());
}
