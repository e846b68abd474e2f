//! Find, for each stratum and each divisor containing it, a cross-ratio unit
//! that vanishes on that divisor and nowhere else on the stratum. Also
//! rewrites a monomial in coordinate differences as a product of cross ratios.

use tropmod::complex::enumerate_complex;
use tropmod::pluecker::{find_separating_unit, units_monomial_decompose, verify_decomposition};
use tropmod::StabilityGraph;

fn main() {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "n=6;edges=2-3,2-4,2-5,2-6,3-4,3-5,3-6,4-5,4-6".into());
    let g: StabilityGraph = spec.parse().expect("graph spec");
    let c = enumerate_complex(&g);

    for m in c.maximal_cells() {
        for &i in m.sets() {
            match find_separating_unit(&m, i, &g) {
                Some(u) => println!("{m}: {i} cut out by {u}"),
                None => println!("{m}: no unit separates {i}"),
            }
        }
    }

    let monomial = "x4^2 * (x4-1)^-1 * (x5-x4)";
    let d = units_monomial_decompose(monomial).expect("monomial");
    println!("{monomial} = {} * {}", d.constant, serde_json::to_string(&d.factors).unwrap());
    println!("agrees at 50 random points: {}", verify_decomposition(monomial, 50, 7).unwrap());
}
