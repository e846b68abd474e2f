//! Build the weighted tropical fan of a stability graph and certify that it
//! is balanced around every codimension-one cone.

use tropmod::fan::{build_trop_fan, check_balanced};
use tropmod::StabilityGraph;

fn main() {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "n=5;edges=2-3,2-4,2-5,3-4".into());
    let g: StabilityGraph = spec.parse().expect("graph spec");
    let fan = build_trop_fan(&g);

    print!("{}", fan.to_text());
    for &k in fan.merged_cones() {
        println!("cone {k} is the image of {}", fan.provenance(k).iter().map(ToString::to_string).collect::<Vec<_>>().join(" | "));
    }

    let cert = check_balanced(&fan).expect("pure fan");
    println!("balanced: {} ({} codimension-one cones)", cert.balanced, cert.facets.len());
    for f in cert.failures() {
        println!("  unbalanced at {:?}: residual {:?}", f.tau, f.residual);
    }
}
