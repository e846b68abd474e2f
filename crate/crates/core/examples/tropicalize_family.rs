//! Tropicalize a one-parameter family of point configurations and compare it
//! with the dual tree of its limit.
//!
//! The family file holds one point per line, e.g. `p4 = (2 + t : 1)`.

use tropmod::fan::{build_trop_fan, trop_embed};
use tropmod::pluecker::{limit_tree, pluecker, trop_family, PointFamily};
use tropmod::{Rational, StabilityGraph};

const DEFAULT_FAMILY: &str = "\
p1 = (1:0)
p2 = (0:1)
p3 = (2:1)
p4 = (2 + t : 1)
p5 = (2 + 2t : 1)
";

fn main() {
    let mut args = std::env::args().skip(1);
    let spec = args.next().unwrap_or_else(|| "n=5;edges=2-3,2-4,2-5,3-4".into());
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path).expect("readable family file"),
        None => DEFAULT_FAMILY.to_string(),
    };
    let g: StabilityGraph = spec.parse().expect("graph spec");
    let family = PointFamily::parse(&text).expect("family");
    let pv = pluecker(&family);

    let v = trop_family(&pv, &g).expect("no coordinate vanishes identically");
    println!("valuation vector {:?}", v.coords());

    let limit = limit_tree(&pv).expect("limit tree");
    let stable = limit.stabilize(&g);
    for (cut, len) in stable.weighted_cuts() {
        println!("stabilized edge {cut} length {len}");
    }
    let embedded = trop_embed(&stable, &g).expect("stable tree");
    let point: Vec<Rational> = v.coords().iter().map(|&x| Rational::from_integer(x.into())).collect();
    assert_eq!(embedded, point, "the limit tree predicts the valuation");

    let fan = build_trop_fan(&g);
    match fan.minimal_cone_containing(&point) {
        Some(k) => println!("lies in cone {k}, image of {}", fan.provenance(k).iter().map(ToString::to_string).collect::<Vec<_>>().join(" | ")),
        None => println!("lies at the origin"),
    }
}
