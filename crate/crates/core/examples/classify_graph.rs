//! Decide whether a stability graph is complete multipartite and whether the
//! boundary divisors embed.
//!
//! ```text
//! cargo run --example classify_graph -- "n=5;edges=2-3,2-4,2-5,3-4"
//! ```

use tropmod::fan::{embedding_report, FaceCheck};
use tropmod::valuation::injectivity_report;
use tropmod::StabilityGraph;

fn main() {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "n=5;edges=2-3,2-4,2-5,3-4".into());
    let g: StabilityGraph = spec.parse().expect("graph spec");

    match g.is_complete_multipartite() {
        Some(p) => {
            let parts: Vec<String> = p.parts.iter().map(ToString::to_string).collect();
            println!("{g}: multipartite with parts {}", parts.join(" "));
        }
        None => {
            let (i, j, k) = g.multipartite_witness().expect("witness for a non-multipartite graph");
            println!("{g}: not multipartite, {i}-{j} is the only edge among {i}, {j}, {k}");
        }
    }

    let inj = injectivity_report(&g);
    println!("divisor vectors injective: {}", inj.injective);
    for c in &inj.collisions {
        let ds: Vec<String> = c.divisors.iter().map(ToString::to_string).collect();
        println!("  {} share {:?}", ds.join(" and "), c.vector.coords());
    }

    let report = embedding_report(&g, FaceCheck::Maximal).expect("n is small enough for the face check");
    println!(
        "embedding: {} (vertex injective {}, dimension preserving {}, faces compatible {:?})",
        report.is_embedding, report.vertex_injective, report.dim_preserving, report.face_compatible
    );
}
