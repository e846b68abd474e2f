//! Print the valuation vector of every index set in the coordinate frame of
//! a stability graph, as a tab-separated matrix.

use tropmod::valuation::{valuation_matrix, CoordinateFrame};
use tropmod::StabilityGraph;

fn main() {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "n=5;edges=2-3,2-4,2-5,3-4".into());
    let g: StabilityGraph = spec.parse().expect("graph spec");
    println!("frame {}", CoordinateFrame::for_graph(&g).labels().join(" "));
    print!("{}", valuation_matrix(&g).to_tsv());
}
