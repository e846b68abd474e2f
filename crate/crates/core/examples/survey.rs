//! Check on every stability graph with `n` markings that being complete
//! multipartite, having injective divisor vectors and embedding the boundary
//! complex all coincide.

use rayon::prelude::*;
use tropmod::fan::{embedding_report, FaceCheck};
use tropmod::graphs::enumerate_stability_graphs;
use tropmod::valuation::injectivity_report;

fn main() {
    let n: usize = std::env::args().nth(1).map_or(5, |s| s.parse().expect("n"));
    let graphs: Vec<_> = enumerate_stability_graphs(n).expect("4 <= n").collect();
    let rows: Vec<(bool, bool, bool)> = graphs
        .par_iter()
        .map(|g| {
            let emb = embedding_report(g, FaceCheck::Maximal).expect("small n").is_embedding;
            (g.is_complete_multipartite().is_some(), injectivity_report(g).injective, emb)
        })
        .collect();
    let count = |f: fn(&(bool, bool, bool)) -> bool| rows.iter().filter(|r| f(r)).count();
    println!("n = {n}: {} graphs", rows.len());
    println!("multipartite {}", count(|r| r.0));
    println!("injective    {}", count(|r| r.1));
    println!("embedding    {}", count(|r| r.2));
    println!("disagreements {}", count(|r| r.0 != r.1 || r.1 != r.2));
}
