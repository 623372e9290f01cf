//! Approximate Pareto curves of two linear objectives over spanning trees.

use cpe_core::oracles::{pareto_eps, FamilyOracle, UndirectedGraph};

fn main() -> cpe_core::Result<()> {
    let edges = vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)];
    let oracle = FamilyOracle::spanning_tree(UndirectedGraph::new(4, edges)?);
    let cost = [1.0, 4.0, 2.0, 3.0, 5.0, 1.5];
    let delay = [5.0, 1.0, 2.0, 4.0, 0.5, 3.0];
    println!("{} trees", oracle.members()?.len());
    for eps in [0.5, 0.1, 0.01] {
        let curve = pareto_eps(&oracle, &cost, &delay, eps)?;
        let pts: Vec<String> = curve.iter().map(|p| format!("({:.1},{:.1})", p.f1, p.f2)).collect();
        println!("eps {eps:<5} {} points: {}", curve.len(), pts.join(" "));
    }
    Ok(())
}
