//! The SimultEst program over an implicit family, solved by the ellipsoid
//! method with the approximate separation oracle, next to the exact optimum
//! over the explicitly listed pairs.

use cpe_core::convex::{solve_inverse_packing, PackingConstraint};
use cpe_core::efficient::programs::simult_est_implicit;
use cpe_core::model::ArmSet;
use cpe_core::oracles::{FamilyOracle, UndirectedGraph};

fn main() -> cpe_core::Result<()> {
    let edges = vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];
    let oracle = FamilyOracle::spanning_tree(UndirectedGraph::new(4, edges)?);
    let mu = [0.4, 0.3, 0.35, 0.1, 0.2];
    let (eps, delta, gap) = (0.05, 0.01, 0.3);
    let best = oracle.max_weight(&mu)?.weight(&mu);
    let theta = best - 0.15;

    let sol = simult_est_implicit(&oracle, &mu, theta, theta - gap, eps, delta)?;
    println!(
        "ellipsoid: total {:.0}  iterations {}  cuts {}  capped {}",
        sol.allocation.total(),
        sol.iterations,
        sol.cuts,
        sol.capped
    );

    let bound = eps * eps / (2.0 * (2.0f64 / delta).ln());
    let low: Vec<&ArmSet> = oracle.members()?.iter().filter(|a| a.weight(&mu) >= theta - gap).collect();
    let mut cons = Vec::new();
    for (i, a) in low.iter().enumerate() {
        for b in &low[i + 1..] {
            cons.push(PackingConstraint::new(a.sym_diff(b), bound));
        }
    }
    let exact = solve_inverse_packing(mu.len(), &cons)?;
    println!("explicit program over {} pairs: total {:.0}", cons.len(), exact.value);
    println!("ratio {:.2}", sol.allocation.total() / exact.value);
    Ok(())
}
