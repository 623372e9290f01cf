//! Low(C) against the gap-based H_C on disjoint sets and on a spanning-tree
//! instance, plus Low(I) for a General-Samp instance.

use cpe_core::general::{AnswerRegion, GeneralSampInstance};
use cpe_core::hard::disj_sets_instance;
use cpe_core::lower_bounds::{hardness_hc, solve_low_bestset, solve_low_general};
use cpe_core::model::{BestSetInstance, MeanProfile};
use cpe_core::oracles::{FamilyOracle, UndirectedGraph};

fn main() -> cpe_core::Result<()> {
    println!("{:>4} {:>6} {:>10} {:>10} {:>8}", "k", "eps", "Low", "H_C", "ratio");
    for k in [2, 4, 8, 16] {
        for eps in [0.25, 0.5] {
            let inst = disj_sets_instance(k, eps)?;
            let low = solve_low_bestset(&inst)?.value;
            let hc = hardness_hc(&inst)?.value;
            println!("{k:>4} {eps:>6} {low:>10.3} {hc:>10.3} {:>8.2}", low / hc);
        }
    }

    // spanning trees of K4, arms are the six edges
    let edges = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let family = FamilyOracle::spanning_tree(UndirectedGraph::new(4, edges)?);
    let inst = BestSetInstance::new(MeanProfile::new(vec![0.9, 0.8, 0.1, 0.7, 0.2, 0.3])?, family)?;
    let low = solve_low_bestset(&inst)?;
    println!("\nK4 trees: optimum {{{}}}, Low = {:.3}, H_C = {:.3}", inst.optimum(), low.value, hardness_hc(&inst)?.value);
    println!("allocation {:?}", low.allocation.budget().iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>());

    let count = GeneralSampInstance::new(
        MeanProfile::new(vec![0.5, -0.5, 1.5])?,
        (0..=3).map(|j| AnswerRegion::CountAbove { theta: 0.0, count: j }).collect(),
    )?;
    println!("\ncount-above regions: Low(I) = {:.3}", solve_low_general(&count)?.value);
    Ok(())
}
