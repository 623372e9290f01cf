//! EfficientGapElim on s-t paths: survivors are kept as thresholds on past
//! estimates and allocations come from the ellipsoid programs.

use cpe_core::efficient::EfficientGapElim;
use cpe_core::model::{BestSetInstance, GaussianEnvironment, MeanProfile};
use cpe_core::naive::NaiveGapElim;
use cpe_core::oracles::{FamilyOracle, PathGraph};
use cpe_core::run::drive;

fn main() -> cpe_core::Result<()> {
    // a 2x3 grid DAG from vertex 0 to vertex 5
    let edges = vec![(0, 1), (1, 2), (0, 3), (3, 4), (4, 5), (1, 4), (2, 5)];
    let graph = PathGraph::new(6, edges, 0, 5)?;
    let means = MeanProfile::new(vec![0.5, 0.4, 0.1, 0.2, 0.3, 0.2, 0.5])?;
    let inst = BestSetInstance::new(means, FamilyOracle::path(graph))?;
    println!("paths: {}, optimum {{{}}}", inst.family().members()?.len(), inst.optimum());

    let mut eff = EfficientGapElim::new(&inst, 0.005)?;
    let out = drive(&mut eff, &mut GaussianEnvironment::new(inst.profile().clone(), 3), u64::MAX);
    for r in eff.diagnostics() {
        println!(
            "round {:>2}: theta {:>7.4}  opt {:>7.4}  budget {:>9}  ellipsoid iterations {:>5}  cuts {:>4}",
            r.r, r.theta, r.opt, r.budget, r.ellipsoid_iterations, r.cuts
        );
    }
    println!("efficient: {:?} in {} pulls", out.result.map(|s| s.to_string()), out.total_pulls);

    let mut naive = NaiveGapElim::new(&inst, 0.005)?;
    let out = drive(&mut naive, &mut GaussianEnvironment::new(inst.profile().clone(), 3), u64::MAX);
    println!("naive:     {:?} in {} pulls", out.result.map(|s| s.to_string()), out.total_pulls);
    Ok(())
}
