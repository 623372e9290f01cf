//! Turning a conditionally correct algorithm into a δ-correct one: runs at
//! confidence δ/2^{k+1} share time, run k acting every 2^k slots.

use cpe_core::meta::parallel_simulate;
use cpe_core::model::BestSetInstance;
use cpe_core::naive::NaiveGapElim;
use cpe_core::run::DEFAULT_PULL_CAP;

fn main() -> cpe_core::Result<()> {
    let inst = BestSetInstance::explicit(vec![0.5, 0.42, 0.3], vec![vec![0], vec![1], vec![2]])?;
    for seed in 0..4 {
        let out = parallel_simulate(|d| NaiveGapElim::new(&inst, d), inst.profile(), 0.05, seed, DEFAULT_PULL_CAP)?;
        println!(
            "seed {seed}: answer {:?}  winner k={:?}  per-run pulls {:?}  total {}",
            out.result.map(|s| s.to_string()),
            out.winner,
            out.per_run_pulls,
            out.total_pulls
        );
    }
    Ok(())
}
