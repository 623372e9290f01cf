//! NaiveGapElim on an explicit family, with its per-round record.

use cpe_core::model::{BestSetInstance, GaussianEnvironment};
use cpe_core::naive::NaiveGapElim;
use cpe_core::run::drive;

fn main() -> cpe_core::Result<()> {
    let inst = BestSetInstance::explicit(
        vec![0.6, 0.5, 0.45, 0.1, 0.3],
        vec![vec![0, 1], vec![0, 2], vec![1, 2, 3], vec![3, 4], vec![0, 4]],
    )?;
    let mut alg = NaiveGapElim::new(&inst, 0.005)?;
    let mut env = GaussianEnvironment::new(inst.profile().clone(), 11);
    let out = drive(&mut alg, &mut env, u64::MAX);
    for r in alg.diagnostics() {
        let alive: Vec<String> = r.surviving.iter().map(|&i| format!("{{{}}}", alg.family()[i])).collect();
        println!("round {:>2}: budget {:>9}  survivors {}", r.r, r.budget, alive.join(" "));
    }
    match out.result {
        Ok(set) => println!("answer {{{set}}} (optimum {{{}}}) after {} pulls", inst.optimum(), out.total_pulls),
        Err(f) => println!("no answer: {f}"),
    }
    Ok(())
}
