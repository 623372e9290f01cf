//! A seeded trial batch through the experiment harness, as the CLI runs it.

use cpe_core::bench::{run_experiment, ExperimentConfig, Instance};
use cpe_core::hard::disj_sets_instance;

fn main() -> cpe_core::Result<()> {
    let inst = Instance::BestSet(disj_sets_instance(4, 0.25)?);
    for alg in ["naive", "wrapped-naive", "efficient", "lpsample", "uniform"] {
        let cfg = ExperimentConfig::new(inst.clone(), alg.parse()?, 0.005, 20, 1);
        println!("{}", run_experiment(&cfg)?.summary());
    }
    let cfg = ExperimentConfig::new(inst, "naive".parse()?, 0.005, 3, 1);
    run_experiment(&cfg)?.write_csv(std::io::stdout(), false)
}
