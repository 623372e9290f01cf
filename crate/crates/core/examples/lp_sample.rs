//! LPSample on a General-Samp instance: how many coordinates exceed zero.

use cpe_core::general::lp_sample::LpSample;
use cpe_core::general::{AnswerRegion, GeneralSampInstance};
use cpe_core::lower_bounds::solve_low_general;
use cpe_core::model::{GaussianEnvironment, MeanProfile};
use cpe_core::run::drive;

fn main() -> cpe_core::Result<()> {
    let inst = GeneralSampInstance::new(
        MeanProfile::new(vec![0.5, -0.5, 1.5])?,
        (0..=3).map(|j| AnswerRegion::CountAbove { theta: 0.0, count: j }).collect(),
    )?;
    println!("correct region {}, Low(I) = {:.3}", inst.correct_region(), solve_low_general(&inst)?.value);
    for seed in 0..5 {
        let mut alg = LpSample::new(&inst, 0.01)?;
        let out = drive(&mut alg, &mut GaussianEnvironment::new(inst.profile().clone(), seed), u64::MAX);
        let t = alg.trace();
        println!(
            "seed {seed}: answer {:?}  stage-1 steps {:>5}  r_t {:.3}  LP {:>7.2}  stage-2 pulls {:>6}  stat {:.1}/{:.1}  total {}",
            out.result, t.stage_one_steps, t.r_t, t.lp_value, t.stage_two_pulls, t.statistic, t.threshold, out.total_pulls
        );
    }
    Ok(())
}
