//! Lower-bound constructions: a design family, the OR instance and the
//! staged ball-case tester.

use cpe_core::hard::{ball_case_test, nw_design, or_instance, BallCaseConfig};
use cpe_core::lower_bounds::solve_low_general;
use cpe_core::model::{GaussianEnvironment, MeanProfile};

fn main() -> cpe_core::Result<()> {
    for (n, m) in [(100, 16), (200, 64)] {
        let d = nw_design(n, m, 1)?;
        println!("design n={n} m={m}: ell {}, max pairwise intersection {}", d.ell, d.max_overlap());
    }

    for gap in [0.5, 0.25, 0.1] {
        let inst = or_instance(8, gap, Some(3))?;
        println!("OR n=8 gap={gap}: Low(I) = {:.2} (gap^-2 = {:.2})", solve_low_general(&inst)?.value, gap.powi(-2));
    }

    for n in [64, 256] {
        let cfg = BallCaseConfig::new(vec![0.0; n], 0.5)?;
        let mut spike = vec![0.0; n];
        spike[n / 2] = 0.5;
        for (label, x) in [("x = u", vec![0.0; n]), ("|x - u| = r", spike)] {
            let mut env = GaussianEnvironment::new(MeanProfile::new(x)?, 7);
            let out = ball_case_test(&mut env, &cfg, 0.05)?;
            println!("ball n={n} {label:<12} -> {:?} after {} stages, {} pulls", out.verdict, out.stages, out.total_pulls);
        }
    }
    Ok(())
}
