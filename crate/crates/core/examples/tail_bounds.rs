//! The two concentration bounds used for allocations, against simulation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cpe_core::stats::{chi2_tail, conf_radius, sum_dev_tail};

fn main() -> cpe_core::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let draws = 100_000;
    println!("chi-squared: Pr[X >= 2n + 3x] vs e^-x");
    for (n, x) in [(1u64, 1.0), (4, 2.0), (8, 0.5)] {
        let cut = 2.0 * n as f64 + 3.0 * x;
        let hits = (0..draws).filter(|_| (0..n).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum::<f64>() >= cut).count();
        println!("  n={n} x={x}: {:.5} <= {:.5}", hits as f64 / draws as f64, chi2_tail(n, x)?.probability());
    }
    println!("sum of deviations over arms with budgets 4, 9, 25");
    let inv = 1.0 / 4.0 + 1.0 / 9.0 + 1.0 / 25.0;
    for eps in [0.5, 1.0, 1.5] {
        let hits = (0..draws)
            .filter(|_| {
                let dev: f64 = [4.0f64, 9.0, 25.0].iter().map(|t| rng.sample::<f64, _>(StandardNormal) / t.sqrt()).sum();
                dev.abs() >= eps
            })
            .count();
        println!("  eps={eps}: {:.5} <= {:.5}", hits as f64 / draws as f64, sum_dev_tail(eps, inv)?.probability());
    }
    println!("LPSample radius r_t for n=3: {:?}", [1, 10, 100, 1000].map(|t| (conf_radius(t, 3, 0.01).unwrap() * 1e3).round() / 1e3));
    Ok(())
}
