//! Divergences and tail bounds for unit-variance Gaussian arms.

use crate::error::{Error, Result};

/// A probability bound, clamped to [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct TailBound(f64);

impl TailBound {
    pub fn new(p: f64) -> Self {
        TailBound(p.clamp(0.0, 1.0))
    }

    pub fn probability(self) -> f64 {
        self.0
    }
}

/// KL divergence between N(mu1, 1) and N(mu2, 1).
pub fn kl_gaussian(mu1: f64, mu2: f64) -> f64 {
    0.5 * (mu1 - mu2) * (mu1 - mu2)
}

/// d(x, y) = x ln(x/y) + (1−x) ln((1−x)/(1−y)).
pub fn binary_rel_entropy(x: f64, y: f64) -> Result<f64> {
    let open = |v: f64| v > 0.0 && v < 1.0;
    if !open(x) || !open(y) {
        return Err(Error::InvalidInput(format!("binary entropy needs x, y in (0,1), got ({x}, {y})")));
    }
    Ok(x * (x / y).ln() + (1.0 - x) * ((1.0 - x) / (1.0 - y)).ln())
}

/// Bound on Pr[|Σ_{i∈T}(μ̂_i − μ_i)| ≥ ε] when arm i gets τ_i samples and
/// `inverse_budget_sum` = Σ_{i∈T} 1/τ_i.
pub fn sum_dev_tail(epsilon: f64, inverse_budget_sum: f64) -> Result<TailBound> {
    if !(epsilon > 0.0) || !(inverse_budget_sum > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sum_dev_tail needs positive arguments, got ({epsilon}, {inverse_budget_sum})"
        )));
    }
    Ok(TailBound::new(2.0 * (-epsilon * epsilon / (2.0 * inverse_budget_sum)).exp()))
}

/// Bound e^{-x} on Pr[X ≥ 2n + 3x] for X ~ χ²_n.
pub fn chi2_tail(n: u64, x: f64) -> Result<TailBound> {
    if n == 0 {
        return Err(Error::InvalidInput("chi-squared degrees of freedom must be ≥ 1".into()));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidInput(format!("chi2_tail needs x ≥ 0, got {x}")));
    }
    Ok(TailBound::new((-x).exp()))
}

/// r_t = sqrt([2n + 3 ln(4t²/δ0)] / t).
pub fn conf_radius(t: u64, n: usize, delta0: f64) -> Result<f64> {
    if t == 0 || n == 0 || !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::InvalidInput(format!("conf_radius({t}, {n}, {delta0}) out of domain")));
    }
    let t = t as f64;
    Ok(((2.0 * n as f64 + 3.0 * (4.0 * t * t / delta0).ln()) / t).sqrt())
}

/// ln(2/δ), the factor shared by all allocation constraints.
pub(crate) fn log_two_over(delta: f64) -> f64 {
    (2.0 / delta).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kl_examples() {
        assert_eq!(kl_gaussian(1.0, 0.0), 0.5);
        assert_eq!(kl_gaussian(0.3, 0.3), 0.0);
        assert_relative_eq!(kl_gaussian(0.4, 0.6), 0.02, epsilon = 1e-15);
        assert_eq!(kl_gaussian(2.0, -1.0), kl_gaussian(-1.0, 2.0));
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_rel_entropy(0.5, 0.5).unwrap(), 0.0);
        assert_relative_eq!(binary_rel_entropy(0.9, 0.1).unwrap(), 0.8 * 9f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(binary_rel_entropy(0.9, 0.1).unwrap(), 1.75778, epsilon = 1e-5);
        assert!(binary_rel_entropy(0.0, 0.5).is_err());
        assert!(binary_rel_entropy(0.5, 1.0).is_err());
    }

    #[test]
    fn binary_entropy_nonnegative_on_grid() {
        for i in 1..40 {
            for j in 1..40 {
                let (x, y) = (i as f64 / 40.0, j as f64 / 40.0);
                let d = binary_rel_entropy(x, y).unwrap();
                if i == j {
                    assert!(d.abs() < 1e-15);
                } else {
                    assert!(d > 0.0);
                }
            }
        }
    }

    #[test]
    fn entropy_of_confident_pair_grows_like_log_inverse_delta() {
        let mut d = 1e-6;
        while d < 0.1 {
            let v = binary_rel_entropy(1.0 - d, d).unwrap();
            assert!(v >= 0.4 * (1.0 / d).ln(), "delta={d}");
            d *= 1.3;
        }
        assert!(binary_rel_entropy(0.95, 0.05).unwrap() >= 0.4 * 20f64.ln());
    }

    #[test]
    fn sum_dev_tail_examples() {
        assert_relative_eq!(sum_dev_tail(1.0, 0.5).unwrap().probability(), 2.0 / 1f64.exp(), epsilon = 1e-12);
        assert!(sum_dev_tail(1e3, 0.5).unwrap().probability() < 1e-300);
        let eps: f64 = 0.1;
        let s = eps * eps / (2.0 * (2.0f64 / 0.05).ln());
        assert_relative_eq!(sum_dev_tail(eps, s).unwrap().probability(), 0.05, epsilon = 1e-12);
        assert_eq!(sum_dev_tail(1e-3, 10.0).unwrap().probability(), 1.0);
        assert!(sum_dev_tail(0.0, 1.0).is_err());
    }

    #[test]
    fn chi2_tail_examples() {
        assert_eq!(chi2_tail(3, 0.0).unwrap().probability(), 1.0);
        assert_relative_eq!(chi2_tail(5, 100f64.ln()).unwrap().probability(), 0.01, epsilon = 1e-15);
        assert!(chi2_tail(0, 1.0).is_err());
    }

    #[test]
    fn conf_radius_examples() {
        assert_relative_eq!(conf_radius(1, 2, 0.01).unwrap(), (4.0 + 3.0 * 400f64.ln()).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(conf_radius(1, 2, 0.01).unwrap(), 4.6877, epsilon = 1e-4);
        assert_relative_eq!(
            conf_radius(4, 2, 0.01).unwrap(),
            ((4.0 + 3.0 * 6400f64.ln()) / 4.0).sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(conf_radius(4, 2, 0.01).unwrap(), 2.75192, epsilon = 1e-5);
        let mut prev = f64::INFINITY;
        for t in 1..2000 {
            let r = conf_radius(t, 3, 0.01).unwrap();
            assert!(r < prev);
            prev = r;
        }
        assert!(conf_radius(0, 2, 0.01).is_err());
        assert!(conf_radius(1, 2, 1.0).is_err());
    }
}
