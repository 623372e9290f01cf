//! Unique, OPT and Check over an implicit family.

use crate::error::{Error, Result};
use crate::model::ArmSet;
use crate::oracles::pareto::rounded_keys;
use crate::oracles::{integer_frontier, FamilyOracle};

/// {A ∈ F : means(A) ≥ theta}, never materialised by the algorithm itself.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdFamily {
    pub means: Vec<f64>,
    pub theta: f64,
}

impl ThresholdFamily {
    pub fn new(means: Vec<f64>, theta: f64) -> Self {
        ThresholdFamily { means, theta }
    }

    pub fn contains(&self, set: &ArmSet) -> bool {
        set.weight(&self.means) >= self.theta
    }

    /// Enumerate the members; for audits on small families.
    pub fn materialize(&self, oracle: &FamilyOracle) -> Result<Vec<ArmSet>> {
        Ok(oracle.members()?.iter().filter(|s| self.contains(s)).cloned().collect())
    }
}

/// Whether exactly one member has mu-weight at least theta.
pub fn unique(oracle: &FamilyOracle, mu: &[f64], theta: f64) -> Result<bool> {
    let best = oracle.max_weight(mu)?;
    if best.weight(mu) < theta {
        return Ok(false);
    }
    Ok(match oracle.second_best_opt(mu)? {
        None => true,
        Some(s) => s.weight(mu) < theta,
    })
}

/// Additive grid for rounding an objective so that any set's rounded sum is within eps/4.
fn keys(f: &[f64], eps: f64) -> Result<Vec<i64>> {
    rounded_keys(f, eps / (2.0 * f.len().max(1) as f64))
}

/// A set with mu(A) ≥ θ − eps_mu and w(A) ≥ max{w(B) : mu(B) ≥ θ} − eps_w, or
/// `None` when no member is approximately feasible.
pub fn opt_approx_split(
    oracle: &FamilyOracle,
    mu: &[f64],
    theta: f64,
    w: &[f64],
    eps_mu: f64,
    eps_w: f64,
) -> Result<Option<ArmSet>> {
    if !(eps_mu > 0.0 && eps_w > 0.0) {
        return Err(Error::InvalidInput(format!("OPT needs positive accuracies, got ({eps_mu}, {eps_w})")));
    }
    let frontier = integer_frontier(oracle, &keys(mu, eps_mu)?, &keys(w, eps_w)?)?;
    let mut best: Option<(f64, ArmSet)> = None;
    for (set, _, _) in frontier {
        if set.weight(mu) < theta - eps_mu / 2.0 {
            continue;
        }
        let v = set.weight(w);
        let better = match &best {
            None => true,
            Some((bv, bs)) => v > *bv || (v == *bv && set.tie_break_cmp(bs).is_lt()),
        };
        if better {
            best = Some((v, set));
        }
    }
    Ok(best.map(|(_, s)| s))
}

pub fn opt_approx(oracle: &FamilyOracle, mu: &[f64], theta: f64, w: &[f64], eps: f64) -> Result<ArmSet> {
    opt_approx_split(oracle, mu, theta, w, eps, eps)?.ok_or(Error::NoApproxFeasible)
}

/// True whenever every A with mu_k(A) < θ trails `o_hat` by ≥ 2·eps under `mu_hat`;
/// false whenever some A with mu_k(A) < θ − eps trails it by ≤ eps.
pub fn check_approx(
    oracle: &FamilyOracle,
    o_hat: &ArmSet,
    mu_k: &[f64],
    mu_hat: &[f64],
    theta: f64,
    eps: f64,
) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("Check needs a positive accuracy, got {eps}")));
    }
    let below: Vec<f64> = mu_k.iter().map(|v| -v).collect();
    let top = o_hat.weight(mu_hat);
    for (set, _, _) in integer_frontier(oracle, &keys(&below, eps)?, &keys(mu_hat, eps)?)? {
        if set.weight(mu_k) < theta - eps / 2.0 && top - set.weight(mu_hat) <= 1.5 * eps {
            return Ok(false);
        }
    }
    Ok(true)
}
