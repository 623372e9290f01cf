//! SimultEst and Verify over threshold families, solved by the Ellipsoid
//! method in the variables x_i = 1/m_i with an approximate separation oracle.
//!
//! Separation picks O, then O1 maximising x(O \ O1) and O2 maximising
//! x(O2 \ O) through OPT with masked weights, allowing members down to the
//! lower threshold. For SimultEst every pair A, B above the upper threshold
//! has x(A⊕B) ≤ 2(x(O\O1) + x(O2\O)) up to OPT's error, for Verify x(Ô⊕A) ≤ the
//! sum itself; the acceptance levels below make accepted points feasible.

use crate::error::Result;
use crate::model::{Allocation, ArmSet};
use crate::oracles::{FamilyOracle, Restriction};
use crate::stats::log_two_over;

use super::ellipsoid::{minimize_inverse_sum, Cut, EllipsoidConfig};
use super::subroutines::opt_approx_split;

/// OPT's weight accuracy as a fraction of the constraint bound.
const WEIGHT_EPS_FRACTION: f64 = 1.0 / 64.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Separation {
    Feasible,
    /// O \ O1 and O2 \ O together carry too much inverse budget.
    Violated { o: ArmSet, o1: ArmSet, o2: ArmSet, value: f64 },
}

impl Separation {
    fn normal(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            Separation::Feasible => None,
            Separation::Violated { o, o1, o2, .. } => {
                let mut g = vec![0.0; n];
                for i in o.minus(o1).iter().chain(o2.minus(o).iter()) {
                    g[i] = 1.0;
                }
                Some(g)
            }
        }
    }
}

/// (v1, v2, O1, O2) for a fixed O: approximately maximal x(O \ O1) and x(O2 \ O)
/// over members with mu ≥ theta_high, relaxed to theta_low.
fn one_sided(
    oracle: &FamilyOracle,
    mu: &[f64],
    theta_high: f64,
    theta_low: f64,
    o: &ArmSet,
    x: &[f64],
    eps_w: f64,
) -> Result<(f64, f64, ArmSet, ArmSet)> {
    let n = x.len();
    let eps_mu = theta_high - theta_low;
    let in_o = o.mask(n);
    let w1: Vec<f64> = (0..n).map(|i| if in_o[i] { -x[i] } else { 0.0 }).collect();
    let w2: Vec<f64> = (0..n).map(|i| if in_o[i] { 0.0 } else { x[i] }).collect();
    let o1 = opt_approx_split(oracle, mu, theta_high, &w1, eps_mu, eps_w)?.unwrap_or_else(|| o.clone());
    let o2 = opt_approx_split(oracle, mu, theta_high, &w2, eps_mu, eps_w)?.unwrap_or_else(|| o.clone());
    let v1 = o.minus(&o1).weight(x);
    let v2 = o2.minus(o).weight(x);
    Ok((v1, v2, o1, o2))
}

/// Approximate separation for the SimultEst constraint family
/// {x(A⊕B) ≤ bound : mu(A), mu(B) ≥ theta_high}.
pub fn separation_2approx(
    oracle: &FamilyOracle,
    mu: &[f64],
    theta_high: f64,
    theta_low: f64,
    x: &[f64],
    bound: f64,
) -> Result<Separation> {
    let o = oracle.max_weight(mu)?;
    if o.weight(mu) < theta_high {
        return Ok(Separation::Feasible);
    }
    let eps_w = bound * WEIGHT_EPS_FRACTION;
    let (v1, v2, o1, o2) = one_sided(oracle, mu, theta_high, theta_low, &o, x, eps_w)?;
    if v1 + v2 + 2.0 * eps_w < bound / 2.0 {
        Ok(Separation::Feasible)
    } else {
        Ok(Separation::Violated { o, o1, o2, value: v1 + v2 })
    }
}

/// Whether arm `i` is in some member with mu ≥ theta (`inside`) or outside some such member.
fn reaches(oracle: &FamilyOracle, mu: &[f64], theta: f64, i: usize, inside: bool) -> Result<bool> {
    let mut r = Restriction::none(oracle.n_arms());
    if inside {
        r.required[i] = true;
    } else {
        r.excluded[i] = true;
    }
    Ok(oracle.max_weight_restricted(mu, &r)?.is_some_and(|s| s.weight(mu) >= theta))
}

/// Cut through the current point: points the oracle may still accept lie on
/// both sides of any deeper level.
fn central(g: Vec<f64>, x: &[f64]) -> (Vec<f64>, f64) {
    let level = g.iter().zip(x).map(|(a, b)| a * b).sum();
    (g, level)
}

/// Result of one allocation program.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramSolution {
    pub allocation: Allocation,
    /// Arms carrying a variable; the others never separate two candidate sets.
    pub variables: Vec<usize>,
    pub iterations: usize,
    pub cuts: usize,
    pub capped: bool,
}

impl ProgramSolution {
    fn zero(n: usize) -> Self {
        ProgramSolution { allocation: Allocation::zeros(n), variables: Vec::new(), iterations: 0, cuts: 0, capped: false }
    }
}

/// Shared Ellipsoid driver. `accept(x_full)` returns `None` or a violated normal with its level.
fn solve<F>(n: usize, variables: Vec<usize>, ub: f64, start: f64, safe: f64, mut separate: F) -> Result<ProgramSolution>
where
    F: FnMut(&[f64]) -> Result<Option<(Vec<f64>, f64)>>,
{
    let d = variables.len();
    if d == 0 {
        return Ok(ProgramSolution::zero(n));
    }
    let lift = |y: &[f64]| {
        let mut x = vec![0.0; n];
        for (k, &i) in variables.iter().enumerate() {
            x[i] = y[k];
        }
        x
    };
    let out = minimize_inverse_sum(
        ub,
        vec![start; d],
        10.0 * d as f64 * ub,
        vec![safe; d],
        &EllipsoidConfig::default(),
        |y| {
            Ok(match separate(&lift(y))? {
                None => Cut::Accept,
                Some((g, level)) => Cut::Reject { normal: variables.iter().map(|&i| g[i]).collect(), level },
            })
        },
    )?;
    let mut m = vec![0.0; n];
    for (k, &i) in variables.iter().enumerate() {
        m[i] = 1.0 / out.x[k];
    }
    Ok(ProgramSolution {
        allocation: Allocation::new(m)?,
        variables,
        iterations: out.iterations,
        cuts: out.cuts,
        capped: out.capped,
    })
}

/// SimultEst on {A : mu(A) ≥ theta_high}: Σ_{A⊕B} 1/m_i ≤ eps²/(2 ln(2/δ)) for every
/// pair, with cost within a constant of the program over {A : mu(A) ≥ theta_low}.
pub fn simult_est_implicit(
    oracle: &FamilyOracle,
    mu: &[f64],
    theta_high: f64,
    theta_low: f64,
    eps: f64,
    delta: f64,
) -> Result<ProgramSolution> {
    let n = oracle.n_arms();
    let bound = eps * eps / (2.0 * log_two_over(delta));
    let mut variables = Vec::new();
    for i in 0..n {
        if reaches(oracle, mu, theta_low, i, true)? && reaches(oracle, mu, theta_low, i, false)? {
            variables.push(i);
        }
    }
    let d = variables.len().max(1) as f64;
    solve(n, variables, bound, bound / d, bound / (8.0 * d), |x| {
        let sep = separation_2approx(oracle, mu, theta_high, theta_low, x, bound)?;
        Ok(sep.normal(n).map(|g| central(g, x)))
    })
}

/// One Verify constraint group: every A with `means(A) ≥ theta_high` must have
/// its gap to Ô estimated to ±accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyTerm {
    pub means: Vec<f64>,
    pub theta_high: f64,
    pub theta_low: f64,
    pub accuracy: f64,
}

/// Verify: Σ_{Ô⊕A} 1/m_i ≤ accuracy²/(2 ln(2/δ)) for every term and every A above its threshold.
pub fn verify_implicit(oracle: &FamilyOracle, o_hat: &ArmSet, terms: &[VerifyTerm], delta: f64) -> Result<ProgramSolution> {
    let n = oracle.n_arms();
    let log = log_two_over(delta);
    let bounds: Vec<f64> = terms.iter().map(|t| t.accuracy * t.accuracy / (2.0 * log)).collect();
    let mut variables = Vec::new();
    for i in 0..n {
        let inside = o_hat.contains(i);
        let mut relevant = false;
        for t in terms {
            if reaches(oracle, &t.means, t.theta_low, i, !inside)? {
                relevant = true;
                break;
            }
        }
        if relevant {
            variables.push(i);
        }
    }
    if terms.is_empty() {
        return Ok(ProgramSolution::zero(n));
    }
    let d = variables.len().max(1) as f64;
    let ub = bounds.iter().copied().fold(0.0, f64::max);
    let low = bounds.iter().copied().fold(f64::INFINITY, f64::min);
    solve(n, variables, ub, ub / d, low / (4.0 * d), |x| {
        for (t, &bound) in terms.iter().zip(&bounds) {
            let eps_w = bound * WEIGHT_EPS_FRACTION;
            let (v1, v2, o1, o2) = one_sided(oracle, &t.means, t.theta_high, t.theta_low, o_hat, x, eps_w)?;
            if v1 + v2 + 2.0 * eps_w >= bound {
                let sep = Separation::Violated { o: o_hat.clone(), o1, o2, value: v1 + v2 };
                return Ok(sep.normal(n).map(|g| central(g, x)));
            }
        }
        Ok(None)
    })
}
