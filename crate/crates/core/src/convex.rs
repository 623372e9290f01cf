//! Log-barrier interior-point solver for the allocation programs
//!
//! ```text
//! minimize Σ_i 1/x_i   subject to   Σ_{i∈S_j} x_i ≤ b_j   for every j
//! ```
//!
//! which is the budget program `min Σ τ_i, Σ_{i∈S_j} 1/τ_i ≤ b_j` after the
//! substitution x = 1/τ. Arms that appear in no constraint get τ = 0.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Allocation, ArmSet};

#[derive(Clone, Debug, PartialEq)]
pub struct PackingConstraint {
    pub arms: ArmSet,
    pub bound: f64,
}

impl PackingConstraint {
    pub fn new(arms: ArmSet, bound: f64) -> Self {
        PackingConstraint { arms, bound }
    }
}

#[derive(Clone, Debug)]
pub struct PackingSolution {
    /// x_i = 1/τ_i on constrained arms, 0 elsewhere.
    pub x: Vec<f64>,
    pub tau: Allocation,
    pub value: f64,
    /// Deduplicated constraints actually solved (tightest bound per arm set).
    pub constraints: Vec<PackingConstraint>,
    /// Lagrange multipliers, aligned with `constraints`.
    pub duals: Vec<f64>,
    pub newton_steps: usize,
}

impl PackingSolution {
    /// Constraints whose relative slack is below 1e-3.
    pub fn active(&self) -> Vec<&PackingConstraint> {
        self.constraints
            .iter()
            .filter(|c| {
                let lhs: f64 = c.arms.iter().map(|i| self.x[i]).sum();
                c.bound - lhs <= 1e-3 * c.bound
            })
            .collect()
    }

    /// Largest relative stationarity violation |−1/x_i² + Σ_j λ_j a_ji| · x_i².
    pub fn kkt_residual(&self) -> f64 {
        let mut grad: Vec<f64> = vec![0.0; self.x.len()];
        for (c, l) in self.constraints.iter().zip(&self.duals) {
            for i in c.arms.iter() {
                grad[i] += l;
            }
        }
        self.x
            .iter()
            .zip(&grad)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, g)| (g * x * x - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest relative violation max_j (Σ_{S_j} x − b_j)/b_j, clipped at 0.
    pub fn max_violation(&self) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let lhs: f64 = c.arms.iter().map(|i| self.x[i]).sum();
                ((lhs - c.bound) / c.bound).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

const GAP_TOL: f64 = 1e-9;
const MAX_NEWTON: usize = 200;

/// Solve the inverse-budget packing program over `n` arms.
pub fn solve_inverse_packing(n: usize, constraints: &[PackingConstraint]) -> Result<PackingSolution> {
    let mut merged: BTreeMap<ArmSet, f64> = BTreeMap::new();
    for c in constraints {
        c.arms.check_range(n)?;
        if c.arms.is_empty() {
            if c.bound < 0.0 {
                return Err(Error::Infeasible("empty constraint with negative bound".into()));
            }
            continue;
        }
        if !(c.bound > 0.0) || !c.bound.is_finite() {
            return Err(Error::Infeasible(format!("constraint on {} has bound {}", c.arms, c.bound)));
        }
        let e = merged.entry(c.arms.clone()).or_insert(f64::INFINITY);
        *e = e.min(c.bound);
    }
    let constraints: Vec<PackingConstraint> =
        merged.into_iter().map(|(arms, bound)| PackingConstraint { arms, bound }).collect();
    if constraints.is_empty() {
        return Ok(PackingSolution {
            x: vec![0.0; n],
            tau: Allocation::zeros(n),
            value: 0.0,
            constraints,
            duals: Vec::new(),
            newton_steps: 0,
        });
    }

    // variable index per constrained arm
    let mut var_of = vec![usize::MAX; n];
    let mut arms_of_var = Vec::new();
    for c in &constraints {
        for i in c.arms.iter() {
            if var_of[i] == usize::MAX {
                var_of[i] = arms_of_var.len();
                arms_of_var.push(i);
            }
        }
    }
    let d = arms_of_var.len();
    let m = constraints.len();
    let scale = constraints.iter().map(|c| c.bound).fold(0.0, f64::max);
    let b: Vec<f64> = constraints.iter().map(|c| c.bound / scale).collect();
    let mut a = DMatrix::<f64>::zeros(m, d);
    for (j, c) in constraints.iter().enumerate() {
        for i in c.arms.iter() {
            a[(j, var_of[i])] = 1.0;
        }
    }

    let mut x = DVector::<f64>::from_element(d, f64::INFINITY);
    for (j, c) in constraints.iter().enumerate() {
        let share = 0.5 * b[j] / c.arms.len() as f64;
        for i in c.arms.iter() {
            let v = var_of[i];
            x[v] = x[v].min(share);
        }
    }

    let objective = |x: &DVector<f64>| x.iter().map(|v| 1.0 / v).sum::<f64>();
    let slacks = |x: &DVector<f64>| -> DVector<f64> {
        let ax = &a * x;
        DVector::from_iterator(m, (0..m).map(|j| b[j] - ax[j]))
    };
    let barrier = |x: &DVector<f64>, t: f64| -> Option<f64> {
        if x.iter().any(|v| *v <= 0.0) {
            return None;
        }
        let s = slacks(x);
        if s.iter().any(|v| *v <= 0.0) {
            return None;
        }
        Some(t * objective(x) - s.iter().map(|v| v.ln()).sum::<f64>())
    };

    let mut t = m as f64 / objective(&x);
    let mut steps = 0usize;
    loop {
        for _ in 0..MAX_NEWTON {
            steps += 1;
            let s = slacks(&x);
            let inv_s = s.map(|v| 1.0 / v);
            let mut g = a.tr_mul(&inv_s);
            for k in 0..d {
                g[k] -= t / (x[k] * x[k]);
            }
            let mut scaled = a.clone();
            for j in 0..m {
                scaled.row_mut(j).scale_mut(inv_s[j]);
            }
            let mut h = scaled.tr_mul(&scaled);
            for k in 0..d {
                h[(k, k)] += 2.0 * t / (x[k] * x[k] * x[k]);
            }
            let chol = h
                .cholesky()
                .ok_or_else(|| Error::NonConvergence("barrier Hessian lost definiteness".into()))?;
            let dx = chol.solve(&(-&g));
            let decrement = -g.dot(&dx);
            let rel_grad = (0..d).map(|k| (g[k] * x[k] * x[k] / t).abs()).fold(0.0, f64::max);
            if rel_grad <= 1e-11 || decrement <= 1e-24 {
                break;
            }
            // in the quadratic-convergence zone only interiority is enforced
            let armijo = decrement > 1e-6;
            let f0 = barrier(&x, t).expect("iterate stays interior");
            let mut alpha = 1.0;
            loop {
                let cand = &x + alpha * &dx;
                if let Some(f1) = barrier(&cand, t) {
                    if !armijo || f1 <= f0 - 0.25 * alpha * decrement {
                        x = cand;
                        break;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-20 {
                    return Err(Error::NonConvergence("line search stalled".into()));
                }
            }
        }
        if m as f64 / t <= GAP_TOL * objective(&x) {
            break;
        }
        t *= 10.0;
    }

    let s = slacks(&x);
    let duals: Vec<f64> = s.iter().map(|v| 1.0 / (t * v * scale * scale)).collect();
    let mut full = vec![0.0; n];
    for (v, &arm) in arms_of_var.iter().enumerate() {
        full[arm] = x[v] * scale;
    }
    let tau: Vec<f64> = full.iter().map(|&v| if v > 0.0 { 1.0 / v } else { 0.0 }).collect();
    let value = tau.iter().sum();
    Ok(PackingSolution {
        x: full,
        tau: Allocation::new(tau)?,
        value,
        constraints,
        duals,
        newton_steps: steps,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Grid search over τ for n ≤ 3 arms, refining the box around the incumbent.
    pub(crate) fn brute_force(n: usize, constraints: &[PackingConstraint]) -> f64 {
        let feasible = |tau: &[f64]| {
            constraints.iter().all(|c| c.arms.iter().map(|i| 1.0 / tau[i]).sum::<f64>() <= c.bound * (1.0 + 1e-12))
        };
        let used: Vec<bool> = (0..n).map(|i| constraints.iter().any(|c| c.arms.contains(i))).collect();
        let upper = constraints.iter().map(|c| c.arms.len() as f64 / c.bound).sum::<f64>() * 4.0;
        let mut lo = vec![0.0; n];
        let mut hi = vec![upper; n];
        let mut best = f64::INFINITY;
        let mut best_tau = vec![upper; n];
        let steps = 60usize;
        for _ in 0..25 {
            let mut idx = vec![0usize; n];
            loop {
                let tau: Vec<f64> = (0..n)
                    .map(|i| if used[i] { lo[i] + (hi[i] - lo[i]) * (idx[i] as f64 + 1.0) / steps as f64 } else { f64::INFINITY })
                    .collect();
                if feasible(&tau) {
                    let v: f64 = (0..n).filter(|&i| used[i]).map(|i| tau[i]).sum();
                    if v < best {
                        best = v;
                        best_tau = tau.clone();
                    }
                }
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    if !used[k] {
                        k += 1;
                        continue;
                    }
                    idx[k] += 1;
                    if idx[k] < steps {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
            for i in 0..n {
                if used[i] {
                    let w = (hi[i] - lo[i]) / steps as f64 * 3.0;
                    lo[i] = (best_tau[i] - w).max(0.0);
                    hi[i] = best_tau[i] + w;
                }
            }
        }
        best
    }

    fn c(arms: &[usize], bound: f64) -> PackingConstraint {
        PackingConstraint::new(ArmSet::new(arms.iter().copied()), bound)
    }

    #[test]
    fn single_constraint_symmetric_optimum() {
        let sol = solve_inverse_packing(2, &[c(&[0, 1], 1.0)]).unwrap();
        assert_relative_eq!(sol.value, 4.0, max_relative = 1e-7);
        assert_relative_eq!(sol.tau.budget()[0], 2.0, max_relative = 1e-6);
        assert!(sol.kkt_residual() < 1e-6);
        assert_eq!(sol.active().len(), 1);
    }

    #[test]
    fn unconstrained_arms_get_zero() {
        let sol = solve_inverse_packing(4, &[c(&[1, 2], 0.5)]).unwrap();
        assert_eq!(sol.tau.budget()[0], 0.0);
        assert_eq!(sol.tau.budget()[3], 0.0);
        assert_relative_eq!(sol.value, 8.0, max_relative = 1e-7);
    }

    #[test]
    fn empty_program_is_zero() {
        let sol = solve_inverse_packing(3, &[]).unwrap();
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn duplicate_sets_keep_tightest_bound() {
        let sol = solve_inverse_packing(1, &[c(&[0], 2.0), c(&[0], 0.5)]).unwrap();
        assert_eq!(sol.constraints.len(), 1);
        assert_relative_eq!(sol.value, 2.0, max_relative = 1e-7);
    }

    #[test]
    fn tiny_bounds_are_handled_by_rescaling() {
        let bound = 1e-7;
        let sol = solve_inverse_packing(3, &[c(&[0, 1, 2], bound)]).unwrap();
        assert_relative_eq!(sol.value, 9.0 / bound, max_relative = 1e-7);
    }

    #[test]
    fn matches_brute_force_on_small_programs() {
        let programs = vec![
            (2, vec![c(&[0, 1], 1.0), c(&[0], 0.3)]),
            (3, vec![c(&[0, 1], 1.0), c(&[1, 2], 0.25), c(&[0, 2], 2.0)]),
            (3, vec![c(&[0, 1, 2], 1.0), c(&[2], 0.1)]),
            (3, vec![c(&[0], 0.5), c(&[1, 2], 0.5), c(&[0, 1], 0.2), c(&[0, 1, 2], 0.6)]),
        ];
        for (n, cons) in programs {
            let sol = solve_inverse_packing(n, &cons).unwrap();
            let brute = brute_force(n, &cons);
            assert!(sol.max_violation() <= 1e-9);
            assert!(sol.value <= brute * (1.0 + 1e-6), "ipm {} brute {}", sol.value, brute);
            assert!(sol.value >= brute * (1.0 - 1e-3), "ipm {} brute {}", sol.value, brute);
            assert!(sol.kkt_residual() < 1e-6, "kkt {}", sol.kkt_residual());
        }
    }

    #[test]
    fn rejects_nonpositive_bounds() {
        assert!(solve_inverse_packing(2, &[c(&[0], 0.0)]).is_err());
        assert!(solve_inverse_packing(2, &[c(&[5], 1.0)]).is_err());
    }
}
