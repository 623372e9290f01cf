//! Instance complexity measures: Low(C) for Best-Set, the gap-based H_C(C),
//! and Low(I) for General-Samp.

use crate::convex::{solve_inverse_packing, PackingConstraint};
use crate::error::Result;
use crate::general::cutting::solve_alt_lp;
use crate::general::GeneralSampInstance;
use crate::model::{chen_gap, Allocation, ArmSet, BestSetInstance, Gap};

/// A constraint that is tight at the reported optimum.
#[derive(Clone, Debug, PartialEq)]
pub enum ActiveConstraint {
    /// Σ_{i∈O⊕A} 1/τ_i ≤ gap(A)².
    Pair { alternative: ArmSet, arms: ArmSet, bound: f64 },
    /// Σ_i (μ̃_i − μ_i)² τ_i ≥ 1 at an alternative point μ̃ of region `region`.
    Cut { region: usize, point: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct LowSolution {
    pub value: f64,
    pub allocation: Allocation,
    pub certificate: Vec<ActiveConstraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardnessReport {
    pub value: f64,
    /// Δ_i^{-2} per arm; 0 for arms whose gap is unconstrained.
    pub per_arm: Vec<f64>,
}

/// Low(C): min Σ τ_i s.t. Σ_{i∈O⊕A} 1/τ_i ≤ (μ(O) − μ(A))² for every A ≠ O.
pub fn solve_low_bestset(instance: &BestSetInstance) -> Result<LowSolution> {
    let o = instance.optimum();
    let mu = instance.means();
    let wo = o.weight(mu);
    let mut constraints = Vec::new();
    let mut owners = Vec::new();
    for a in instance.family().members()? {
        if a == o {
            continue;
        }
        let gap = wo - a.weight(mu);
        constraints.push(PackingConstraint::new(o.sym_diff(a), gap * gap));
        owners.push(a.clone());
    }
    let sol = solve_inverse_packing(instance.n(), &constraints)?;
    let mut certificate = Vec::new();
    for c in sol.active() {
        // report the first alternative that generated each tight constraint
        let owner = constraints
            .iter()
            .zip(&owners)
            .find(|(k, _)| k.arms == c.arms && k.bound == c.bound)
            .map(|(_, a)| a.clone())
            .expect("solved constraints come from the input");
        certificate.push(ActiveConstraint::Pair { alternative: owner, arms: c.arms.clone(), bound: c.bound });
    }
    Ok(LowSolution { value: sol.value, allocation: sol.tau, certificate })
}

/// H_C(C) = Σ_i Δ_i^{-2}, skipping arms with unconstrained gaps.
pub fn hardness_hc(instance: &BestSetInstance) -> Result<HardnessReport> {
    let mut per_arm = Vec::with_capacity(instance.n());
    for i in 0..instance.n() {
        per_arm.push(match chen_gap(instance, i)? {
            Gap::Finite(g) => 1.0 / (g * g),
            Gap::Unconstrained => 0.0,
        });
    }
    Ok(HardnessReport { value: per_arm.iter().sum(), per_arm })
}

/// Low(I): min Σ τ_i s.t. Σ_i (μ̃_i − μ_i)² τ_i ≥ 1 for all μ̃ in Alt, by cutting planes.
pub fn solve_low_general(instance: &GeneralSampInstance) -> Result<LowSolution> {
    let alt = instance.alternatives(instance.correct_region());
    let sol = solve_alt_lp(instance.profile().means(), &alt)?;
    let certificate = sol
        .cuts
        .iter()
        .filter(|c| {
            let lhs: f64 = c.coeffs.iter().zip(&sol.x).map(|(d, x)| d * x).sum();
            lhs <= 1.0 + 1e-6
        })
        .map(|c| ActiveConstraint::Cut { region: c.region, point: c.point.clone() })
        .collect();
    Ok(LowSolution { value: sol.value, allocation: Allocation::new(sol.x)?, certificate })
}
