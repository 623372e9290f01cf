//! Cutting-plane solver for the semi-infinite verification LP
//!
//! ```text
//! minimize Σ x_i   subject to   Σ_i (μ̃_i − c_i)² x_i ≥ 1   for all μ̃ in the alternative regions,  x ≥ 0
//! ```

use minilp::{ComparisonOp, OptimizationDirection, Problem, Solution, Variable};

use crate::error::{Error, Result};

use super::regions::{region_min_sqdist, AnswerRegion};

/// Maximum number of cuts before giving up.
pub const CUT_CAP: usize = 500;
/// A point is a violated cut when its weighted distance is below 1 − this.
pub const CUT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub region: usize,
    pub point: Vec<f64>,
    /// (μ̃_i − c_i)².
    pub coeffs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CutPlaneSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub cuts: Vec<Cut>,
    /// Smallest weighted distance to any alternative region at the final x.
    pub min_margin: f64,
}

fn lp_error(e: minilp::Error) -> Error {
    Error::NonConvergence(format!("verification LP: {e}"))
}

fn make_cut(region: usize, point: Vec<f64>, center: &[f64]) -> Cut {
    let coeffs = point.iter().zip(center).map(|(p, c)| (p - c) * (p - c)).collect();
    Cut { region, point, coeffs }
}

fn add_cut(sol: Solution, vars: &[Variable], cut: &Cut) -> Result<Solution> {
    let scale = cut.coeffs.iter().copied().fold(0.0, f64::max);
    let terms: Vec<(Variable, f64)> =
        vars.iter().zip(&cut.coeffs).filter(|(_, d)| **d > 0.0).map(|(v, d)| (*v, d / scale)).collect();
    sol.add_constraint(terms, ComparisonOp::Ge, 1.0 / scale).map_err(lp_error)
}

/// Solve the LP over the closure of `alt`, seen from `center`.
pub fn solve_alt_lp(center: &[f64], alt: &[(usize, &AnswerRegion)]) -> Result<CutPlaneSolution> {
    let n = center.len();
    if alt.is_empty() {
        return Ok(CutPlaneSolution { x: vec![0.0; n], value: 0.0, cuts: Vec::new(), min_margin: f64::INFINITY });
    }
    let ones = vec![1.0; n];
    let nearest = |w: &[f64]| -> Result<Vec<(f64, usize, Vec<f64>)>> {
        alt.iter()
            .map(|(k, r)| region_min_sqdist(r, w, center).map(|(v, p)| (v, *k, p)))
            .collect()
    };

    let start = nearest(&ones)?;
    let (d0, k0, p0) = start.iter().min_by(|a, b| a.0.total_cmp(&b.0)).cloned().expect("nonempty");
    if !(d0 > 0.0) {
        return Err(Error::InvalidInput("centre lies in the closure of an alternative region".into()));
    }

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Variable> = (0..n).map(|_| problem.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let first = make_cut(k0, p0, center);
    let scale = first.coeffs.iter().copied().fold(0.0, f64::max);
    problem.add_constraint(
        vars.iter().zip(&first.coeffs).filter(|(_, d)| **d > 0.0).map(|(v, d)| (*v, d / scale)).collect::<Vec<_>>(),
        ComparisonOp::Ge,
        1.0 / scale,
    );
    let mut sol = problem.solve().map_err(lp_error)?;
    let mut cuts = vec![first];

    loop {
        let x: Vec<f64> = vars.iter().map(|v| sol[*v].max(0.0)).collect();
        // evaluate at the true weights; a slightly regularised copy picks the cut point
        let xmax = x.iter().copied().fold(0.0, f64::max);
        let wreg: Vec<f64> = x.iter().map(|v| v + 1e-9 * xmax).collect();
        let mut violated = Vec::new();
        let mut margin = f64::INFINITY;
        for (_, k, p) in nearest(&wreg)? {
            let v: f64 = x.iter().zip(&p).zip(center).map(|((w, p), c)| w * (p - c) * (p - c)).sum();
            margin = margin.min(v);
            if v < 1.0 - CUT_TOL {
                violated.push(make_cut(k, p, center));
            }
        }
        if violated.is_empty() {
            let value = x.iter().sum();
            return Ok(CutPlaneSolution { x, value, cuts, min_margin: margin });
        }
        if cuts.len() + violated.len() > CUT_CAP {
            return Err(Error::NonConvergence(format!("cutting planes exceeded {CUT_CAP} cuts")));
        }
        for cut in violated {
            sol = add_cut(sol, &vars, &cut)?;
            cuts.push(cut);
        }
    }
}
