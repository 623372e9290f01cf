//! Ellipsoid method for min Σ 1/x_i over 0 < x ≤ ub intersected with a region
//! known only through a separation oracle.
//!
//! Feasibility cuts come from the oracle, objective cuts from the gradient at
//! accepted centres (sliding objective). Every cut keeps the halfspace
//! g·x ≤ level, applied as a deep cut when the centre violates it by a margin.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Oracle verdict at a point.
#[derive(Clone, Debug, PartialEq)]
pub enum Cut {
    Accept,
    /// Keep {x : normal·x ≤ level}.
    Reject { normal: Vec<f64>, level: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidConfig {
    /// Stop once the certified gap is at most this fraction of the incumbent.
    pub rel_gap: f64,
    /// Iteration cap multiplier: cap = factor · d².
    pub cap_factor: f64,
}

impl Default for EllipsoidConfig {
    fn default() -> Self {
        EllipsoidConfig { rel_gap: 0.01, cap_factor: 16.0 * 1e6f64.ln() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EllipsoidOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Largest certified lower bound on the objective over the kept region.
    pub lower_bound: f64,
    pub iterations: usize,
    /// Number of oracle rejections.
    pub cuts: usize,
    pub capped: bool,
}

fn objective(x: &[f64]) -> f64 {
    x.iter().map(|v| 1.0 / v).sum()
}

/// d = 1: bisection on (0, ub]; 1/x is decreasing, so accepted points only raise `lo`.
fn interval_search<F>(ub: f64, incumbent: f64, cap: usize, cfg: &EllipsoidConfig, mut oracle: F) -> Result<EllipsoidOutcome>
where
    F: FnMut(&[f64]) -> Result<Cut>,
{
    let (mut lo, mut hi) = (incumbent, ub);
    let mut cuts = 0;
    let mut it = 0;
    while it < cap && 1.0 / lo - 1.0 / hi > cfg.rel_gap / lo {
        it += 1;
        let c = 0.5 * (lo + hi);
        match oracle(&[c])? {
            Cut::Accept => lo = c,
            Cut::Reject { normal, level } => {
                cuts += 1;
                hi = if normal[0] > 0.0 { (level / normal[0]).min(c) } else { c }.max(lo);
            }
        }
    }
    let capped = 1.0 / lo - 1.0 / hi > cfg.rel_gap / lo;
    Ok(EllipsoidOutcome { x: vec![lo], value: 1.0 / lo, lower_bound: 1.0 / hi, iterations: it, cuts, capped })
}

/// Minimise Σ 1/x_i. `incumbent` must be accepted by the oracle; it is
/// returned if nothing better is found.
pub fn minimize_inverse_sum<F>(
    ub: f64,
    center: Vec<f64>,
    radius: f64,
    incumbent: Vec<f64>,
    cfg: &EllipsoidConfig,
    mut oracle: F,
) -> Result<EllipsoidOutcome>
where
    F: FnMut(&[f64]) -> Result<Cut>,
{
    let d = center.len();
    if d == 0 {
        return Ok(EllipsoidOutcome { x: vec![], value: 0.0, lower_bound: 0.0, iterations: 0, cuts: 0, capped: false });
    }
    if incumbent.len() != d || incumbent.iter().any(|v| !(*v > 0.0 && *v <= ub)) {
        return Err(Error::InvalidInput("ellipsoid incumbent must lie in the box".into()));
    }
    if oracle(&incumbent)? != Cut::Accept {
        return Err(Error::NonConvergence("ellipsoid incumbent rejected by the oracle".into()));
    }
    let cap = (cfg.cap_factor * (d * d) as f64).ceil() as usize;
    if d == 1 {
        return interval_search(ub, incumbent[0], cap, cfg, oracle);
    }
    let df = d as f64;
    let mut c = DVector::from_vec(center);
    let mut p = DMatrix::<f64>::identity(d, d) * (radius * radius);
    let mut best_x = incumbent.clone();
    let mut best = objective(&incumbent);
    let mut lower = 0.0f64;
    let mut cuts = 0;
    for it in 0..cap {
        let cs = c.as_slice();
        // (normal, level, whether this was an objective cut)
        let (g, level, is_objective) = if let Some(i) = (0..d).find(|&i| cs[i] <= 0.0) {
            let mut g = DVector::zeros(d);
            g[i] = -1.0;
            (g, 0.0, false)
        } else if let Some(i) = (0..d).find(|&i| cs[i] > ub) {
            let mut g = DVector::zeros(d);
            g[i] = 1.0;
            (g, ub, false)
        } else {
            match oracle(cs)? {
                Cut::Reject { normal, level } => {
                    cuts += 1;
                    (DVector::from_vec(normal), level, false)
                }
                Cut::Accept => {
                    let f = objective(cs);
                    if f < best {
                        best = f;
                        best_x = cs.to_vec();
                    }
                    let g = DVector::from_iterator(d, cs.iter().map(|v| -1.0 / (v * v)));
                    let width = (g.dot(&(&p * &g))).max(0.0).sqrt();
                    lower = lower.max(f - width);
                    if best - lower <= cfg.rel_gap * best {
                        return Ok(EllipsoidOutcome { x: best_x, value: best, lower_bound: lower, iterations: it + 1, cuts, capped: false });
                    }
                    // keep {x : f(c) + g·(x − c) ≤ best}
                    let level = g.dot(&c) + best - f;
                    (g, level, true)
                }
            }
        };
        let pg = &p * &g;
        let gpg = g.dot(&pg);
        if !(gpg > 0.0) || !gpg.is_finite() {
            break;
        }
        let s = gpg.sqrt();
        let alpha = ((g.dot(&c) - level) / s).max(0.0);
        if alpha >= 1.0 {
            if is_objective {
                // nothing in the ellipsoid beats the incumbent
                return Ok(EllipsoidOutcome { x: best_x, value: best, lower_bound: best, iterations: it + 1, cuts, capped: false });
            }
            break;
        }
        let gt = pg / s;
        let tau = (1.0 + df * alpha) / (df + 1.0);
        let sigma = 2.0 * (1.0 + df * alpha) / ((df + 1.0) * (1.0 + alpha));
        let scale = df * df * (1.0 - alpha * alpha) / (df * df - 1.0);
        c -= &gt * tau;
        p = (&p - (&gt * gt.transpose()) * sigma) * scale;
        p = (&p + p.transpose()) * 0.5;
    }
    Ok(EllipsoidOutcome { x: best_x, value: best, lower_bound: lower, iterations: cap, cuts, capped: true })
}
